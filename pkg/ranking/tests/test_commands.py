import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, tag

from ranking.evaluation import read_metrics_csv
from ranking.gadget import read_gadget
from ranking.models import ExperimentRecord
from ranking.tournament import Tournament, read_tournament, write_tournament

TINY = {'n': 60, 'k': 2, 'p_intra': 0.05, 'eps': 0.2, 'queries': 400}


class CommandTestCase(SimpleTestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.config = self.tmp / 'tiny.json'
        self.config.write_text(json.dumps(TINY))

    def tearDown(self):
        self._tmp.cleanup()

    def call(self, *args, **options):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO(), **options)
        return out.getvalue()

    def assertExitCode(self, code, *args, **options):
        with self.assertRaises(CommandError) as ctx:
            self.call(*args, **options)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception


class GenCommandTests(CommandTestCase):

    def test_writes_instance_files(self):
        self.call('gen', config=str(self.config), out=str(self.tmp / 'a'), seed=7)
        self.assertEqual(sorted(p.name for p in (self.tmp / 'a').iterdir()),
                         ['fresh.txt', 'groundtruth.txt', 'tournament.txt'])
        with open(self.tmp / 'a' / 'tournament.txt') as f:
            self.assertEqual(read_tournament(f)[0].n, 60)

    def test_deterministic_per_seed(self):
        self.call('gen', config=str(self.config), out=str(self.tmp / 'a'), seed=7)
        self.call('gen', config=str(self.config), out=str(self.tmp / 'b'), seed=7)
        for name in ('tournament.txt', 'groundtruth.txt', 'fresh.txt'):
            self.assertEqual((self.tmp / 'a' / name).read_text(), (self.tmp / 'b' / name).read_text())

    def test_no_purify_skips_fresh_tournament(self):
        self.call('gen', config=str(self.config), out=str(self.tmp / 'a'), no_purify=True)
        self.assertFalse((self.tmp / 'a' / 'fresh.txt').exists())

    def test_config_errors(self):
        self.assertExitCode(2, 'gen', out=str(self.tmp / 'a'))
        self.assertExitCode(2, 'gen', config=str(self.config), preset='smoke')
        self.assertExitCode(2, 'gen', config=str(self.tmp / 'missing.json'))
        bad = self.tmp / 'bad.json'
        bad.write_text(json.dumps({'n': 60, 'colour': 'red'}))
        self.assertExitCode(2, 'gen', config=str(bad))


class RunCommandTests(CommandTestCase):

    def test_writes_metrics_and_artifacts(self):
        output = self.call('run', config=str(self.config), out=str(self.tmp / 'run'), seeds=[1, 2])
        with open(self.tmp / 'run' / 'metrics.csv') as f:
            rows = read_metrics_csv(f)
        self.assertEqual([r.seed for r in rows], [1, 2])
        self.assertEqual(rows[0].label, 'tiny')
        self.assertTrue((self.tmp / 'run' / 'seed-2' / 'model.txt').exists())
        self.assertIn('seed 1: eps_clust=', output)

    def test_unknown_gadget(self):
        self.assertExitCode(2, 'run', config=str(self.config), out=str(self.tmp / 'run'), gadget='petersen')
        with open(self.tmp / 'run' / 'metrics.csv') as f:
            self.assertEqual(read_metrics_csv(f), [])

    def test_merge_rule_override(self):
        self.call('run', config=str(self.config), out=str(self.tmp / 'run'), seed=1, merge='midpoint',
                  no_purify=True)
        with open(self.tmp / 'run' / 'metrics.csv') as f:
            self.assertEqual(len(read_metrics_csv(f)), 1)


class RecordCommandTests(TestCase):

    def test_record_stores_rows(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = Path(tmp) / 'tiny.json'
            config.write_text(json.dumps(TINY))
            call_command('run', config=str(config), out=tmp, seed=3, record=True, stdout=StringIO())
        record = ExperimentRecord.objects.get()
        self.assertEqual((record.seed, record.n, record.label), (3, 60, 'tiny'))


class GadgetCommandTests(CommandTestCase):

    def test_make_and_verify_quadratic_residue(self):
        path = self.tmp / 'gadgets' / 'qr7.txt'
        output = self.call('gadget', 'make', '--qr', '7', '--ku', '2', '--verify', 'exhaustive', '--out', str(path))
        self.assertIn('over 35 subsets', output)
        with open(path) as f:
            gadget = read_gadget(f)
        self.assertEqual(gadget.h, 7)
        self.assertIn('Verified', self.call('gadget', 'verify', str(path), '--ku', '2'))

    def test_verify_reports_counterexample(self):
        path = self.tmp / 'transitive.txt'
        with open(path, 'w') as f:
            write_tournament(Tournament.transitive(range(6)), f)
        out = StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command('gadget', 'verify', str(path), '--ku', '2', stdout=out)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('Counterexample', out.getvalue())

    def test_size(self):
        self.assertIn('h=59', self.call('gadget', 'size', '--ku', '2', '--p', '0.5'))

    def test_construction_and_size_limit_errors(self):
        self.assertExitCode(2, 'gadget', 'make', '--qr', '6')
        self.assertExitCode(3, 'gadget', 'make', '--random', '60', '--seed', '1', '--verify', 'exhaustive')


class BenchCommandTests(CommandTestCase):

    def test_smoke_preset(self):
        out = self.tmp / 'bench'
        self.call('bench', preset='smoke', out=str(out))
        for name in ('metrics.csv', 'summary.csv', 'plot.svg'):
            self.assertTrue((out / name).exists(), name)

    def test_unknown_preset(self):
        self.assertExitCode(2, 'bench', preset='table9', out=str(self.tmp / 'bench'))

    @tag('slow')
    def test_purity_budget_sweep(self):
        out = self.tmp / 'fig3'
        self.call('bench', preset='figure3-purity', out=str(out), seeds=[1])
        summary = (out / 'summary.csv').read_text().splitlines()
        self.assertTrue(summary[0].startswith('find_runs_fraction,seeds'))
        self.assertGreater(len(summary), 2)
