import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, TestCase, tag

from ranking.config import ExperimentConfig
from ranking.evaluation import MetricsRow, bad_edges, global_order, intra_backward_edges, read_metrics_csv
from ranking.exceptions import ConstructionError
from ranking.models import ExperimentMode, ExperimentRecord
from ranking.presets import get_preset
from ranking.reporting import MetricsCsvWriter, plot_summary, summarize, write_summary, x_value
from ranking.services import ExperimentService
from ranking.tasks import run_experiment_seed
from ranking.tournament import backward_edges

TINY = ExperimentConfig(n=60, k=2, p_intra=0.05, eps=0.2, queries=400, label='tiny')


def row(seed, label='a', **overrides):
    values = dict(seed=seed, n=60, k=2, ratio=0.05, p_succ=0.6, eps_config=0.2, eps_clust=0.1,
                  eps_baseline=0.3, coverage=0.9, min_purity=1.0, cluster_count=2, find_runs=10,
                  copies_found=0, wall_ms=10, label=label, budget=10, reconstructed=0.5)
    values.update(overrides)
    return MetricsRow(**values)


class FailingSeedService(ExperimentService):

    @classmethod
    def run_seed(cls, config, seed, *args):
        if seed == 2:
            raise ConstructionError("seed 2 cannot be generated")
        return super().run_seed(config, seed, *args)


class GenerateTests(SimpleTestCase):

    def test_planted_fresh_tournament_shares_domains(self):
        instance = ExperimentService.generate(TINY.with_overrides(p_intra=0.0, p_u=0.01), 3)
        self.assertNotEqual(instance.tournament, instance.fresh)
        for order in instance.truth.orderings:
            self.assertEqual(backward_edges(instance.tournament, order), 0)
            self.assertEqual(backward_edges(instance.fresh, order), 0)

    def test_planted_without_purify(self):
        self.assertIsNone(ExperimentService.generate(TINY.with_overrides(purify=False), 3).fresh)

    def test_voting_splits_votes(self):
        config = ExperimentConfig(mode='voting', n=40, k=2, votes=20, ratio=0.1)
        instance = ExperimentService.generate(config, 4)
        self.assertIsNotNone(instance.fresh)
        self.assertIsNotNone(instance.truth.global_position)
        self.assertEqual(instance.tally.total.max(), 20)

    def test_deterministic(self):
        one = ExperimentService.generate(TINY, 5)
        two = ExperimentService.generate(TINY, 5)
        self.assertEqual(one.tournament, two.tournament)
        self.assertEqual(one.fresh, two.fresh)


class RunTests(SimpleTestCase):

    def test_run_seed_writes_artifacts(self):
        with tempfile.TemporaryDirectory() as tmp:
            result = ExperimentService.run_seed(TINY, 1, Path(tmp))
            names = sorted(p.name for p in (Path(tmp) / 'seed-1').iterdir())
        self.assertEqual(names, ['fresh.txt', 'groundtruth.txt', 'model.txt', 'nonoutliers.txt', 'tournament.txt'])
        self.assertEqual(len(result.rows), 1)
        metrics = result.rows[0]
        self.assertEqual((metrics.seed, metrics.n, metrics.k, metrics.label), (1, 60, 2, 'tiny'))
        self.assertEqual(metrics.find_runs, len(result.model.partitioning.trace))

    def test_budget_rows(self):
        result = ExperimentService.run_seed(TINY.with_overrides(purify=False), 2, budgets=(0.0, 0.5, 1.0))
        budgets = [r.budget for r in result.rows]
        self.assertEqual(budgets, sorted(budgets))
        self.assertEqual(budgets[0], 0)
        self.assertEqual(result.rows[0].cluster_count, 0)
        reconstructed = [r.reconstructed for r in result.rows]
        self.assertEqual(reconstructed, sorted(reconstructed))

    def test_workers_keep_seed_order(self):
        config = TINY.with_overrides(seeds=[3, 1, 2])
        serial = ExperimentService.run_seeds(config)
        parallel = ExperimentService.run_seeds(config, workers=3)
        self.assertEqual([r.seed for r in parallel], [3, 1, 2])
        self.assertEqual([r.eps_clust for r in parallel], [r.eps_clust for r in serial])

    def test_rows_are_delivered_in_seed_order(self):
        config = TINY.with_overrides(seeds=[3, 1, 2])
        for workers in (1, 3):
            delivered = []
            rows = ExperimentService.run_seeds(config, workers=workers, on_rows=delivered.append)
            self.assertEqual([[r.seed for r in batch] for batch in delivered], [[3], [1], [2]])
            self.assertEqual([r.seed for r in rows], [3, 1, 2])

    def test_metrics_of_finished_seeds_survive_a_failure(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'metrics.csv'
            with self.assertLogs('ranking.reporting', level='WARNING'), self.assertRaises(ConstructionError):
                with MetricsCsvWriter(path) as sink:
                    FailingSeedService.run_seeds(TINY.with_overrides(seeds=[1, 2, 3]), on_rows=sink.write)
            with open(path) as f:
                self.assertEqual([r.seed for r in read_metrics_csv(f)], [1])

    def test_quality_columns(self):
        result = ExperimentService.run_seed(TINY, 1)
        metrics = result.rows[0]
        self.assertEqual(metrics.bad_edges, bad_edges(result.instance.tournament, result.instance.truth))
        self.assertGreater(metrics.bad_edge_bound, 0.0)
        self.assertLessEqual(metrics.correct_bound, 1.0)
        self.assertTrue(0.0 <= metrics.inversions <= 1.0)
        self.assertTrue(0.0 < metrics.correct_fraction <= 1.0)
        # planted cross queries have no global order to score against
        self.assertLessEqual(metrics.correct_fraction, 1.0 - metrics.eps_clust)
        self.assertGreaterEqual(metrics.baseline_intra_backward, 0)

        noiseless = ExperimentService.run_seed(TINY.with_overrides(p_intra=0.0, p_u=0.01, purify=False), 2).rows[0]
        self.assertEqual(noiseless.bad_edges, 0)
        self.assertEqual(noiseless.bad_edge_bound, 0.0)

    def test_task_reports_success_and_errors(self):
        result = run_experiment_seed(TINY.to_dict(), 1)
        self.assertTrue(result['success'])
        self.assertEqual(result['rows'][0]['seed'], 1)
        failed = run_experiment_seed({'n': 60, 'gadget': 'petersen'}, 1)
        self.assertFalse(failed['success'])
        self.assertIn('petersen', failed['error'])


class ReportingTests(SimpleTestCase):

    def test_summarize_by_label(self):
        rows = [row(1, 'a', ratio=0.02, eps_clust=0.1), row(2, 'a', ratio=0.02, eps_clust=0.3),
                row(1, 'b', ratio=0.1, eps_clust=0.2)]
        points = summarize(rows, 'ratio')
        self.assertEqual([p.x for p in points], [0.02, 0.1])
        self.assertAlmostEqual(points[0].mean['eps_clust'], 0.2)
        self.assertAlmostEqual(points[0].stderr['eps_clust'], 0.1)
        self.assertEqual(points[1].stderr['eps_clust'], 0.0)

    def test_summarize_budget_sweep(self):
        rows = [row(1, budget=2, find_runs=10, reconstructed=0.2), row(1, budget=10, find_runs=10, reconstructed=0.9),
                row(2, budget=1, find_runs=5, reconstructed=0.4), row(2, budget=5, find_runs=5, reconstructed=0.7)]
        points = summarize(rows, 'find_runs_fraction')
        self.assertEqual([p.x for p in points], [0.2, 1.0])
        self.assertAlmostEqual(points[0].mean['reconstructed'], 0.3)
        self.assertEqual(points[1].seeds, 2)

    def test_files(self):
        rows = [row(1, ratio=0.02), row(2, ratio=0.02)]
        points = summarize(rows, 'ratio')
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / 'bench'
            with MetricsCsvWriter(out / 'metrics.csv') as sink:
                sink.write(rows[:1])
                sink.write(rows[1:])
            self.assertEqual(sink.rows, 2)
            write_summary(points, 'ratio', out / 'summary.csv')
            plot_summary(points, 'ratio', ('eps_clust', 'eps_baseline'), out / 'plot.svg', title='t')
            with open(out / 'metrics.csv') as f:
                self.assertEqual(read_metrics_csv(f), rows)
            header = (out / 'summary.csv').read_text().splitlines()[0]
            self.assertTrue(header.startswith('ratio,seeds,eps_clust_mean,eps_clust_stderr'))
            self.assertIn('<svg', (out / 'plot.svg').read_text())

    def test_swept_key_read_from_label(self):
        rows = [row(1, 'depth-sweep:depth=5'), row(2, 'depth-sweep:depth=5', eps_clust=0.3),
                row(1, 'depth-sweep:depth=1', eps_clust=0.4)]
        self.assertEqual(x_value(rows[0], 'depth'), 5.0)
        self.assertEqual(x_value(rows[0], 'ratio'), 0.05)
        points = summarize(rows, 'depth')
        self.assertEqual([p.x for p in points], [1.0, 5.0])
        self.assertAlmostEqual(points[1].mean['eps_clust'], 0.2)

    def test_count_metrics_plot(self):
        rows = [row(1, 'growth:n=400', n=400, baseline_intra_backward=40), row(1, 'growth:n=800', n=800,
                                                                         baseline_intra_backward=170)]
        points = summarize(rows, 'n')
        self.assertEqual([p.mean['baseline_intra_backward'] for p in points], [40.0, 170.0])
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'plot.svg'
            plot_summary(points, 'n', ('baseline_intra_backward',), path, title='growth')
            self.assertIn('<svg', path.read_text())


class DeskExperimentTests(SimpleTestCase):

    @tag('slow')
    def test_correct_fraction_meets_guarantee(self):
        config = ExperimentConfig(mode='voting', n=1000, k=2, ratio=0.05, p_succ=0.6, votes=100, eps=0.15,
                                  purify=False, merge='midpoint', queries=10000, seeds=(1, 2, 3, 4, 5))
        for metrics in ExperimentService.run_seeds(config):
            with self.subTest(seed=metrics.seed):
                self.assertGreater(metrics.correct_bound, 0.0)
                self.assertGreaterEqual(metrics.correct_fraction, metrics.correct_bound - 0.05)

    @tag('slow')
    def test_clustering_beats_global_quicksort(self):
        rows = ExperimentService.run_preset(get_preset('table1-mini'))
        self.assertEqual(len(rows), 5)
        eps_clust = np.mean([r.eps_clust for r in rows])
        gap = np.mean([r.eps_baseline - r.eps_clust for r in rows])
        self.assertGreaterEqual(gap, 0.10)
        self.assertLessEqual(eps_clust, 0.25)

    @tag('slow')
    def test_global_quicksort_intra_errors_grow_quadratically(self):
        small, large = get_preset('baseline-growth').points()
        growth = []
        for seed in range(1, 11):
            counts = []
            for config in (small, large):
                instance = ExperimentService.generate(config, seed)
                order = global_order(instance.tournament, seed)
                counts.append(intra_backward_edges(instance.tournament, order, instance.truth))
            growth.append(counts[1] / max(counts[0], 1))
        self.assertGreaterEqual(np.mean(growth), 3.0)


class RecordTests(TestCase):

    def test_rows_are_stored(self):
        rows = [row(1, 'tiny'), row(2, 'tiny')]
        self.assertEqual(ExperimentService.record_rows(rows, TINY), 2)
        records = list(ExperimentRecord.objects.all())
        self.assertEqual([r.seed for r in records], [1, 2])
        self.assertEqual(records[0].mode, ExperimentMode.PLANTED)
        self.assertEqual(records[0].config['n'], 60)
        self.assertEqual(str(records[0]), 'tiny seed=1: eps_clust=0.1000')
        self.assertTrue(np.isclose(records[1].eps_baseline, 0.3))
