import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from ranking.config import ExperimentConfig
from ranking.exceptions import ConfigError
from ranking.generators import derive_bounds
from ranking.presets import PRESETS, get_preset


class ExperimentConfigTests(SimpleTestCase):

    def test_defaults_and_sizes(self):
        config = ExperimentConfig.from_dict({'n': 10, 'k': 3})
        self.assertEqual(config.sizes, (4, 3, 3))
        self.assertEqual(config.total_n, 10)
        self.assertEqual(config.intra_probabilities(), (0.02, 0.02, 0.02))
        self.assertEqual(ExperimentConfig(domain_sizes=(5, 7)).total_n, 12)

    def test_unknown_keys_and_types(self):
        bad = [
            {'n': 200, 'colour': 'red'},
            {'n': '200'},
            {'n': True},
            {'n': 200, 'purify': 1},
            {'n': 200, 'eps': 'small'},
            {'n': 200, 'seeds': [1, 'two']},
            {'n': 200, 'p_intra': [0.1, 'x']},
            [1, 2],
        ]
        for data in bad:
            with self.subTest(data=data):
                with self.assertRaises(ConfigError):
                    ExperimentConfig.from_dict(data)

    def test_invariants(self):
        bad = [
            {},
            {'n': 3, 'k': 2},
            {'n': 10, 'domain_sizes': [5, 6]},
            {'n': 200, 'mode': 'oracle'},
            {'n': 200, 'eps': 1.0},
            {'n': 200, 'p_succ': 0.5},
            {'n': 200, 'seeds': []},
            {'n': 200, 'vote_mode': 'ranked'},
        ]
        for data in bad:
            with self.subTest(data=data):
                with self.assertRaises(ConfigError):
                    ExperimentConfig.from_dict(data)

    def test_overrides(self):
        config = ExperimentConfig(n=200)
        self.assertIs(config.with_overrides(seeds=None, gadget=None), config)
        changed = config.with_overrides(seeds=[3, 4], purify=False, gadget='random21')
        self.assertEqual(changed.seeds, (3, 4))
        self.assertFalse(changed.purify)
        self.assertEqual(changed.gadget, 'random21')
        with self.assertRaises(ConfigError):
            config.with_overrides(depth='deep')

    def test_dict_round_trip(self):
        config = ExperimentConfig(mode='voting', domain_sizes=(30, 40), p_intra=(0.01, 0.03), seeds=(1, 2))
        self.assertEqual(ExperimentConfig.from_dict(config.to_dict()), config)
        self.assertEqual(json.loads(json.dumps(config.to_dict()))['seeds'], [1, 2])

    def test_from_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'two-domains.json'
            path.write_text(json.dumps({'n': 100, 'k': 2}))
            self.assertEqual(ExperimentConfig.from_file(path).label, 'two-domains')
            path.write_text('{"n": 100,')
            with self.assertRaises(ConfigError):
                ExperimentConfig.from_file(path)
            with self.assertRaises(ConfigError):
                ExperimentConfig.from_file(Path(tmp) / 'missing.json')

    def test_planted_bounds(self):
        bounds = ExperimentConfig(n=200, k=2, p_intra=0.02, p_cross=0.3).bounds()
        self.assertEqual((bounds.p_u, bounds.p_m, bounds.k_u), (0.02, 0.3, 2))
        self.assertEqual(ExperimentConfig(n=100, k=1, p_intra=0.02).bounds().p_m, 0.5)
        with self.assertRaises(ConfigError):
            ExperimentConfig(n=100, k=1, p_intra=0.0).bounds()
        self.assertEqual(ExperimentConfig(n=100, k=1, p_intra=0.0, p_u=0.01).bounds().p_u, 0.01)

    def test_voting_bounds(self):
        config = ExperimentConfig(mode='voting', n=200, p_succ=0.6, votes=100, ratio=0.05, purify=False)
        self.assertEqual(config.voting_config().m, 5)
        p_u, p_m = derive_bounds(config.voting_config())
        bounds = config.bounds()
        self.assertAlmostEqual(bounds.p_u, p_u)
        self.assertAlmostEqual(bounds.p_m, p_m)

        halved = config.with_overrides(purify=True)
        self.assertEqual((halved.voting_config(halved=True).M, halved.voting_config(halved=True).m), (50, 2))
        self.assertAlmostEqual(halved.bounds().p_u, derive_bounds(halved.voting_config(halved=True))[0])

    def test_planted_spec(self):
        spec = ExperimentConfig(n=9, k=3, p_intra=0.05, p_cross=0.4).planted_spec()
        self.assertEqual(spec.domain_sizes, (3, 3, 3))
        self.assertAlmostEqual(spec.p_cross[2][0], 0.6)
        self.assertEqual(spec.bounds.k_u, 3)

    def test_query_count(self):
        self.assertEqual(ExperimentConfig(n=20).query_count(500), 500)
        self.assertEqual(ExperimentConfig(n=20, queries=30).query_count(500), 30)

    def test_voting_purify_needs_two_votes(self):
        with self.assertRaises(ConfigError) as caught:
            ExperimentConfig(mode='voting', n=200, votes=1)
        self.assertIn('votes=1', str(caught.exception))
        self.assertEqual(ExperimentConfig(mode='voting', n=200, votes=1, purify=False).voting_config().M, 1)
        # planted runs never split votes
        self.assertEqual(ExperimentConfig(n=200, votes=1).votes, 1)

    def test_voting_split_must_leave_intra_votes(self):
        # 3 votes with ratio 0.5 gives M=3, m=2 and halves to M=1, m=1
        with self.assertRaises(ConfigError) as caught:
            ExperimentConfig(mode='voting', n=200, votes=3, ratio=0.5)
        self.assertIn('ratio=0.5', str(caught.exception))
        ExperimentConfig(mode='voting', n=200, votes=3, ratio=0.5, purify=False)

    def test_merge_rule(self):
        self.assertEqual(ExperimentConfig(n=100).merge, 'bound')
        self.assertEqual(ExperimentConfig.from_dict({'n': 100, 'merge': 'midpoint'}).merge, 'midpoint')
        with self.assertRaises(ConfigError):
            ExperimentConfig(n=100, merge='greedy')
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_dict({'n': 100, 'merge': 1})


class PresetTests(SimpleTestCase):

    def test_every_point_is_a_complete_config(self):
        for preset in PRESETS.values():
            for point in preset.points():
                with self.subTest(preset=preset.name, label=point.label):
                    bounds = point.bounds()
                    self.assertLess(bounds.p_u, bounds.p_m)
                    self.assertTrue(point.label.startswith(preset.name))

    def test_sweep_points(self):
        preset = get_preset('figure1-mini')
        self.assertEqual([p.ratio for p in preset.points()], [0.02, 0.05, 0.1, 0.2])
        self.assertEqual(preset.x_label, 'ratio')
        self.assertEqual(get_preset('figure3-purity').x_label, 'find_runs_fraction')
        self.assertEqual(len(get_preset('smoke').points()), 1)

    def test_unknown_preset(self):
        with self.assertRaises(ConfigError):
            get_preset('table9')

    def test_voting_presets_use_derived_bounds(self):
        for name in ('table1-mini', 'figure1-mini', 'depth-sweep'):
            base = get_preset(name).base
            with self.subTest(preset=name):
                self.assertIsNone(base.p_u)
                self.assertIsNone(base.p_m)
                self.assertFalse(base.purify)
                self.assertEqual(base.merge, 'midpoint')
        bounds = get_preset('table1-mini').points()[0].bounds()
        self.assertAlmostEqual(bounds.p_m, 0.45)
        self.assertGreater(bounds.p_u, 0.14)
        self.assertLess(bounds.p_u, 0.18)

    def test_depth_and_growth_presets(self):
        depth = get_preset('depth-sweep')
        self.assertEqual([p.depth for p in depth.points()], [1, 2, 3, 5, 7])
        self.assertEqual(depth.points()[1].label, 'depth-sweep:depth=2')
        growth = get_preset('baseline-growth')
        self.assertEqual([p.total_n for p in growth.points()], [400, 800])
        self.assertEqual(growth.plot_metrics, ('baseline_intra_backward',))
        self.assertEqual(get_preset('smoke').plot_metrics, ('eps_clust', 'eps_baseline'))
        self.assertEqual(get_preset('figure3-purity').plot_metrics, ('reconstructed', 'min_purity'))
