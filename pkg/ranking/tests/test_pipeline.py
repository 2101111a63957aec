from io import StringIO

import numpy as np
from django.test import SimpleTestCase

from ranking.clustering import FindConfig, Partitioning
from ranking.exceptions import ConfigError, ContractViolation, FormatError, InvalidQueryError, InvalidVertexError
from ranking.gadget import quadratic_residue_gadget
from ranking.generators import Bounds, GroundTruth, PlantedSpec, generate_planted
from ranking.pipeline import (
    PipelineConfig,
    RankModel,
    answer_queries,
    answer_query,
    hetero_ranking,
    read_model,
    correct_query_bound,
    write_model,
)
from ranking.purify import PurifyConfig
from ranking.tournament import backward_edges

BOUNDS = Bounds(p_u=0.01, p_m=0.5, k_u=2)


def small_model():
    # cluster 0 ordered 2, 0, 1; vertices 3 and 4 unclustered
    p = Partitioning(n=5, clusters=[np.array([0, 1, 2])], remainder=np.array([3, 4]))
    return RankModel(p, [np.array([2, 0, 1])], np.array([0, 1, 2]))


class HeteroRankingTests(SimpleTestCase):

    def setUp(self):
        self.t, self.truth = generate_planted(PlantedSpec.uniform([200], 0.0), 3)
        self.find = FindConfig.build(0.1, 0.5, 7)

    def test_transitive_domain_is_ranked_exactly(self):
        config = PipelineConfig(find=self.find, purify=PurifyConfig())
        model = hetero_ranking(self.t, BOUNDS, 0.1, quadratic_residue_gadget(7), config, 1, fresh=self.t)
        self.assertEqual(len(model.orderings), 1)
        self.assertEqual(backward_edges(self.t, model.orderings[0]), 0)
        self.assertEqual(model.nonoutliers.tolist(), model.partitioning.clustered().tolist())

        clustered = model.partitioning.clustered()
        rng = np.random.default_rng(0)
        queries = np.array([rng.choice(clustered, size=2, replace=False) for _ in range(500)])
        answers = answer_queries(model, queries, seed=1)
        for (u, v), answer in zip(queries, answers):
            self.assertEqual(answer == u, self.truth.prefers(u, v))

    def test_without_purify(self):
        config = PipelineConfig(find=self.find, purify=None)
        model = hetero_ranking(self.t, BOUNDS, 0.1, quadratic_residue_gadget(7), config, 2)
        self.assertEqual(model.nonoutliers.tolist(), model.partitioning.clustered().tolist())

    def test_purify_needs_fresh_tournament(self):
        t, _ = generate_planted(PlantedSpec.uniform([5], 0.0), 1)
        with self.assertRaises(ConfigError):
            hetero_ranking(t, BOUNDS, 0.1, quadratic_residue_gadget(7), PipelineConfig(find=self.find), 1)


class RankModelTests(SimpleTestCase):

    def test_lookup_tables(self):
        model = small_model()
        self.assertEqual(model.cluster_index.tolist(), [0, 0, 0, -1, -1])
        self.assertEqual(model.position.tolist()[:3], [1, 2, 0])
        with self.assertRaises(ValueError):
            model.position[0] = 5

    def test_ordering_must_match_cluster(self):
        p = Partitioning(n=3, clusters=[np.array([0, 1])], remainder=np.array([2]))
        with self.assertRaises(ContractViolation):
            RankModel(p, [np.array([0, 2])], np.array([0, 1]))
        with self.assertRaises(ContractViolation):
            RankModel(p, [], np.array([]))

    def test_oracle_model(self):
        truth = GroundTruth.from_orderings([[3, 1], [0, 2, 4]])
        model = RankModel.from_groundtruth(truth)
        self.assertEqual(answer_query(model, 1, 3), 3)
        self.assertEqual(answer_query(model, 4, 0), 0)


class QueryTests(SimpleTestCase):

    def test_same_cluster_answers_follow_ordering(self):
        model = small_model()
        self.assertEqual(answer_query(model, 0, 1), 0)
        self.assertEqual(answer_query(model, 1, 2), 2)
        self.assertEqual(answer_query(model, 2, 0, seed=5), answer_query(model, 2, 0, seed=6))

    def test_unclustered_queries_are_coin_flips(self):
        model = small_model()
        answers = answer_queries(model, np.tile([0, 3], (10000, 1)), seed=4)
        share = (answers == 0).mean()
        self.assertLess(abs(share - 0.5), 4 * 0.005)
        self.assertTrue(set(answers.tolist()) <= {0, 3})

    def test_invalid_queries(self):
        model = small_model()
        with self.assertRaises(InvalidQueryError):
            answer_query(model, 2, 2)
        with self.assertRaises(InvalidVertexError):
            answer_query(model, 0, 9)
        with self.assertRaises(InvalidQueryError):
            answer_queries(model, np.array([0, 1, 2]))


class BoundTests(SimpleTestCase):

    def test_correct_query_bound(self):
        self.assertAlmostEqual(correct_query_bound(10 ** 4, 100, 10, 0.05, 0.02), 6774.55, places=1)
        self.assertEqual(correct_query_bound(500, 100, 0, 0.0, 0.0), 500)
        self.assertEqual(correct_query_bound(500, 100, 10, 0.5, 0.02), 0)
        with self.assertRaises(ConfigError):
            correct_query_bound(500, 0, 0, 0.1, 0.02)


class ModelFileTests(SimpleTestCase):

    def test_round_trip(self):
        model = small_model()
        buf = StringIO()
        write_model(model, buf)
        loaded = read_model(StringIO(buf.getvalue()))
        self.assertEqual([o.tolist() for o in loaded.orderings], [[2, 0, 1]])
        self.assertEqual(loaded.nonoutliers.tolist(), [0, 1, 2])
        self.assertEqual(loaded.partitioning.remainder.tolist(), [3, 4])
        self.assertEqual(loaded.position.tolist(), model.position.tolist())

    def test_malformed(self):
        base = '# partitioning n=3\ncluster 0: 0 1\nremainder: 2\n'
        cases = [
            base + 'order 0: 1 0\n',
            base + 'order 0: 0 2\nnonoutliers: 0\n',
            base + 'order 1: 0 1\nnonoutliers: 0\n',
            base + 'order 0: 0 x\nnonoutliers: 0\n',
        ]
        for text in cases:
            with self.subTest(text=text):
                with self.assertRaises(FormatError):
                    read_model(StringIO(text))
