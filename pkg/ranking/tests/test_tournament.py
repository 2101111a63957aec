from io import StringIO
from itertools import permutations

import numpy as np
from django.test import SimpleTestCase

from ranking.exceptions import ContractViolation, FormatError, InvalidVertexError, SizeLimitError
from ranking.tournament import (
    Direction,
    Tournament,
    backward_edges,
    delete_pairs,
    directed_density,
    direction,
    in_neighbors_in,
    is_transitive,
    max_transitive_subset,
    out_neighbors_in,
    read_tournament,
    transitive_order,
    write_tournament,
)


def three_cycle():
    return Tournament.from_edges(3, [(0, 1), (1, 2), (2, 0)])


class TournamentConstructionTests(SimpleTestCase):

    def test_from_pairs_orients_lower_vertex_first(self):
        # pairs in order (0,1), (0,2), (1,2)
        t = Tournament.from_pairs(3, [True, False, True])
        self.assertEqual(direction(t, 0, 1), Direction.FORWARD)
        self.assertEqual(direction(t, 0, 2), Direction.BACKWARD)
        self.assertEqual(direction(t, 2, 0), Direction.FORWARD)
        self.assertEqual(direction(t, 1, 2), Direction.FORWARD)

    def test_from_pairs_with_absent_pairs(self):
        t = Tournament.from_pairs(3, [True, True, True], present=[True, False, True])
        self.assertEqual(direction(t, 0, 2), Direction.DELETED)
        self.assertTrue(t.has_deletions())
        self.assertEqual(t.present_pair_count(), 2)

    def test_adjacency_is_read_only(self):
        t = three_cycle()
        with self.assertRaises(ValueError):
            t.adj[0, 1] = False

    def test_rejects_both_directions(self):
        with self.assertRaises(ContractViolation):
            Tournament(np.ones((2, 2), dtype=bool) & ~np.eye(2, dtype=bool))

    def test_rejects_self_loops(self):
        with self.assertRaises(ContractViolation):
            Tournament(np.eye(2, dtype=bool))

    def test_direction_rejects_bad_vertices(self):
        t = three_cycle()
        with self.assertRaises(InvalidVertexError):
            direction(t, 1, 1)
        with self.assertRaises(InvalidVertexError):
            direction(t, 0, 5)

    def test_induced_relabels_in_given_order(self):
        t = Tournament.transitive([0, 1, 2, 3])
        sub = t.induced([3, 1])
        self.assertEqual(direction(sub, 1, 0), Direction.FORWARD)

    def test_equality_and_hash(self):
        self.assertEqual(three_cycle(), three_cycle())
        self.assertEqual(hash(three_cycle()), hash(three_cycle()))
        self.assertNotEqual(three_cycle(), Tournament.transitive([0, 1, 2]))


class DeletionTests(SimpleTestCase):

    def test_delete_returns_new_tournament(self):
        t = three_cycle()
        t2 = delete_pairs(t, [(0, 1)])
        self.assertEqual(direction(t2, 0, 1), Direction.DELETED)
        self.assertEqual(direction(t, 0, 1), Direction.FORWARD)

    def test_deleting_twice_is_idempotent_and_logged(self):
        t2 = delete_pairs(three_cycle(), [(0, 1)])
        with self.assertLogs('ranking.tournament', level='INFO'):
            t3 = delete_pairs(t2, [(1, 0)])
        self.assertEqual(t2, t3)

    def test_inplace_needs_working_copy(self):
        with self.assertRaises(ContractViolation):
            delete_pairs(three_cycle(), [(0, 1)], inplace=True)
        work = three_cycle().working_copy()
        delete_pairs(work, [(0, 1), (1, 2)], inplace=True)
        self.assertEqual(work.present_pair_count(), 1)


class BackwardEdgeTests(SimpleTestCase):

    def test_three_cycle_has_one_backward_edge_in_every_order(self):
        t = three_cycle()
        for order in permutations(range(3)):
            self.assertEqual(backward_edges(t, list(order)), 1)

    def test_transitive_order_has_none(self):
        t = Tournament.transitive([3, 1, 0, 2])
        self.assertEqual(backward_edges(t, [3, 1, 0, 2]), 0)
        self.assertEqual(backward_edges(t, [2, 0, 1, 3]), 6)

    def test_cross_mode_counts_only_between_sets(self):
        t = Tournament.transitive(range(5))
        reversed_order = [4, 3, 2, 1, 0]
        self.assertEqual(backward_edges(t, reversed_order, cross=([0, 1], [3, 4])), 4)
        self.assertEqual(backward_edges(t, reversed_order, cross=([0], [1])), 1)

    def test_cross_mode_needs_every_vertex_in_order(self):
        t = Tournament.transitive(range(5))
        with self.assertRaises(ContractViolation):
            backward_edges(t, [0, 1, 2], cross=([0], [4]))

    def test_deleted_pairs_do_not_count(self):
        t = delete_pairs(three_cycle(), [(2, 0)])
        self.assertEqual(backward_edges(t, [0, 1, 2]), 0)


class DensityTests(SimpleTestCase):

    def test_density_of_transitive_blocks(self):
        t = Tournament.transitive(range(4))
        self.assertEqual(directed_density(t, [0, 1], [2, 3]), 1.0)
        self.assertEqual(directed_density(t, [2, 3], [0, 1]), 0.0)

    def test_density_rejects_empty_or_overlapping_sets(self):
        t = Tournament.transitive(range(4))
        with self.assertRaises(ContractViolation):
            directed_density(t, [], [1])
        with self.assertRaises(ContractViolation):
            directed_density(t, [0, 1], [1, 2])

    def test_fully_deleted_block_warns(self):
        t = delete_pairs(Tournament.transitive(range(4)), [(0, 2)])
        with self.assertLogs('ranking.tournament', level='WARNING'):
            self.assertEqual(directed_density(t, [0], [2]), 0.0)

    def test_neighbourhoods(self):
        t = Tournament.transitive(range(5))
        self.assertEqual(out_neighbors_in(t, 2, [0, 1, 3, 4]).tolist(), [3, 4])
        self.assertEqual(in_neighbors_in(t, 2, [0, 1, 3, 4]).tolist(), [0, 1])


class TransitivityTests(SimpleTestCase):

    def test_transitive_order_recovers_order(self):
        t = Tournament.transitive([2, 0, 1])
        self.assertEqual(transitive_order(t, [0, 1, 2]).tolist(), [2, 0, 1])

    def test_cycle_has_no_transitive_order(self):
        self.assertIsNone(transitive_order(three_cycle(), [0, 1, 2]))
        self.assertTrue(is_transitive(three_cycle(), [0, 1]))

    def test_max_transitive_subset(self):
        self.assertEqual(max_transitive_subset(Tournament.transitive(range(6))), 6)
        self.assertEqual(max_transitive_subset(three_cycle()), 2)

    def test_max_transitive_subset_refuses_large_inputs(self):
        with self.assertRaises(SizeLimitError):
            max_transitive_subset(Tournament.transitive(range(25)))


class TextFormatTests(SimpleTestCase):

    def test_round_trip(self):
        rng = np.random.default_rng(4)
        t = delete_pairs(Tournament.from_pairs(8, rng.random(28) < 0.5), [(0, 1), (5, 7)])
        buf = StringIO()
        write_tournament(t, buf, comments=['made in a test'])
        loaded, comments = read_tournament(StringIO(buf.getvalue()))
        self.assertEqual(loaded, t)
        self.assertEqual(comments, ['made in a test'])
        again = StringIO()
        write_tournament(loaded, again, comments=comments)
        self.assertEqual(again.getvalue(), buf.getvalue())

    def test_malformed_files(self):
        cases = [
            'graph 3\n',
            'tournament x\n',
            '0 1\n',
            'tournament 3\n1 1\n',
            'tournament 3\n0 1\n1 0\n',
            'tournament 3\n0 1 2\n',
            'tournament 3\n0 7\n',
        ]
        for text in cases:
            with self.subTest(text=text):
                with self.assertRaises(FormatError):
                    read_tournament(StringIO(text))
