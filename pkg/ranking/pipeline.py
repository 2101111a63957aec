"""
HeteroRanking pipeline: cluster, purify, order each cluster, answer queries.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, TextIO

import numpy as np

from ranking.clustering import (
    FindConfig,
    MergeConfig,
    Partitioning,
    dag_clustering,
    read_partitioning,
    write_partitioning,
)
from ranking.exceptions import ConfigError, ContractViolation, FormatError, InvalidQueryError, InvalidVertexError
from ranking.fas import QuickSortConfig, best_of_runs
from ranking.gadget import Gadget
from ranking.generators import Bounds, GroundTruth
from ranking.purify import PurifyConfig, purify
from ranking.seeding import child_seed
from ranking.tournament import Ordering, Tournament, VertexSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    """Stage configs; ``purify=None`` skips purification (R = every clustered vertex)."""
    find: FindConfig
    quicksort: QuickSortConfig = field(default_factory=QuickSortConfig)
    purify: Optional[PurifyConfig] = field(default_factory=PurifyConfig)
    merge: MergeConfig = field(default_factory=MergeConfig)


class RankModel:
    """Clusters with one ordering each. Read-only once built."""

    def __init__(self, partitioning: Partitioning, orderings: List[Ordering], nonoutliers: VertexSet):
        if len(orderings) != len(partitioning.clusters):
            raise ContractViolation("need exactly one ordering per cluster")
        n = partitioning.n
        cluster_index = np.full(n, -1, dtype=np.int64)
        position = np.full(n, -1, dtype=np.int64)
        for i, (cluster, order) in enumerate(zip(partitioning.clusters, orderings)):
            if not np.array_equal(np.sort(order), np.sort(cluster)):
                raise ContractViolation(f"ordering {i} is not a permutation of its cluster")
            if (cluster_index[order] >= 0).any():
                raise ContractViolation(f"cluster {i} overlaps an earlier cluster")
            cluster_index[order] = i
            position[order] = np.arange(len(order))
        for arr in (cluster_index, position):
            arr.setflags(write=False)
        self.partitioning = partitioning
        self.orderings = [np.asarray(o, dtype=np.int64) for o in orderings]
        self.nonoutliers = np.asarray(nonoutliers, dtype=np.int64)
        self.cluster_index = cluster_index
        self.position = position

    @classmethod
    def from_groundtruth(cls, truth: GroundTruth) -> 'RankModel':
        """Oracle model: the planted domains with their canonical orders."""
        clusters = [np.sort(o) for o in truth.orderings]
        partitioning = Partitioning(n=truth.n, clusters=clusters, remainder=np.empty(0, dtype=np.int64))
        return cls(partitioning, list(truth.orderings), np.arange(truth.n))

    @property
    def n(self) -> int:
        return self.partitioning.n

    def __repr__(self) -> str:
        return f"RankModel(n={self.n}, clusters={len(self.orderings)})"


def hetero_ranking(t: Tournament, bounds: Bounds, eps: float, gadget: Gadget, config: PipelineConfig,
                   seed, fresh: Optional[Tournament] = None) -> RankModel:
    """
    Cluster ``t``, purify against the independent tournament ``fresh`` and
    order every cluster with QuickSort pivoting only on nonoutliers.
    """
    partitioning = dag_clustering(t, bounds, eps, gadget, config.find, child_seed(seed, 0),
                                  quicksort=config.quicksort, merge=config.merge)
    if config.purify is None:
        R = partitioning.clustered()
    else:
        if fresh is None:
            raise ConfigError("purify needs a fresh tournament drawn independently of the input")
        R = purify(partitioning, fresh, bounds, eps, config.purify, child_seed(seed, 1))

    is_kept = np.zeros(t.n, dtype=bool)
    is_kept[R] = True
    orderings = []
    for i, cluster in enumerate(partitioning.clusters):
        pivots = cluster[is_kept[cluster]]
        orderings.append(best_of_runs(t, cluster, pivots, config.quicksort, child_seed(seed, 2 + i)))
    logger.info(
        f"hetero_ranking: {len(orderings)} clusters ordered, {len(R)} nonoutliers, "
        f"{len(partitioning.remainder)} unclustered"
    )
    return RankModel(partitioning, orderings, R)


# ── Queries ──────────────────────────────────────────────────────────────

def _check_queries(model: RankModel, queries: np.ndarray) -> None:
    if queries.ndim != 2 or queries.shape[1] != 2:
        raise InvalidQueryError(f"queries must be an (N, 2) array, got shape {queries.shape}")
    if queries.size and (queries.min() < 0 or queries.max() >= model.n):
        raise InvalidVertexError(f"query vertex outside 0..{model.n - 1}")
    if (queries[:, 0] == queries[:, 1]).any():
        raise InvalidQueryError("a query compares a vertex with itself")


def answer_query(model: RankModel, u: int, v: int, seed=None) -> int:
    """Earlier vertex when both share a cluster, otherwise a fair coin."""
    return int(answer_queries(model, np.array([[u, v]]), seed)[0])


def answer_queries(model: RankModel, queries, seed=None) -> np.ndarray:
    """Preferred vertex for every row of an (N, 2) query array."""
    queries = np.asarray(queries, dtype=np.int64)
    _check_queries(model, queries)
    u, v = queries[:, 0], queries[:, 1]
    cu, cv = model.cluster_index[u], model.cluster_index[v]
    same = (cu >= 0) & (cu == cv)
    coin = np.random.default_rng(seed).random(len(queries)) < 0.5
    u_first = np.where(same, model.position[u] < model.position[v], coin)
    return np.where(u_first, u, v)


def correct_query_bound(N: int, M: float, m: float, eps: float, p_u: float) -> float:
    """Guaranteed number of correct answers out of N queries."""
    if M + m <= 0:
        raise ConfigError("M + m must be positive")
    return N * (M / (M + m)) * (1 - 2 * eps) ** 2 * (1 - 4 * p_u)


# ── Model file ───────────────────────────────────────────────────────────

def write_model(model: RankModel, stream: TextIO) -> None:
    write_partitioning(model.partitioning, stream)
    for i, order in enumerate(model.orderings):
        stream.write(f"order {i}: {' '.join(str(v) for v in order)}\n")
    stream.write(f"nonoutliers: {' '.join(str(v) for v in model.nonoutliers)}\n")


def read_model(stream: TextIO) -> RankModel:
    partition_lines, orderings, nonoutliers = [], [], None
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if line.startswith('order '):
            head, _, body = line.partition(':')
            if head.split() != ['order', str(len(orderings))]:
                raise FormatError(f"line {lineno}: unexpected {head!r}")
            orderings.append(_parse_vertices(body, lineno))
        elif line.startswith('nonoutliers:'):
            nonoutliers = _parse_vertices(line.partition(':')[2], lineno)
        else:
            partition_lines.append(raw)
    if nonoutliers is None:
        raise FormatError("model file has no nonoutliers line")
    partitioning = read_partitioning(partition_lines)
    try:
        return RankModel(partitioning, orderings, nonoutliers)
    except ContractViolation as e:
        raise FormatError(f"invalid model file: {e}") from e


def _parse_vertices(body: str, lineno: int) -> np.ndarray:
    try:
        return np.asarray([int(tok) for tok in body.split()], dtype=np.int64)
    except ValueError:
        raise FormatError(f"line {lineno}: non-integer vertex id")
