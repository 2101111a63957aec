"""
Purify: drop cluster vertices that sit on too many directed triangles.

Triangle counts are measured on a tournament drawn independently of the one
the clusters came from. A vertex v is on the triangle v→u→w→v for every
out-neighbour u and in-neighbour w with u→w.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from ranking.clustering import Partitioning
from ranking.exceptions import ConfigError, ContractViolation
from ranking.generators import Bounds
from ranking.seeding import child_seed
from ranking.tournament import Tournament, VertexSet, as_vertex_set

logger = logging.getLogger(__name__)

DEFAULT_SAMPLE_COEFFICIENT = 30.0
DEFAULT_THRESHOLD_SCALE = 8.0


@dataclass(frozen=True)
class PurifyConfig:
    """
    s = ceil(a ln n) sampled pairs per vertex; ``exact`` counts every triangle instead.

    ``threshold_scale`` multiplies the outlier threshold (1 - eps)^2 |P|^2 p_m^2 / 32.
    The unscaled cut sits below the triangle count of an ordinary vertex once
    intra-domain noise reaches a few percent. Such a vertex lies on about
    p |P|^2 / 2 triangles plus |P| / 4 for every outlier in the cluster, while
    a vertex with coin-flip edges into the cluster lies on about |P|^2 / 8.
    The default 8 moves the cut to (1 - eps)^2 |P|^2 p_m^2 / 4.
    """
    sample_coefficient: float = DEFAULT_SAMPLE_COEFFICIENT
    exact: bool = False
    threshold_scale: float = DEFAULT_THRESHOLD_SCALE

    def __post_init__(self):
        if self.sample_coefficient <= 0:
            raise ConfigError(f"sample coefficient must be positive, got {self.sample_coefficient}")
        if self.threshold_scale <= 0:
            raise ConfigError(f"threshold scale must be positive, got {self.threshold_scale}")

    def samples(self, n: int) -> int:
        return max(1, math.ceil(self.sample_coefficient * math.log(max(n, 2))))


def _neighbourhoods(tc: Tournament, cluster: VertexSet, v: int):
    if v not in set(cluster.tolist()):
        raise ContractViolation(f"vertex {v} is not in the cluster")
    return cluster[tc.adj[v, cluster]], cluster[tc.adj[cluster, v]]


def triangle_estimate(tc: Tournament, cluster, v: int, s: int, seed) -> float:
    """Estimate of the directed triangles through v inside ``cluster`` from s sampled pairs."""
    if s <= 0:
        raise ConfigError(f"sample count must be positive, got {s}")
    cluster = as_vertex_set(tc, cluster)
    out_nb, in_nb = _neighbourhoods(tc, cluster, v)
    if len(out_nb) == 0 or len(in_nb) == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    u = out_nb[rng.integers(len(out_nb), size=s)]
    w = in_nb[rng.integers(len(in_nb), size=s)]
    hits = int(tc.adj[u, w].sum())
    return hits / s * len(out_nb) * len(in_nb)


def exact_triangle_count(tc: Tournament, cluster, v: int) -> int:
    cluster = as_vertex_set(tc, cluster)
    out_nb, in_nb = _neighbourhoods(tc, cluster, v)
    return int(tc.adj[np.ix_(out_nb, in_nb)].sum())


def cluster_triangle_counts(tc: Tournament, cluster) -> np.ndarray:
    """Exact triangle count for every cluster vertex, in cluster order."""
    cluster = as_vertex_set(tc, cluster)
    A = tc.adj[np.ix_(cluster, cluster)].astype(np.int64)
    return ((A @ A) * A.T).sum(axis=1)


def outlier_threshold(cluster_size: int, eps: float, p_m: float, scale: float = 1.0) -> float:
    return scale * (1 - eps) ** 2 / 32 * cluster_size ** 2 * p_m ** 2


def purify(partitioning: Partitioning, tc: Tournament, bounds: Bounds, eps: float,
           cfg: PurifyConfig, seed) -> VertexSet:
    """Nonoutlier vertices of every cluster, sorted."""
    if tc.n != partitioning.n:
        raise ContractViolation(f"fresh tournament has {tc.n} vertices, clusters cover {partitioning.n}")
    s = cfg.samples(tc.n)
    kept = []
    flagged = 0
    for cluster in partitioning.clusters:
        cluster = as_vertex_set(tc, cluster)
        threshold = outlier_threshold(len(cluster), eps, bounds.p_m, cfg.threshold_scale)
        if cfg.exact:
            estimates = cluster_triangle_counts(tc, cluster).astype(float)
        else:
            estimates = np.array([
                triangle_estimate(tc, cluster, int(v), s, child_seed(seed, int(v))) for v in cluster
            ])
        keep = estimates < threshold
        flagged += int((~keep).sum())
        kept.append(cluster[keep])
    result = np.sort(np.concatenate(kept)) if kept else np.empty(0, dtype=np.int64)
    logger.info(f"purify: {flagged} outliers flagged, {len(result)} vertices kept (s={s}, exact={cfg.exact})")
    return result


def write_nonoutliers(R, stream) -> None:
    stream.write(f"nonoutliers: {' '.join(str(int(v)) for v in R)}\n")
