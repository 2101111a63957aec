"""
DagClustering: split a tournament into near-acyclic clusters.

The loop repeatedly asks ``find`` for either an embedded copy of the gadget
(whose pairs are then deleted from the working tournament) or two vertex sets
X, Y with a one-sided sparse density between them. Z = X ∪ Y is merged into
the first cluster it ranks consistently with, or opens a new cluster. Clusters
still smaller than one window when the loop ends are dissolved vertex by vertex.
"""
import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from ranking.exceptions import ConfigError, ContractViolation, FormatError, TooSmallError
from ranking.fas import QuickSortConfig, best_of_runs
from ranking.gadget import Gadget
from ranking.generators import Bounds
from ranking.tournament import Ordering, Tournament, VertexSet, as_vertex_set, backward_edges, delete_pairs

logger = logging.getLogger(__name__)

DEFAULT_COPY_CAP = 15
DEFAULT_MAX_RESTARTS = 3


@dataclass(frozen=True)
class FindConfig:
    """
    Search parameters.

    ``c`` is the degree threshold (a fraction of the window), ``depth`` and
    ``copy_cap`` drive the restart heuristic, ``sample_size`` > 0 estimates
    window degrees from a sample of that many vertices. A pair with fewer
    than ``min_pair`` vertices in X ∪ Y is retried with fresh windows.
    """
    c: float
    depth: int
    copy_cap: int = DEFAULT_COPY_CAP
    sample_size: int = 0
    max_restarts: int = DEFAULT_MAX_RESTARTS
    min_pair: int = 0

    def __post_init__(self):
        if not 0 < self.c < 1:
            raise ConfigError(f"c must lie in (0, 1), got {self.c}")
        if self.depth < 0:
            raise ConfigError(f"depth must be non-negative, got {self.depth}")
        if self.copy_cap < 1:
            raise ConfigError(f"copy cap C must be at least 1, got {self.copy_cap}")
        if self.sample_size < 0:
            raise ConfigError(f"sample_size must be non-negative, got {self.sample_size}")
        if self.max_restarts < 0:
            raise ConfigError(f"max_restarts must be non-negative, got {self.max_restarts}")
        if self.min_pair < 0:
            raise ConfigError(f"min_pair must be non-negative, got {self.min_pair}")

    @classmethod
    def build(cls, eps: float, p_m: float, h: int, depth: Optional[int] = None,
              copy_cap: int = DEFAULT_COPY_CAP, sample_size: int = 0,
              max_restarts: int = DEFAULT_MAX_RESTARTS, min_pair: Optional[int] = None) -> 'FindConfig':
        """c = eps * p_m / 4; depth defaults to h // 2 and min_pair to h."""
        depth = h // 2 if depth is None else depth
        if depth > h:
            raise ConfigError(f"depth={depth} exceeds gadget order h={h}")
        return cls(c=eps * p_m / 4, depth=depth, copy_cap=copy_cap, sample_size=sample_size,
                   max_restarts=max_restarts, min_pair=h if min_pair is None else min_pair)


@dataclass
class Copy:
    """Embedded gadget: ``vertices[i]`` plays gadget vertex i."""
    vertices: VertexSet

    @property
    def pairs(self) -> List[Tuple[int, int]]:
        return [(int(u), int(v)) for u, v in combinations(self.vertices, 2)]


@dataclass
class Pair:
    """
    Sparse pair: every x in X has fewer than c|Y| out-neighbours in Y
    (``direction='out'``) or fewer than c|Y| in-neighbours (``'in'``).
    """
    X: VertexSet
    Y: VertexSet
    direction: str
    depth: int = 0

    @property
    def size(self) -> int:
        # X and Y come from different windows
        return len(self.X) + len(self.Y)


FindOutcome = Union[Copy, Pair]


@dataclass
class TraceEvent:
    """One find run of the clustering loop; ``cluster`` is set for pairs."""
    kind: str
    vertices: VertexSet
    cluster: Optional[int] = None
    new_cluster: bool = False


@dataclass
class Partitioning:
    n: int
    clusters: List[VertexSet]
    remainder: VertexSet
    trace: List[TraceEvent] = field(default_factory=list, repr=False)

    def labels(self) -> np.ndarray:
        """Cluster index per vertex, -1 for the remainder."""
        labels = np.full(self.n, -1, dtype=np.int64)
        for i, cluster in enumerate(self.clusters):
            labels[cluster] = i
        return labels

    def clustered(self) -> VertexSet:
        if not self.clusters:
            return np.empty(0, dtype=np.int64)
        return np.sort(np.concatenate(self.clusters))

    def check_disjoint(self) -> None:
        seen = np.zeros(self.n, dtype=np.int64)
        for cluster in self.clusters:
            seen[cluster] += 1
        seen[self.remainder] += 1
        if not (seen == 1).all():
            raise ContractViolation("clusters and remainder do not partition the vertex set")


# ── Searcher / Find ──────────────────────────────────────────────────────

def _degree_counts(t1: Tournament, candidates: VertexSet, window: VertexSet, out: bool) -> np.ndarray:
    if out:
        return t1.adj[np.ix_(candidates, window)].sum(axis=1)
    return t1.adj[np.ix_(window, candidates)].sum(axis=0)


def _passes(t1: Tournament, candidates: VertexSet, windows: Sequence[VertexSet], required_out: np.ndarray,
            c: float, sample_size: int, rng: Optional[np.random.Generator]) -> np.ndarray:
    """(len(candidates), len(windows)) boolean: degree into window i meets c|W_i|."""
    result = np.zeros((len(candidates), len(windows)), dtype=bool)
    for i, window in enumerate(windows):
        if len(window) == 0:
            continue
        if sample_size and rng is not None and len(window) > sample_size:
            sample = rng.choice(window, size=sample_size, replace=False)
            counts = _degree_counts(t1, candidates, sample, required_out[i]) * (len(window) / sample_size)
        else:
            counts = _degree_counts(t1, candidates, window, required_out[i])
        result[:, i] = counts >= c * len(window)
    return result


def searcher(t1: Tournament, G: np.ndarray, windows: Sequence[VertexSet], cfg: FindConfig, seed=None,
             embedded: Sequence[int] = ()) -> FindOutcome:
    """
    Embed the gadget levels one window at a time.

    ``G`` is the gadget adjacency in embedding order; ``embedded`` holds the
    vertices already placed for its first levels and ``windows`` the
    candidate windows for the rest. At each level the first candidate whose
    degrees into every later window follow G's directions is taken and the
    later windows shrink to its matching neighbourhoods. If none qualifies,
    candidates are bucketed by their first failing window and the largest
    bucket is returned against that window.
    """
    G = np.asarray(G, dtype=bool)
    embedded = [int(v) for v in embedded]
    if len(embedded) + len(windows) != len(G):
        raise ContractViolation("embedded vertices and windows must cover every gadget level")
    rng = np.random.default_rng(seed) if cfg.sample_size else None
    windows = [np.asarray(w, dtype=np.int64) for w in windows]
    offset = len(embedded)

    for level in range(len(windows)):
        j = offset + level
        current = windows[level]
        if len(current) == 0:
            raise ContractViolation(f"window at level {j} is empty")
        later = windows[level + 1:]
        if not later:
            embedded.append(int(current[0]))
            break
        required_out = G[j, j + 1:]

        chosen = None
        if cfg.sample_size:
            estimate = _passes(t1, current, later, required_out, cfg.c, cfg.sample_size, rng)
            for idx in np.flatnonzero(estimate.all(axis=1)):
                if _passes(t1, current[idx:idx + 1], later, required_out, cfg.c, 0, None).all():
                    chosen = int(current[idx])
                    break
        if chosen is None:
            # pairs are always built from exact counts
            exact = _passes(t1, current, later, required_out, cfg.c, 0, None)
            hits = np.flatnonzero(exact.all(axis=1))
            if len(hits):
                chosen = int(current[hits[0]])

        if chosen is None:
            first_fail = np.argmin(exact, axis=1)
            buckets = np.bincount(first_fail, minlength=len(later))
            i_star = int(np.argmax(buckets))
            X = np.sort(current[first_fail == i_star])
            if len(X) * len(later) < len(current):
                raise ContractViolation("pigeonhole bound violated in searcher")
            direction = 'out' if required_out[i_star] else 'in'
            return Pair(X=X, Y=np.sort(later[i_star]), direction=direction, depth=j)

        embedded.append(chosen)
        for i, window in enumerate(later):
            if required_out[i]:
                later[i] = window[t1.adj[chosen, window]]
            else:
                later[i] = window[t1.adj[window, chosen]]
        windows[level + 1:] = later

    return Copy(vertices=np.asarray(embedded, dtype=np.int64))


def find(gadget: Gadget, t1: Tournament, alive, cfg: FindConfig, seed, copies_found: int = 0) -> FindOutcome:
    """
    Partition the alive vertices into h random windows of equal size and search.

    Surplus vertices sit out this attempt only. An attempt is retried with
    fresh windows, up to ``max_restarts`` times, when its pair is smaller
    than ``min_pair`` or, once ``copy_cap`` copies have been found, when it
    fails deeper than ``depth``. After the last retry the largest pair seen
    is returned.
    """
    alive = as_vertex_set(t1, alive)
    h = gadget.h
    size = len(alive) // h
    if size < 1:
        raise TooSmallError(f"{len(alive)} alive vertices cannot host a gadget of order {h}")
    rng = np.random.default_rng(seed)
    H = gadget.H.adj

    restarts = 0
    best: Optional[Pair] = None
    while True:
        perm = rng.permutation(h)
        G = H[np.ix_(perm, perm)]
        shuffled = rng.permutation(alive)
        windows = [shuffled[i * size:(i + 1) * size] for i in range(h)]
        outcome = searcher(t1, G, windows, cfg, seed=rng.integers(2 ** 63))
        if isinstance(outcome, Copy):
            by_gadget = np.empty(h, dtype=np.int64)
            by_gadget[perm] = outcome.vertices
            return Copy(vertices=by_gadget)
        if best is None or outcome.size > best.size:
            best = outcome
        stalled = copies_found >= cfg.copy_cap and outcome.depth > cfg.depth
        small = outcome.size < cfg.min_pair
        if not (stalled or small):
            return outcome
        if restarts >= cfg.max_restarts:
            return best
        restarts += 1
        logger.debug(
            f"find: restart {restarts}, pair of {outcome.size} vertices at depth {outcome.depth}"
        )


def copy_matches(t: Tournament, gadget: Gadget, vertices) -> bool:
    """Every gadget edge i→j is a present edge vertices[i]→vertices[j]."""
    vertices = np.asarray(vertices, dtype=np.int64)
    if len(vertices) != gadget.h or len(np.unique(vertices)) != gadget.h:
        return False
    induced = t.adj[np.ix_(vertices, vertices)]
    return bool((induced[gadget.H.adj]).all())


# ── DagClustering ────────────────────────────────────────────────────────

MERGE_RULES = ('bound', 'midpoint')


@dataclass(frozen=True)
class MergeConfig:
    """
    How a pair Z joins a cluster P.

    ``'bound'`` accepts up to (het/6 + 2 eps) p_u |Z||P| backward edges
    between Z and P. ``'midpoint'`` accepts up to (p_u + p_m) / 2 per pair;
    at low heterogeneity the first rule sits below the intra-domain noise
    and rejects every same-domain pair. Clusters smaller than
    ``min_cluster`` when the loop ends are dissolved, None meaning one
    window of the last iteration, floor(eps n / h).
    """
    rule: str = 'bound'
    min_cluster: Optional[int] = None

    def __post_init__(self):
        if self.rule not in MERGE_RULES:
            raise ConfigError(f"merge rule must be one of {MERGE_RULES}, got {self.rule!r}")
        if self.min_cluster is not None and self.min_cluster < 0:
            raise ConfigError(f"min_cluster must be non-negative, got {self.min_cluster}")

    def floor(self, n: int, eps: float, h: int) -> int:
        if self.min_cluster is not None:
            return self.min_cluster
        return math.floor(eps * n / h)


def merge_threshold(bounds: Bounds, eps: float, z_size: int, cluster_size: int, rule: str = 'bound') -> float:
    if rule == 'midpoint':
        per_pair = (bounds.p_u + bounds.p_m) / 2
    else:
        per_pair = (bounds.het / 6 + 2 * eps) * bounds.p_u
    return per_pair * z_size * cluster_size


def insertion_cost(t: Tournament, order: Ordering, v: int) -> int:
    """Fewest backward edges between v and ``order`` over every slot v can be inserted at."""
    order = np.asarray(order, dtype=np.int64)
    beats = t.adj[v, order].astype(np.int64)
    loses = t.adj[order, v].astype(np.int64)
    before = np.concatenate([[0], np.cumsum(beats)])
    after = np.concatenate([np.cumsum(loses[::-1])[::-1], [0]])
    return int((before + after).min())


def dissolve_small_clusters(t: Tournament, clusters: List[VertexSet], bounds: Bounds, eps: float,
                            floor: int, rule: str, quicksort: QuickSortConfig,
                            rng: np.random.Generator) -> Tuple[List[VertexSet], VertexSet]:
    """
    Spread the vertices of clusters below ``floor`` over the others.

    Each vertex goes to the first remaining cluster whose ordering takes it
    with at most merge_threshold(|Z|=1) backward edges, or to the returned
    leftovers. Nothing changes when no cluster reaches the floor.
    """
    keep = [c for c in clusters if len(c) >= floor]
    small = [c for c in clusters if len(c) < floor]
    leftovers = np.empty(0, dtype=np.int64)
    if not small or not keep:
        return clusters, leftovers

    orders = [best_of_runs(t, c, c, quicksort, rng.integers(2 ** 63)) for c in keep]
    joined: List[List[int]] = [[] for _ in keep]
    dropped = []
    for v in np.sort(np.concatenate(small)):
        v = int(v)
        for idx, order in enumerate(orders):
            if insertion_cost(t, order, v) <= merge_threshold(bounds, eps, 1, len(order), rule):
                joined[idx].append(v)
                break
        else:
            dropped.append(v)
    logger.info(
        f"dag_clustering: dissolved {len(small)} clusters below {floor} vertices, "
        f"{sum(map(len, joined))} vertices placed, {len(dropped)} left unclustered"
    )
    merged = [np.union1d(c, np.asarray(j, dtype=np.int64)) for c, j in zip(keep, joined)]
    return merged, np.asarray(dropped, dtype=np.int64)


def dag_clustering(t: Tournament, bounds: Bounds, eps: float, gadget: Gadget, cfg: FindConfig, seed,
                   quicksort: Optional[QuickSortConfig] = None,
                   merge: Optional[MergeConfig] = None) -> Partitioning:
    """
    Cluster ``t`` until fewer than eps|T| vertices are left unclustered.

    The trace records the find runs only; dissolving small clusters at the
    end is not part of it.
    """
    if not 0 < eps < 1:
        raise ConfigError(f"eps must lie in (0, 1), got {eps}")
    quicksort = quicksort or QuickSortConfig()
    merge = merge or MergeConfig()
    rng = np.random.default_rng(seed)
    n = t.n
    t1 = t.working_copy()
    alive = np.ones(n, dtype=bool)
    clusters: List[VertexSet] = []
    trace: List[TraceEvent] = []
    copies = 0

    while alive.sum() >= eps * n:
        alive_set = np.flatnonzero(alive)
        try:
            outcome = find(gadget, t1, alive_set, cfg, rng.integers(2 ** 63), copies_found=copies)
        except TooSmallError as e:
            logger.debug(f"dag_clustering: stopping, {e}")
            break

        if isinstance(outcome, Copy):
            delete_pairs(t1, outcome.pairs, inplace=True)
            copies += 1
            trace.append(TraceEvent(kind='copy', vertices=outcome.vertices))
            logger.debug(f"dag_clustering: copy {copies} deleted on {outcome.vertices.tolist()}")
            continue

        Z = np.union1d(outcome.X, outcome.Y)
        target = None
        for idx, cluster in enumerate(clusters):
            scope = np.concatenate([Z, cluster])
            order = best_of_runs(t, scope, scope, quicksort, rng.integers(2 ** 63))
            count = backward_edges(t, order, cross=(Z, cluster))
            if count <= merge_threshold(bounds, eps, len(Z), len(cluster), merge.rule):
                target = idx
                break
        if target is None:
            clusters.append(Z)
            target = len(clusters) - 1
            trace.append(TraceEvent(kind='pair', vertices=Z, cluster=target, new_cluster=True))
        else:
            clusters[target] = np.union1d(clusters[target], Z)
            trace.append(TraceEvent(kind='pair', vertices=Z, cluster=target))
        alive[Z] = False
        logger.debug(f"dag_clustering: |Z|={len(Z)} -> cluster {target}, {int(alive.sum())} alive")

    floor = merge.floor(n, eps, gadget.h)
    clusters, leftovers = dissolve_small_clusters(t, clusters, bounds, eps, floor, merge.rule, quicksort, rng)
    alive[leftovers] = True
    result = Partitioning(n=n, clusters=clusters, remainder=np.flatnonzero(alive), trace=trace)
    logger.info(
        f"dag_clustering: {len(clusters)} clusters, {copies} copies deleted, "
        f"{len(result.remainder)} unclustered of {n}"
    )
    return result


def replay_trace(n: int, trace: Sequence[TraceEvent], budget: int) -> Partitioning:
    """Partitioning as it stood after the first ``budget`` find runs."""
    clusters: List[VertexSet] = []
    for event in trace[:budget]:
        if event.kind != 'pair':
            continue
        if event.new_cluster:
            clusters.append(event.vertices)
        else:
            clusters[event.cluster] = np.union1d(clusters[event.cluster], event.vertices)
    covered = np.zeros(n, dtype=bool)
    for cluster in clusters:
        covered[cluster] = True
    return Partitioning(n=n, clusters=clusters, remainder=np.flatnonzero(~covered),
                        trace=list(trace[:budget]))


# ── Text format ──────────────────────────────────────────────────────────

def write_partitioning(p: Partitioning, stream: TextIO) -> None:
    stream.write(f"# partitioning n={p.n}\n")
    for i, cluster in enumerate(p.clusters):
        stream.write(f"cluster {i}: {' '.join(str(v) for v in cluster)}\n")
    stream.write(f"remainder: {' '.join(str(v) for v in p.remainder)}\n")


def read_partitioning(stream: TextIO, n: Optional[int] = None) -> Partitioning:
    clusters = []
    remainder = None
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            for token in line[1:].split():
                if token.startswith('n=') and n is None:
                    n = int(token[2:])
            continue
        head, sep, body = line.partition(':')
        if not sep:
            raise FormatError(f"line {lineno}: missing ':' in {line!r}")
        try:
            vertices = np.asarray([int(tok) for tok in body.split()], dtype=np.int64)
        except ValueError:
            raise FormatError(f"line {lineno}: non-integer vertex id")
        if head.strip() == 'remainder':
            remainder = vertices
        elif head.split() == ['cluster', str(len(clusters))]:
            clusters.append(vertices)
        else:
            raise FormatError(f"line {lineno}: unexpected {head!r}")
    if remainder is None:
        raise FormatError("partitioning file has no remainder line")
    if n is None:
        n = int(sum(len(c) for c in clusters) + len(remainder))
    p = Partitioning(n=n, clusters=clusters, remainder=remainder)
    try:
        p.check_disjoint()
    except (ContractViolation, IndexError) as e:
        raise FormatError(f"invalid partitioning file: {e}") from e
    return p
