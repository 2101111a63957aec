"""
Feedback-arc-set orderings: pivot-restricted QuickSort and an exact oracle for tiny inputs.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ranking.exceptions import ConfigError, ContractViolation, SizeLimitError
from ranking.seeding import child_seeds
from ranking.tournament import Ordering, Tournament, as_vertex_set, backward_edges

logger = logging.getLogger(__name__)

MAX_EXACT_FAS = 10
DEFAULT_MAX_RUNS = 8


@dataclass(frozen=True)
class QuickSortConfig:
    """``runs=None`` means ceil(log2 n) capped at ``max_runs``."""
    runs: Optional[int] = None
    max_runs: int = DEFAULT_MAX_RUNS

    def __post_init__(self):
        if self.runs is not None and self.runs < 1:
            raise ConfigError(f"runs must be at least 1, got {self.runs}")
        if self.max_runs < 1:
            raise ConfigError(f"max_runs must be at least 1, got {self.max_runs}")

    def resolve_runs(self, n: int) -> int:
        if self.runs is not None:
            return self.runs
        if n < 2:
            return 1
        return max(1, min(math.ceil(math.log2(n)), self.max_runs))


def quicksort_rank(t: Tournament, scope, pivots, seed) -> Ordering:
    """
    QuickSort over ``scope`` where pivots may only be taken from ``pivots``.

    In-neighbours of the pivot go before it, out-neighbours after, deleted
    pairs by a fair coin. A branch holding no pivot is shuffled.
    """
    rng = np.random.default_rng(seed)
    scope = as_vertex_set(t, scope)
    pivots = as_vertex_set(t, pivots)
    if len(scope) == 0:
        return np.empty(0, dtype=np.int64)
    in_scope = np.zeros(t.n, dtype=bool)
    in_scope[scope] = True
    if not in_scope[pivots].all():
        raise ContractViolation("pivots must be a subset of scope")
    is_pivot = np.zeros(t.n, dtype=bool)
    is_pivot[pivots] = True

    adj = t.adj
    order = []
    stack = [scope]
    while stack:
        item = stack.pop()
        if not isinstance(item, np.ndarray):
            order.append(item)
            continue
        if len(item) <= 1:
            order.extend(item.tolist())
            continue
        candidates = item[is_pivot[item]]
        if len(candidates) == 0:
            order.extend(rng.permutation(item).tolist())
            continue
        p = int(candidates[rng.integers(len(candidates))])
        rest = item[item != p]
        before = adj[rest, p]
        deleted = ~(before | adj[p, rest])
        if deleted.any():
            before = before | (deleted & (rng.random(len(rest)) < 0.5))
        # stack is LIFO: left branch is pushed last
        stack.append(rest[~before])
        stack.append(p)
        stack.append(rest[before])
    return np.asarray(order, dtype=np.int64)


def best_of_runs(t: Tournament, scope, pivots, config: QuickSortConfig, seed) -> Ordering:
    """Fewest backward edges among independent runs; ties go to the earliest run."""
    scope = as_vertex_set(t, scope)
    runs = config.resolve_runs(len(scope))
    best, best_count = None, None
    for sub_seed in child_seeds(seed, runs):
        ordering = quicksort_rank(t, scope, pivots, sub_seed)
        count = backward_edges(t, ordering)
        if best_count is None or count < best_count:
            best, best_count = ordering, count
    logger.debug(f"best_of_runs: {runs} runs over {len(scope)} vertices, best={best_count}")
    return best


def exact_min_fas(t: Tournament, scope) -> Tuple[int, Ordering]:
    """Minimum backward-edge ordering by dynamic programming over subsets."""
    scope = as_vertex_set(t, scope)
    s = len(scope)
    if s > MAX_EXACT_FAS:
        raise SizeLimitError(f"exact_min_fas handles at most {MAX_EXACT_FAS} vertices, got {s}")
    if s == 0:
        return 0, np.empty(0, dtype=np.int64)
    sub = t.adj[np.ix_(scope, scope)]
    # beats[v]: bitmask of vertices v has an edge to
    beats = [sum(1 << j for j in np.flatnonzero(sub[v])) for v in range(s)]
    full = (1 << s) - 1
    cost = [math.inf] * (1 << s)
    last = [-1] * (1 << s)
    cost[0] = 0
    for mask in range(1 << s):
        if cost[mask] == math.inf:
            continue
        for v in range(s):
            if mask & (1 << v):
                continue
            nxt = mask | (1 << v)
            # v placed after mask: every v→u with u in mask is backward
            c = cost[mask] + bin(beats[v] & mask).count('1')
            if c < cost[nxt]:
                cost[nxt] = c
                last[nxt] = v
    order = []
    mask = full
    while mask:
        v = last[mask]
        order.append(v)
        mask &= ~(1 << v)
    order.reverse()
    return int(cost[full]), scope[np.asarray(order, dtype=np.int64)]
