"""
Tournament representation and the edge-level primitives used by every algorithm.

A tournament on n vertices stores one direction per unordered pair plus a
presence flag (pairs can be deleted by the clustering loop). Internally this
is a dense boolean matrix ``adj`` where ``adj[u, v]`` is set iff the present
edge u→v exists; a deleted pair has both ``adj[u, v]`` and ``adj[v, u]`` clear.
Vertex sets and orderings are int64 numpy arrays over 0..n-1.
"""
import enum
import logging
from functools import lru_cache
from typing import Iterable, Optional, TextIO, Tuple

import numpy as np
import numpy.typing as npt

from ranking.exceptions import (
    ContractViolation,
    FormatError,
    InvalidVertexError,
    SizeLimitError,
)

logger = logging.getLogger(__name__)

VertexSet = npt.NDArray[np.int64]
Ordering = npt.NDArray[np.int64]

# Exhaustive transitive-subset search is exponential in n.
MAX_TRANSITIVE_SEARCH_N = 24


class Direction(enum.Enum):
    """Result of looking up a pair."""
    FORWARD = 'forward'    # u→v
    BACKWARD = 'backward'  # v→u
    DELETED = 'deleted'


class Tournament:
    """Orientation of every vertex pair, with optional pair deletion."""

    __slots__ = ('_adj', '_mutable')

    def __init__(self, adj, *, mutable: bool = False):
        adj = np.array(adj, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ContractViolation(f"adjacency must be square, got shape {adj.shape}")
        if adj.diagonal().any():
            raise ContractViolation("tournaments have no self-loops")
        if (adj & adj.T).any():
            raise ContractViolation("a pair stores both directions")
        if not mutable:
            adj.setflags(write=False)
        self._adj = adj
        self._mutable = mutable

    # ── Constructors ─────────────────────────────────────────────────────
    @classmethod
    def from_pairs(cls, n: int, first_wins, present=None) -> 'Tournament':
        """
        Build from per-pair flags over ``np.triu_indices(n, 1)``.

        ``first_wins[k]`` is True when the lower-index vertex of pair k beats
        the higher one; ``present[k]`` False deletes the pair.
        """
        a, b = np.triu_indices(n, 1)
        first_wins = np.asarray(first_wins, dtype=bool)
        if present is None:
            present = np.ones(len(a), dtype=bool)
        present = np.asarray(present, dtype=bool)
        adj = np.zeros((n, n), dtype=bool)
        adj[a, b] = first_wins & present
        adj[b, a] = ~first_wins & present
        return cls(adj)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> 'Tournament':
        """Build from explicit directed edges; omitted pairs are deleted."""
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            _check_pair(n, u, v)
            adj[u, v] = True
        return cls(adj)

    @classmethod
    def transitive(cls, order) -> 'Tournament':
        """Transitive tournament where earlier vertices beat later ones."""
        order = np.asarray(order, dtype=np.int64)
        n = len(order)
        pos = np.empty(n, dtype=np.int64)
        pos[order] = np.arange(n)
        return cls(pos[:, None] < pos[None, :])

    # ── Accessors ────────────────────────────────────────────────────────
    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def adj(self) -> np.ndarray:
        """Boolean adjacency; read-only unless this is a working copy."""
        return self._adj

    @property
    def present_mask(self) -> np.ndarray:
        return self._adj | self._adj.T

    def present_pair_count(self) -> int:
        return int(self._adj.sum())

    def has_deletions(self) -> bool:
        return self.present_pair_count() != self.n * (self.n - 1) // 2

    def working_copy(self) -> 'Tournament':
        """Writable copy that supports in-place pair deletion."""
        return Tournament(self._adj, mutable=True)

    def frozen(self) -> 'Tournament':
        return Tournament(self._adj)

    def induced(self, vertices) -> 'Tournament':
        """Subtournament on ``vertices``, relabelled 0..len-1 in the given order."""
        vertices = as_vertex_set(self, vertices, sort=False)
        return Tournament(self._adj[np.ix_(vertices, vertices)])

    def __eq__(self, other) -> bool:
        return isinstance(other, Tournament) and np.array_equal(self._adj, other._adj)

    def __hash__(self):
        return hash(self._adj.tobytes())

    def __repr__(self) -> str:
        return f"Tournament(n={self.n}, present_pairs={self.present_pair_count()})"


# ── Helpers ──────────────────────────────────────────────────────────────

def _check_pair(n: int, u: int, v: int) -> None:
    if not (0 <= u < n and 0 <= v < n):
        raise InvalidVertexError(f"vertex out of range for n={n}: ({u}, {v})")
    if u == v:
        raise InvalidVertexError(f"self-loop requested at vertex {u}")


def as_vertex_set(t: Tournament, vertices, *, sort: bool = True) -> VertexSet:
    """Coerce to an int64 array of distinct in-range vertices."""
    arr = np.asarray(list(vertices) if not isinstance(vertices, np.ndarray) else vertices,
                     dtype=np.int64).ravel()
    if arr.size and (arr.min() < 0 or arr.max() >= t.n):
        raise InvalidVertexError(f"vertex set contains ids outside 0..{t.n - 1}")
    if np.unique(arr).size != arr.size:
        raise ContractViolation("vertex set contains duplicates")
    return np.sort(arr) if sort else arr


# ── Operations ───────────────────────────────────────────────────────────

def direction(t: Tournament, u: int, v: int) -> Direction:
    """Stored direction of the pair {u, v}, seen from u."""
    _check_pair(t.n, u, v)
    if t.adj[u, v]:
        return Direction.FORWARD
    if t.adj[v, u]:
        return Direction.BACKWARD
    return Direction.DELETED


def delete_pairs(t: Tournament, pairs: Iterable[Tuple[int, int]], *, inplace: bool = False) -> Tournament:
    """
    Delete the given unordered pairs.

    Returns a new tournament unless ``inplace`` is set, which is only allowed
    on a working copy. Pairs that are already deleted are skipped.
    """
    if inplace and not t._mutable:
        raise ContractViolation("in-place deletion needs a working copy")
    target = t if inplace else t.working_copy()
    adj = target.adj
    skipped = 0
    for u, v in pairs:
        _check_pair(t.n, u, v)
        if not (adj[u, v] or adj[v, u]):
            skipped += 1
            continue
        adj[u, v] = False
        adj[v, u] = False
    if skipped:
        logger.info(f"delete_pairs: {skipped} pair(s) were already deleted")
    return target if inplace else target.frozen()


def backward_edges(t: Tournament, o, cross: Optional[Tuple[object, object]] = None) -> int:
    """
    Count present edges (a, b) where b comes before a in ordering ``o``.

    With ``cross=(Z, P)`` only edges with one endpoint in Z and the other in P
    are counted; every vertex of Z and P must appear in ``o``.
    """
    o = as_vertex_set(t, o, sort=False)
    if cross is None:
        sub = t.adj[np.ix_(o, o)]
        return int(np.tril(sub, -1).sum())

    pos = np.full(t.n, -1, dtype=np.int64)
    pos[o] = np.arange(len(o))
    z = as_vertex_set(t, cross[0])
    p = as_vertex_set(t, cross[1])
    if (pos[z] < 0).any() or (pos[p] < 0).any():
        raise ContractViolation("cross sets contain vertices missing from the ordering")
    pz, pp = pos[z], pos[p]
    z_to_p = t.adj[np.ix_(z, p)] & (pp[None, :] < pz[:, None])
    p_to_z = t.adj[np.ix_(p, z)] & (pz[None, :] < pp[:, None])
    return int(z_to_p.sum() + p_to_z.sum())


def directed_density(t: Tournament, X, Y) -> float:
    """Present edges X→Y over present pairs between X and Y."""
    X = as_vertex_set(t, X)
    Y = as_vertex_set(t, Y)
    if X.size == 0 or Y.size == 0:
        raise ContractViolation("directed density needs nonempty sets")
    if np.intersect1d(X, Y).size:
        raise ContractViolation("directed density needs disjoint sets")
    forward = int(t.adj[np.ix_(X, Y)].sum())
    backward = int(t.adj[np.ix_(Y, X)].sum())
    if forward + backward == 0:
        logger.warning(f"directed_density: every pair between |X|={X.size} and |Y|={Y.size} is deleted")
        return 0.0
    return forward / (forward + backward)


def out_neighbors_in(t: Tournament, v: int, W) -> VertexSet:
    W = as_vertex_set(t, W)
    if not 0 <= v < t.n:
        raise InvalidVertexError(f"vertex {v} out of range")
    return W[t.adj[v, W]]


def in_neighbors_in(t: Tournament, v: int, W) -> VertexSet:
    W = as_vertex_set(t, W)
    if not 0 <= v < t.n:
        raise InvalidVertexError(f"vertex {v} out of range")
    return W[t.adj[W, v]]


def transitive_order(t: Tournament, vertices) -> Optional[Ordering]:
    """
    Zero-backward ordering of the induced subtournament, or None if it has a cycle.

    Sorting by in-subset out-degree (descending) is the only candidate order.
    """
    vertices = as_vertex_set(t, vertices, sort=False)
    sub = t.adj[np.ix_(vertices, vertices)]
    order = vertices[np.argsort(-sub.sum(axis=1), kind='stable')]
    if backward_edges(t, order) == 0:
        return order
    return None


def is_transitive(t: Tournament, vertices) -> bool:
    return transitive_order(t, vertices) is not None


def max_transitive_subset(t: Tournament) -> int:
    """
    Size of the largest vertex subset inducing an acyclic subgraph.

    Exhaustive search: pick the first vertex of the subset's topological
    order, drop its in-neighbours, recurse. Memoised over bitmasks.
    """
    n = t.n
    if n > MAX_TRANSITIVE_SEARCH_N:
        raise SizeLimitError(
            f"max_transitive_subset is exhaustive; n={n} exceeds {MAX_TRANSITIVE_SEARCH_N}"
        )
    in_masks = [sum(1 << int(u) for u in np.flatnonzero(t.adj[:, v])) for v in range(n)]

    @lru_cache(maxsize=None)
    def best(mask: int) -> int:
        if mask == 0:
            return 0
        result = 0
        rest = mask
        while rest:
            low = rest & -rest
            v = low.bit_length() - 1
            rest ^= low
            candidate = 1 + best(mask & ~low & ~in_masks[v])
            if candidate > result:
                result = candidate
        return result

    return best((1 << n) - 1)


# ── Text format ──────────────────────────────────────────────────────────

def write_tournament(t: Tournament, stream: TextIO, comments: Iterable[str] = ()) -> None:
    """``tournament <n>`` then one ``u v`` line per present edge u→v."""
    for comment in comments:
        stream.write(f"# {comment}\n")
    stream.write(f"tournament {t.n}\n")
    for u, v in zip(*np.nonzero(t.adj)):
        stream.write(f"{u} {v}\n")


def read_tournament(stream: TextIO) -> Tuple[Tournament, list]:
    """Parse the text format; returns the tournament and its ``#`` comment lines."""
    comments = []
    n = None
    edges = []
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            comments.append(line[1:].strip())
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != 'tournament':
                raise FormatError(f"line {lineno}: expected 'tournament <n>', got {line!r}")
            n = _parse_int(parts[1], lineno)
            continue
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected '<u> <v>', got {line!r}")
        edges.append((_parse_int(parts[0], lineno), _parse_int(parts[1], lineno)))
    if n is None:
        raise FormatError("missing 'tournament <n>' header")
    try:
        return Tournament.from_edges(n, edges), comments
    except (InvalidVertexError, ContractViolation) as e:
        raise FormatError(f"invalid tournament file: {e}") from e


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"line {lineno}: {token!r} is not an integer")
