"""
Gadget tournaments.

A gadget H for a bound k_u is a small tournament in which every vertex subset
of size at least ceil(h / k_u) contains a backward edge under every ordering,
i.e. no such subset induces a transitive subtournament. Gadgets are either
uniformly random or quadratic-residue tournaments on Z_p with p ≡ 3 (mod 4).
"""
import enum
import logging
import math
import re
from dataclasses import dataclass, replace
from itertools import combinations, islice
from typing import Optional, TextIO

import numpy as np

from ranking.exceptions import ConfigError, ConstructionError, FormatError, SizeLimitError
from ranking.tournament import Tournament, read_tournament, write_tournament

logger = logging.getLogger(__name__)

DEFAULT_SUBSET_LIMIT = 10 ** 7
DEFAULT_SAMPLED_TRIALS = 20000
_CHUNK = 50000


class Verification(enum.Enum):
    EXHAUSTIVE = 'exhaustive'
    SAMPLED = 'sampled'
    UNVERIFIED = 'unverified'


@dataclass(frozen=True)
class Gadget:
    H: Tournament
    k_u: Optional[int] = None
    verified: Verification = Verification.UNVERIFIED
    name: str = ''

    @property
    def h(self) -> int:
        return self.H.n

    def subset_size(self, k_u: Optional[int] = None) -> int:
        """Smallest subset size that must be non-transitive."""
        return math.ceil(self.h / (k_u or self.k_u))


@dataclass
class GadgetVerdict:
    gadget: Gadget
    ok: bool
    subsets_checked: int
    counterexample: Optional[np.ndarray] = None


# ── Sizing ───────────────────────────────────────────────────────────────

def _size_ratio(h: int) -> float:
    return h / (4 * math.log(h) + 1)


def min_gadget_size(k_u: int, p: float) -> int:
    """Smallest h for which a random tournament is a k_u-gadget with probability at least p."""
    if k_u < 2:
        raise ConfigError(f"k_u must be at least 2, got {k_u}")
    if not 0 < p < 1:
        raise ConfigError(f"p must lie in (0, 1), got {p}")
    target = k_u * (1 - math.log(1 - p))
    h = 3
    while _size_ratio(h) < target:
        h += 1
    return h


def gadget_success_bound(h: int, k_u: int) -> float:
    """Probability bound that a random tournament of order h is a k_u-gadget (0 when vacuous)."""
    if h < 3:
        return 0.0
    return max(0.0, 1 - math.exp(1 - _size_ratio(h) / k_u))


# ── Construction ─────────────────────────────────────────────────────────

def random_gadget(h: int, seed) -> Gadget:
    if h < 3:
        raise ConfigError(f"gadget order must be at least 3, got {h}")
    rng = np.random.default_rng(seed)
    first_wins = rng.random(h * (h - 1) // 2) < 0.5
    return Gadget(H=Tournament.from_pairs(h, first_wins), name=f'random{h}')


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    return all(p % d for d in range(3, math.isqrt(p) + 1, 2))


def quadratic_residue_gadget(p: int) -> Gadget:
    """Vertices Z_p, edge i→j iff j - i is a nonzero square mod p."""
    if not is_prime(p):
        raise ConstructionError(f"{p} is not prime")
    if p % 4 != 3:
        raise ConstructionError(f"{p} is not 3 mod 4, so -1 is a residue and orientation is ill-defined")
    residue = np.zeros(p, dtype=bool)
    residue[(np.arange(1, p) ** 2) % p] = True
    idx = np.arange(p)
    diff = (idx[None, :] - idx[:, None]) % p
    return Gadget(H=Tournament(residue[diff]), name=f'qr{p}')


_NAME = re.compile(r'^(qr|random)(\d+)$')


def gadget_from_name(name: str, seed=None) -> Gadget:
    """``qr<p>`` or ``random<h>``; random gadgets draw from ``seed``."""
    match = _NAME.match(name.strip().lower())
    if not match:
        raise ConfigError(f"unknown gadget {name!r}; expected 'qr<p>' or 'random<h>'")
    kind, size = match.group(1), int(match.group(2))
    if kind == 'qr':
        return quadratic_residue_gadget(size)
    return random_gadget(size, seed)


# ── Verification ─────────────────────────────────────────────────────────

def _first_transitive(adj: np.ndarray, subsets: np.ndarray) -> Optional[int]:
    """Index of the first transitive subset in a (m, s) batch, else None."""
    s = subsets.shape[1]
    sub = adj[subsets[:, :, None], subsets[:, None, :]]
    scores = np.sort(sub.sum(axis=2), axis=1)
    transitive = (scores == np.arange(s)).all(axis=1)
    hits = np.flatnonzero(transitive)
    return int(hits[0]) if len(hits) else None


def verify_gadget(g: Gadget, k_u: int, mode: str = 'exhaustive', trials: int = DEFAULT_SAMPLED_TRIALS,
                  seed=None, subset_limit: int = DEFAULT_SUBSET_LIMIT) -> GadgetVerdict:
    """
    Check the gadget property for ``k_u``.

    A subtournament is transitive iff its sorted score sequence is 0..s-1, so
    it suffices to look at subsets of size exactly ceil(h / k_u).
    """
    if k_u < 1:
        raise ConfigError(f"k_u must be at least 1, got {k_u}")
    if g.H.has_deletions():
        raise ConfigError("gadgets must be complete tournaments")
    h = g.h
    s = math.ceil(h / k_u)
    adj = g.H.adj

    if mode == 'exhaustive':
        total = math.comb(h, s)
        if total > subset_limit:
            raise SizeLimitError(
                f"exhaustive check needs C({h},{s})={total} subsets (limit {subset_limit}); use sampled mode"
            )
        stream = combinations(range(h), s)
        checked = 0
        while True:
            batch = list(islice(stream, _CHUNK))
            if not batch:
                break
            subsets = np.asarray(batch, dtype=np.int64)
            hit = _first_transitive(adj, subsets)
            if hit is not None:
                checked += hit + 1
                return GadgetVerdict(g, False, checked, subsets[hit])
            checked += len(batch)
        verified = Verification.EXHAUSTIVE
    elif mode == 'sampled':
        rng = np.random.default_rng(seed)
        checked = 0
        while checked < trials:
            m = min(_CHUNK, trials - checked)
            subsets = np.sort(np.argsort(rng.random((m, h)), axis=1)[:, :s], axis=1)
            hit = _first_transitive(adj, subsets)
            if hit is not None:
                return GadgetVerdict(g, False, checked + hit + 1, subsets[hit])
            checked += m
        verified = Verification.SAMPLED
    else:
        raise ConfigError(f"unknown verification mode {mode!r}")

    logger.debug(f"gadget {g.name or h} verified ({verified.value}) for k_u={k_u} over {checked} subsets")
    return GadgetVerdict(replace(g, k_u=k_u, verified=verified), True, checked)


# ── Text format ──────────────────────────────────────────────────────────

_HEADER = re.compile(r'^gadget\s+name=(\S*)\s+k_u=(\S+)\s+verified=(\S+)$')


def write_gadget(g: Gadget, stream: TextIO) -> None:
    k_u = g.k_u if g.k_u is not None else '-'
    write_tournament(g.H, stream, comments=[f"gadget name={g.name} k_u={k_u} verified={g.verified.value}"])


def read_gadget(stream: TextIO) -> Gadget:
    H, comments = read_tournament(stream)
    for comment in comments:
        match = _HEADER.match(comment)
        if match:
            name, k_u, verified = match.groups()
            try:
                return Gadget(
                    H=H,
                    k_u=None if k_u == '-' else int(k_u),
                    verified=Verification(verified),
                    name=name,
                )
            except ValueError as e:
                raise FormatError(f"bad gadget header {comment!r}: {e}") from e
    return Gadget(H=H)
