"""
Generators for preference tournaments and the parameter formulas that go with them.

Two sources of tournaments are supported:

- the planted-partition model: domains with a canonical order whose intra-domain
  edges flip with a small probability, and noisy cross-domain edges;
- the majority-voting model: every pair receives a number of independent votes,
  each wrong with probability ``p_mis``, and the edge follows the majority.

All logs are natural. Every random draw comes from ``numpy.random.default_rng``.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, TextIO, Tuple

import numpy as np
from scipy.stats import binom

from ranking.exceptions import ConfigError, FormatError
from ranking.tournament import Tournament

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Bounds:
    """Published model bounds: p_u ≥ every p_i, p_m ≤ every p_ij, k_u ≥ k."""
    p_u: float
    p_m: float
    k_u: int

    def __post_init__(self):
        if not 0 < self.p_u < 1:
            raise ConfigError(f"p_u must lie in (0, 1), got {self.p_u}")
        if not 0 < self.p_m <= 0.5:
            raise ConfigError(f"p_m must lie in (0, 0.5], got {self.p_m}")
        if self.p_m <= self.p_u:
            raise ConfigError(f"p_m={self.p_m} must exceed p_u={self.p_u}")
        if self.k_u < 1:
            raise ConfigError(f"k_u must be at least 1, got {self.k_u}")

    @property
    def het(self) -> float:
        """Heterogeneity level p_m / p_u."""
        return self.p_m / self.p_u


@dataclass(frozen=True)
class PlantedSpec:
    """
    Planted-partition tournament parameters.

    ``p_cross[i][j]`` is the probability that a cross pair (u in domain i,
    v in domain j) is oriented u→v; ``p_cross[j][i]`` must equal
    ``1 - p_cross[i][j]``. ``orderings`` optionally fixes the canonical
    orders; otherwise vertex labels are drawn at random per seed.
    """
    domain_sizes: Tuple[int, ...]
    p_intra: Tuple[float, ...]
    p_cross: Tuple[Tuple[float, ...], ...]
    bounds: Optional[Bounds] = None
    orderings: Optional[Tuple[Tuple[int, ...], ...]] = None

    def __post_init__(self):
        k = len(self.domain_sizes)
        if k == 0:
            raise ConfigError("at least one domain is required")
        if any(size < 2 for size in self.domain_sizes):
            raise ConfigError(f"every domain needs at least 2 vertices: {self.domain_sizes}")
        if len(self.p_intra) != k:
            raise ConfigError(f"p_intra has {len(self.p_intra)} entries for {k} domains")
        if any(not 0 <= p <= 1 for p in self.p_intra):
            raise ConfigError(f"p_intra entries must be probabilities: {self.p_intra}")
        cross = np.asarray(self.p_cross, dtype=float)
        if cross.shape != (k, k):
            raise ConfigError(f"p_cross must be {k}x{k}, got shape {cross.shape}")
        off = ~np.eye(k, dtype=bool)
        if ((cross < 0) | (cross > 1))[off].any():
            raise ConfigError("p_cross entries must be probabilities")
        if not np.allclose((cross + cross.T)[off], 1.0):
            raise ConfigError("p_cross must satisfy p_ji = 1 - p_ij")
        if self.orderings is not None:
            flat = [v for order in self.orderings for v in order]
            if sorted(len(o) for o in self.orderings) != sorted(self.domain_sizes) or \
                    [len(o) for o in self.orderings] != list(self.domain_sizes):
                raise ConfigError("orderings do not match domain_sizes")
            if sorted(flat) != list(range(self.n)):
                raise ConfigError("orderings must partition the vertices 0..n-1")
        if self.bounds is not None:
            b = self.bounds
            if max(self.p_intra) > b.p_u:
                raise ConfigError(f"p_u={b.p_u} is below max p_i={max(self.p_intra)}")
            if k > 1:
                if cross[off].min() < b.p_m or cross[off].max() > 1 - b.p_m:
                    raise ConfigError(f"p_cross leaves [p_m, 1 - p_m] for p_m={b.p_m}")
            if k > b.k_u:
                raise ConfigError(f"k={k} exceeds k_u={b.k_u}")

    @classmethod
    def uniform(cls, domain_sizes: Sequence[int], p_intra: float, p_cross: float = 0.5,
                bounds: Optional[Bounds] = None) -> 'PlantedSpec':
        """Same flip probability in every domain, same cross probability for i < j."""
        k = len(domain_sizes)
        cross = [[0.0] * k for _ in range(k)]
        for i in range(k):
            for j in range(i + 1, k):
                cross[i][j] = p_cross
                cross[j][i] = 1.0 - p_cross
        return cls(
            domain_sizes=tuple(int(s) for s in domain_sizes),
            p_intra=tuple([float(p_intra)] * k),
            p_cross=tuple(tuple(row) for row in cross),
            bounds=bounds,
        )

    @property
    def n(self) -> int:
        return int(sum(self.domain_sizes))

    @property
    def k(self) -> int:
        return len(self.domain_sizes)


@dataclass
class GroundTruth:
    """Domain id and canonical position of every vertex."""
    domain: np.ndarray
    position: np.ndarray
    orderings: List[np.ndarray]
    global_position: Optional[np.ndarray] = None

    @classmethod
    def from_orderings(cls, orderings: Sequence[Sequence[int]], with_global: bool = False) -> 'GroundTruth':
        orderings = [np.asarray(o, dtype=np.int64) for o in orderings]
        n = int(sum(len(o) for o in orderings))
        domain = np.full(n, -1, dtype=np.int64)
        position = np.full(n, -1, dtype=np.int64)
        for i, order in enumerate(orderings):
            domain[order] = i
            position[order] = np.arange(len(order))
        if (domain < 0).any():
            raise ConfigError("orderings do not cover every vertex 0..n-1")
        global_position = None
        if with_global:
            global_position = np.empty(n, dtype=np.int64)
            global_position[np.concatenate(orderings)] = np.arange(n)
        return cls(domain=domain, position=position, orderings=orderings,
                   global_position=global_position)

    @property
    def n(self) -> int:
        return len(self.domain)

    @property
    def k(self) -> int:
        return len(self.orderings)

    @property
    def domain_sizes(self) -> Tuple[int, ...]:
        return tuple(len(o) for o in self.orderings)

    def prefers(self, u: int, v: int) -> Optional[bool]:
        """True if u ranks above v, None when the pair has no defined truth."""
        if self.domain[u] == self.domain[v]:
            return bool(self.position[u] < self.position[v])
        if self.global_position is None:
            return None
        return bool(self.global_position[u] < self.global_position[v])


@dataclass(frozen=True)
class VotingConfig:
    """
    Majority-voting parameters.

    ``M`` votes per intra-domain pair, ``m`` per cross pair (exact counts, or
    Poisson means when ``poisson`` is set). The same M:m weights define the
    query distribution.
    """
    p_mis: float
    M: int
    m: int
    poisson: bool = False

    def __post_init__(self):
        if not 0 <= self.p_mis < 0.5:
            raise ConfigError(f"p_mis must lie in [0, 0.5), got {self.p_mis}")
        if not self.M > self.m >= 0:
            raise ConfigError(f"need M > m >= 0, got M={self.M}, m={self.m}")

    @classmethod
    def from_ratio(cls, p_succ: float, votes: int, ratio: float, poisson: bool = False) -> 'VotingConfig':
        """Experiment-table parameters: V votes per intra pair and cross = round(ratio * V)."""
        return cls(p_mis=1.0 - p_succ, M=int(votes), m=int(round(ratio * votes)), poisson=poisson)

    @property
    def p_succ(self) -> float:
        return 1.0 - self.p_mis

    @property
    def ratio(self) -> float:
        return self.m / self.M


@dataclass
class VoteTally:
    """Per-pair vote counts over ``np.triu_indices(n, 1)``."""
    n: int
    total: np.ndarray
    for_first: np.ndarray
    truth_first: np.ndarray = field(repr=False)

    def tournament(self, rng: np.random.Generator) -> Tournament:
        """Majority orientation; ties and empty pairs are decided by a fair coin."""
        against = self.total - self.for_first
        coin = rng.random(len(self.total)) < 0.5
        first_wins = np.where(self.for_first == against, coin, self.for_first > against)
        return Tournament.from_pairs(self.n, first_wins)

    def split(self, rng: np.random.Generator) -> Tuple['VoteTally', 'VoteTally']:
        """Split every pair's votes into two independent halves (hypergeometric draw)."""
        half = self.total // 2
        first_half = np.zeros_like(self.for_first)
        mask = half > 0
        if mask.any():
            first_half[mask] = rng.hypergeometric(
                self.for_first[mask], (self.total - self.for_first)[mask], half[mask]
            )
        one = VoteTally(self.n, half, first_half, self.truth_first)
        two = VoteTally(self.n, self.total - half, self.for_first - first_half, self.truth_first)
        return one, two


# ── Generators ───────────────────────────────────────────────────────────

def _random_orderings(domain_sizes: Sequence[int], rng: np.random.Generator) -> List[np.ndarray]:
    labels = rng.permutation(int(sum(domain_sizes)))
    offsets = np.cumsum([0, *domain_sizes])
    return [labels[offsets[i]:offsets[i + 1]].astype(np.int64) for i in range(len(domain_sizes))]


def generate_planted(spec: PlantedSpec, seed) -> Tuple[Tournament, GroundTruth]:
    """Draw a planted-partition tournament; the same seed gives the same output."""
    rng = np.random.default_rng(seed)
    if spec.orderings is not None:
        orderings = [np.asarray(o, dtype=np.int64) for o in spec.orderings]
    else:
        orderings = _random_orderings(spec.domain_sizes, rng)
    truth = GroundTruth.from_orderings(orderings)

    n = spec.n
    a, b = np.triu_indices(n, 1)
    draws = rng.random(len(a))
    dom_a, dom_b = truth.domain[a], truth.domain[b]
    p_intra = np.asarray(spec.p_intra, dtype=float)
    p_cross = np.asarray(spec.p_cross, dtype=float)

    same = dom_a == dom_b
    a_first = truth.position[a] < truth.position[b]
    intra_a_wins = a_first ^ (draws < p_intra[dom_a])
    cross_a_wins = draws < p_cross[dom_a, dom_b]
    t = Tournament.from_pairs(n, np.where(same, intra_a_wins, cross_a_wins))
    logger.debug(f"generate_planted: n={n}, k={spec.k}, seed={seed}")
    return t, truth


def generate_voting(config: VotingConfig, domain_sizes: Sequence[int], seed
                    ) -> Tuple[Tournament, GroundTruth, VoteTally]:
    """
    Draw votes for every pair and orient edges by majority.

    The global groundtruth order is the concatenation of the domain orders.
    """
    rng = np.random.default_rng(seed)
    orderings = _random_orderings(domain_sizes, rng)
    truth = GroundTruth.from_orderings(orderings, with_global=True)
    n = truth.n
    a, b = np.triu_indices(n, 1)
    same = truth.domain[a] == truth.domain[b]
    expected = np.where(same, config.M, config.m)
    if config.poisson:
        total = rng.poisson(expected).astype(np.int64)
    else:
        total = expected.astype(np.int64)
    correct = rng.binomial(total, config.p_succ).astype(np.int64)
    truth_first = truth.global_position[a] < truth.global_position[b]
    for_first = np.where(truth_first, correct, total - correct)
    tally = VoteTally(n=n, total=total, for_first=for_first, truth_first=truth_first)
    t = tally.tournament(rng)
    logger.debug(f"generate_voting: n={n}, M={config.M}, m={config.m}, seed={seed}")
    return t, truth, tally


# ── Formulas ─────────────────────────────────────────────────────────────

def chernoff_mistake_bound(K: int, p_mis: float) -> float:
    """Chernoff bound on the chance that the majority of K votes is wrong."""
    if not 0 <= p_mis < 0.5:
        raise ConfigError(f"p_mis must lie in [0, 0.5), got {p_mis}")
    if K < 1:
        raise ConfigError(f"K must be at least 1, got {K}")
    delta = 0.5 - p_mis
    return math.exp(-(delta ** 2) / (2 + delta) * K * (1 - p_mis))


def majority_error(K: int, p_mis: float) -> float:
    """Exact probability that the majority of K votes is wrong (ties count half)."""
    K = int(K)
    tail = float(binom.sf(K // 2, K, p_mis))
    if K % 2 == 0:
        tail += 0.5 * float(binom.pmf(K // 2, K, p_mis))
    return tail


def derive_bounds(config: VotingConfig) -> Tuple[float, float]:
    """(p_u, p_m) of the tournament induced by the voting model, by exact binomials."""
    p_u = majority_error(config.M, config.p_mis)
    p_m = min(majority_error(K, config.p_mis) for K in range(config.m + 1))
    return p_u, p_m


def bad_edge_bound(spec: PlantedSpec, g_of_n: float) -> float:
    """High-probability upper bound on the number of flipped intra-domain edges."""
    total = sum(n_i * n_i * p_i * (1 - 1 / n_i) for n_i, p_i in zip(spec.domain_sizes, spec.p_intra))
    if total == 0:
        return 0.0
    delta = max(2.0, 4 * math.log(g_of_n) / total)
    return (1 + delta) * total / 2


@dataclass
class PreconditionCheck:
    name: str
    passed: bool
    detail: str


@dataclass
class PreconditionReport:
    checks: List[PreconditionCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed(self) -> List[PreconditionCheck]:
        return [check for check in self.checks if not check.passed]

    def get(self, name: str) -> PreconditionCheck:
        return next(check for check in self.checks if check.name == name)


def validate_preconditions(n: int, bounds: Bounds, h: int, eps: float,
                           domain_sizes: Optional[Sequence[int]] = None,
                           p_intra: Optional[Sequence[float]] = None) -> PreconditionReport:
    """
    Advisory check of the clustering and ranking guarantees' assumptions.

    Nothing is enforced; failures are logged as warnings.
    """
    het = bounds.het
    eps_low = 2 * h * math.sqrt(3 * bounds.k_u * h / het)
    ranking_cap = bounds.p_m * (bounds.p_m / 128 - 4 / het)
    checks = [
        PreconditionCheck('het', het >= 12, f"het={het:.3f} (needs >= 12)"),
        PreconditionCheck('eps_lower', eps_low <= eps, f"2h*sqrt(3*k_u*h/het)={eps_low:.3f} <= eps={eps}"),
        PreconditionCheck('eps_k_u', eps <= 1 / bounds.k_u, f"eps={eps} <= 1/k_u={1 / bounds.k_u:.3f}"),
        PreconditionCheck('eps_p_m', eps <= bounds.p_m / 4, f"eps={eps} <= p_m/4={bounds.p_m / 4:.3f}"),
        PreconditionCheck('eps_ranking', eps <= ranking_cap,
                          f"eps={eps} <= p_m*(p_m/128 - 4/het)={ranking_cap:.5f}"),
    ]
    if domain_sizes is not None:
        checks.append(PreconditionCheck(
            'domain_size', min(domain_sizes) >= 2, f"smallest domain has {min(domain_sizes)} vertices"
        ))
        if p_intra is not None and n > 1:
            expected = [math.comb(s, 2) * p for s, p in zip(domain_sizes, p_intra)]
            checks.append(PreconditionCheck(
                'domain_noise', min(expected) >= math.log(n),
                f"min expected backward edges {min(expected):.1f} vs ln n={math.log(n):.2f}"
            ))
    report = PreconditionReport(checks)
    for check in report.failed():
        logger.warning(f"precondition '{check.name}' not met: {check.detail}")
    return report


def sample_queries(truth: GroundTruth, config: VotingConfig, N: int, seed) -> np.ndarray:
    """
    Draw N unordered pairs with intra:cross weights M:m per pair.

    Returns an (N, 2) array; rows are in draw order.
    """
    if N < 1:
        raise ConfigError(f"N must be at least 1, got {N}")
    rng = np.random.default_rng(seed)
    sizes = np.asarray(truth.domain_sizes, dtype=np.int64)
    k = len(sizes)
    intra_pairs = sizes * (sizes - 1) // 2
    cross_pairs = truth.n * (truth.n - 1) // 2 - int(intra_pairs.sum())
    w_intra = config.M * float(intra_pairs.sum())
    w_cross = config.m * float(cross_pairs)
    p_intra = w_intra / (w_intra + w_cross)

    members = np.full((k, int(sizes.max())), -1, dtype=np.int64)
    for i, order in enumerate(truth.orderings):
        members[i, :len(order)] = order

    is_intra = rng.random(N) < p_intra
    queries = np.empty((N, 2), dtype=np.int64)

    n_intra = int(is_intra.sum())
    if n_intra:
        doms = rng.choice(k, size=n_intra, p=intra_pairs / intra_pairs.sum())
        first = rng.integers(0, sizes[doms])
        second = rng.integers(0, sizes[doms] - 1)
        second = second + (second >= first)
        queries[is_intra] = np.stack([members[doms, first], members[doms, second]], axis=1)

    n_cross = N - n_intra
    if n_cross:
        weights = np.outer(sizes, sizes).astype(float)
        np.fill_diagonal(weights, 0.0)
        flat = rng.choice(k * k, size=n_cross, p=(weights / weights.sum()).ravel())
        dom_u, dom_v = np.divmod(flat, k)
        u = members[dom_u, rng.integers(0, sizes[dom_u])]
        v = members[dom_v, rng.integers(0, sizes[dom_v])]
        queries[~is_intra] = np.stack([u, v], axis=1)
    return queries


# ── Ground truth file ────────────────────────────────────────────────────

def write_groundtruth(truth: GroundTruth, stream: TextIO) -> None:
    """One ``domain <id>: v0 v1 ...`` line per domain, canonical order."""
    stream.write(f"# groundtruth global={'yes' if truth.global_position is not None else 'no'}\n")
    for i, order in enumerate(truth.orderings):
        stream.write(f"domain {i}: {' '.join(str(v) for v in order)}\n")


def read_groundtruth(stream: TextIO) -> GroundTruth:
    with_global = False
    orderings = []
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            with_global = with_global or 'global=yes' in line
            continue
        head, _, body = line.partition(':')
        parts = head.split()
        if len(parts) != 2 or parts[0] != 'domain' or parts[1] != str(len(orderings)):
            raise FormatError(f"line {lineno}: expected 'domain {len(orderings)}: ...', got {line!r}")
        try:
            orderings.append([int(tok) for tok in body.split()])
        except ValueError:
            raise FormatError(f"line {lineno}: non-integer vertex id")
    if not orderings:
        raise FormatError("groundtruth file lists no domains")
    try:
        return GroundTruth.from_orderings(orderings, with_global=with_global)
    except (ConfigError, IndexError) as e:
        raise FormatError(f"invalid groundtruth file: {e}") from e
