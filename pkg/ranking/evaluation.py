"""
Metrics against the planted groundtruth, the global-QuickSort baseline and the metrics CSV.
"""
import csv
import logging
import math
from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np
from scipy.stats import kendalltau

from ranking.clustering import Partitioning
from ranking.exceptions import ContractViolation, FormatError
from ranking.fas import QuickSortConfig, best_of_runs
from ranking.generators import GroundTruth
from ranking.pipeline import RankModel, answer_queries
from ranking.tournament import Ordering, Tournament, backward_edges

logger = logging.getLogger(__name__)


def purity(partitioning: Partitioning, truth: GroundTruth) -> Tuple[List[float], float]:
    """Per-cluster share of the dominant domain, and the minimum (1.0 when there are no clusters)."""
    if partitioning.n != truth.n:
        raise ContractViolation(f"partitioning covers {partitioning.n} vertices, groundtruth {truth.n}")
    per_cluster = []
    for cluster in partitioning.clusters:
        labels = truth.domain[cluster]
        if (labels < 0).any():
            raise ContractViolation("cluster contains a vertex without a domain label")
        per_cluster.append(float(np.bincount(labels, minlength=truth.k).max() / len(cluster)))
    return per_cluster, min(per_cluster, default=1.0)


def coverage(partitioning: Partitioning) -> float:
    if partitioning.n == 0:
        return 0.0
    return 1.0 - len(partitioning.remainder) / partitioning.n


def reconstructed_fraction(partitioning: Partitioning, truth: GroundTruth) -> float:
    """
    Mean over domains of the largest share of the domain found in a single cluster.

    Clusters only grow while clustering runs, so this never decreases along a trace.
    """
    best = np.zeros(truth.k, dtype=np.int64)
    for cluster in partitioning.clusters:
        best = np.maximum(best, np.bincount(truth.domain[cluster], minlength=truth.k))
    return float(np.mean(best / np.asarray(truth.domain_sizes)))


def majority_domains(partitioning: Partitioning, truth: GroundTruth) -> List[int]:
    return [int(np.bincount(truth.domain[c], minlength=truth.k).argmax()) for c in partitioning.clusters]


@dataclass
class QueryScore:
    """Wrong answers split by query kind; cross queries are unscored without a global order."""
    intra_wrong: int
    intra_total: int
    cross_wrong: int
    cross_total: int
    cross_scored: bool

    @property
    def error(self) -> float:
        wrong = self.intra_wrong + (self.cross_wrong if self.cross_scored else 0)
        total = self.intra_total + (self.cross_total if self.cross_scored else 0)
        return wrong / total if total else 0.0

    @property
    def correct_fraction(self) -> float:
        """Right answers over every query; unscored cross queries never count as right."""
        right = self.intra_total - self.intra_wrong
        if self.cross_scored:
            right += self.cross_total - self.cross_wrong
        total = self.intra_total + self.cross_total
        return right / total if total else 0.0


def score_answers(truth: GroundTruth, queries: np.ndarray, answers: np.ndarray) -> QueryScore:
    u, v = queries[:, 0], queries[:, 1]
    intra = truth.domain[u] == truth.domain[v]
    u_answer = answers == u
    u_truth_intra = truth.position[u] < truth.position[v]
    intra_wrong = int((u_answer != u_truth_intra)[intra].sum())
    cross_scored = truth.global_position is not None
    cross_wrong = 0
    if cross_scored:
        u_truth_global = truth.global_position[u] < truth.global_position[v]
        cross_wrong = int((u_answer != u_truth_global)[~intra].sum())
    return QueryScore(intra_wrong, int(intra.sum()), cross_wrong, int((~intra).sum()), cross_scored)


def model_score(model: RankModel, truth: GroundTruth, queries, seed=None) -> QueryScore:
    queries = np.asarray(queries, dtype=np.int64)
    return score_answers(truth, queries, answer_queries(model, queries, seed))


def generalization_error(model: RankModel, truth: GroundTruth, queries, seed=None) -> float:
    """Fraction of queries the model answers against the groundtruth."""
    return model_score(model, truth, queries, seed).error


def global_order(t: Tournament, seed, config: Optional[QuickSortConfig] = None) -> Ordering:
    """One ordering of the whole vertex set, every vertex a pivot."""
    everything = np.arange(t.n)
    return best_of_runs(t, everything, everything, config or QuickSortConfig(), seed)


def answers_from_order(order: Ordering, queries: np.ndarray) -> np.ndarray:
    pos = np.empty(len(order), dtype=np.int64)
    pos[order] = np.arange(len(order))
    u, v = queries[:, 0], queries[:, 1]
    return np.where(pos[u] < pos[v], u, v)


def order_error(order: Ordering, truth: GroundTruth, queries) -> float:
    queries = np.asarray(queries, dtype=np.int64)
    return score_answers(truth, queries, answers_from_order(order, queries)).error


def baseline_global_quicksort(t: Tournament, truth: GroundTruth, queries, seed,
                              config: Optional[QuickSortConfig] = None) -> float:
    """Error of answering every query from a single global QuickSort ordering."""
    return order_error(global_order(t, seed, config), truth, queries)


def intra_backward_edges(t: Tournament, order: Ordering, truth: GroundTruth) -> int:
    """Backward edges of ``order`` counted only inside domains."""
    total = 0
    for domain_order in truth.orderings:
        keep = np.isin(order, domain_order)
        total += backward_edges(t, order[keep])
    return total


def bad_edges(t: Tournament, truth: GroundTruth) -> int:
    """Intra-domain edges pointing against the canonical orderings."""
    return sum(backward_edges(t, order) for order in truth.orderings)


def normalized_inversions(sigma: Sequence[int], reference_position: np.ndarray) -> float:
    """Share of pairs of ``sigma`` ordered against ``reference_position``."""
    sigma = np.asarray(sigma, dtype=np.int64)
    if len(sigma) < 2:
        return 0.0
    tau = kendalltau(np.arange(len(sigma)), reference_position[sigma])[0]
    return float((1 - tau) / 2)


def kendall_within_domain(model: RankModel, truth: GroundTruth) -> Dict[int, float]:
    """
    Normalized inversion count per domain.

    Every domain is represented by the cluster holding most of its vertices;
    that cluster's ordering is restricted to the domain before comparing.
    """
    result = {}
    best_share: Dict[int, int] = {}
    for cluster, order in zip(model.partitioning.clusters, model.orderings):
        counts = np.bincount(truth.domain[cluster], minlength=truth.k)
        domain = int(counts.argmax())
        if counts[domain] <= best_share.get(domain, 0):
            continue
        best_share[domain] = int(counts[domain])
        restricted = order[truth.domain[order] == domain]
        result[domain] = normalized_inversions(restricted, truth.position)
    return dict(sorted(result.items()))


# ── Metrics CSV ──────────────────────────────────────────────────────────

@dataclass
class MetricsRow:
    """
    One seed, or one budget point of a seed.

    ``inversions`` is the mean share of inverted pairs inside each domain's
    best cluster; ``correct_bound`` is the guaranteed share of correct answers
    and goes negative when the guarantee is vacuous.
    """
    seed: int
    n: int
    k: int
    ratio: float
    p_succ: float
    eps_config: float
    eps_clust: float
    eps_baseline: float
    coverage: float
    min_purity: float
    cluster_count: int
    find_runs: int
    copies_found: int
    wall_ms: int
    label: str = ''
    budget: int = 0
    reconstructed: float = 0.0
    correct_fraction: float = 0.0
    correct_bound: float = 0.0
    inversions: float = 0.0
    bad_edges: int = 0
    bad_edge_bound: float = 0.0
    baseline_intra_backward: int = 0

    def __post_init__(self):
        for name in ('eps_clust', 'eps_baseline', 'coverage', 'min_purity', 'reconstructed',
                     'correct_fraction', 'inversions'):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0 or math.isnan(value)):
                raise ContractViolation(f"{name}={value} is not a fraction")


METRICS_HEADER = [f.name for f in fields(MetricsRow)]
_FLOAT_FIELDS = {f.name for f in fields(MetricsRow) if f.type in (float, 'float')}
_INT_FIELDS = {f.name for f in fields(MetricsRow) if f.type in (int, 'int')}


def _format(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_metrics_csv(rows: Sequence[MetricsRow], stream: TextIO, header: bool = True) -> None:
    writer = csv.writer(stream, lineterminator='\n')
    if header:
        writer.writerow(METRICS_HEADER)
    for row in rows:
        values = asdict(row)
        writer.writerow([_format(values[name]) for name in METRICS_HEADER])


def read_metrics_csv(stream: TextIO) -> List[MetricsRow]:
    reader = csv.DictReader(stream)
    if reader.fieldnames != METRICS_HEADER:
        raise FormatError(f"unexpected metrics header {reader.fieldnames}")
    rows = []
    for record in reader:
        try:
            values = {
                name: float(raw) if name in _FLOAT_FIELDS else int(raw) if name in _INT_FIELDS else raw
                for name, raw in record.items()
            }
        except ValueError as e:
            raise FormatError(f"bad metrics row {record}: {e}") from e
        rows.append(MetricsRow(**values))
    return rows
