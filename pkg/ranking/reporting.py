"""
Bench reporting: per-point aggregation and static SVG plots.
"""
import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ranking.evaluation import MetricsRow, write_metrics_csv  # noqa: E402

logger = logging.getLogger(__name__)

SUMMARY_METRICS = (
    'eps_clust', 'eps_baseline', 'coverage', 'min_purity', 'reconstructed',
    'correct_fraction', 'correct_bound', 'inversions', 'baseline_intra_backward',
)
COUNT_METRICS = ('baseline_intra_backward',)


@dataclass
class SummaryPoint:
    x: float
    seeds: int
    mean: Dict[str, float]
    stderr: Dict[str, float]


def x_value(row: MetricsRow, x_label: str) -> float:
    if x_label == 'find_runs_fraction':
        return row.budget / row.find_runs if row.find_runs else 1.0
    if x_label in ('point', 'label'):
        return 0.0
    if hasattr(row, x_label):
        return float(getattr(row, x_label))
    # swept keys that are not metrics columns live in the point label, "name:key=value"
    _, sep, value = row.label.rpartition(f"{x_label}=")
    return float(value) if sep else 0.0


def summarize(rows: Sequence[MetricsRow], x_label: str) -> List[SummaryPoint]:
    """Mean and standard error of every metric at each sweep point."""
    if x_label == 'find_runs_fraction':
        # budgets differ per seed, so group by position within each seed's sweep
        groups = _group_by_sweep_position(rows)
    else:
        groups: Dict[tuple, List[MetricsRow]] = {}
        for row in rows:
            groups.setdefault((row.label,), []).append(row)
    points = []
    for members in groups.values():
        xs = [x_value(row, x_label) for row in members]
        mean, stderr = {}, {}
        for metric in SUMMARY_METRICS:
            values = np.array([getattr(row, metric) for row in members], dtype=float)
            mean[metric] = float(values.mean())
            stderr[metric] = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
        points.append(SummaryPoint(x=float(np.mean(xs)), seeds=len(members), mean=mean, stderr=stderr))
    return sorted(points, key=lambda p: p.x)


def _group_by_sweep_position(rows: Sequence[MetricsRow]) -> Dict[tuple, List[MetricsRow]]:
    position: Dict[int, int] = {}
    groups: Dict[tuple, List[MetricsRow]] = {}
    for row in rows:
        index = position.get(row.seed, 0)
        position[row.seed] = index + 1
        groups.setdefault((row.label, index), []).append(row)
    return groups


class MetricsCsvWriter:
    """
    metrics.csv kept open for a whole run.

    Rows are appended and flushed as each seed finishes, so a failing seed
    leaves the rows of the seeds before it on disk.
    """

    def __init__(self, path: Path):
        self.path = Path(path)
        self.rows = 0
        self._file = None

    def __enter__(self) -> 'MetricsCsvWriter':
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self.path, 'w', newline='')
        write_metrics_csv([], self._file)
        self._file.flush()
        return self

    def write(self, rows: Sequence[MetricsRow]) -> None:
        write_metrics_csv(rows, self._file, header=False)
        self._file.flush()
        self.rows += len(rows)

    def __exit__(self, exc_type, exc, tb):
        self._file.close()
        if exc_type is not None:
            logger.warning(f"{self.path}: run stopped after {self.rows} rows: {exc}")
        return False


def write_summary(points: Sequence[SummaryPoint], x_label: str, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        header = [x_label, 'seeds']
        for metric in SUMMARY_METRICS:
            header += [f"{metric}_mean", f"{metric}_stderr"]
        writer.writerow(header)
        for p in points:
            line = [f"{p.x:.6f}", p.seeds]
            for metric in SUMMARY_METRICS:
                line += [f"{p.mean[metric]:.6f}", f"{p.stderr[metric]:.6f}"]
            writer.writerow(line)


def plot_summary(points: Sequence[SummaryPoint], x_label: str, metrics: Sequence[str], path: Path,
                 title: str = '') -> None:
    """Line plot with stderr bars, saved as SVG."""
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [p.x for p in points]
    for metric in metrics:
        ax.errorbar(xs, [p.mean[metric] for p in points], yerr=[p.stderr[metric] for p in points],
                    marker='o', capsize=3, label=metric)
    ax.set_xlabel(x_label)
    if not set(metrics) & set(COUNT_METRICS):
        ax.set_ylim(0, 1)
    ax.set_title(title)
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format='svg')
    plt.close(fig)
    logger.info(f"wrote plot {path}")
