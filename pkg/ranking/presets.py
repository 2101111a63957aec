"""
Desk-scale experiment presets for the bench command.
"""
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

from ranking.config import ExperimentConfig
from ranking.exceptions import ConfigError


@dataclass(frozen=True)
class ExperimentPreset:
    """
    A base config swept along one axis.

    ``axis`` names a config key and ``values`` the points; ``budgets``
    (fractions of each seed's find runs) turns the preset into a
    purity-versus-budget sweep instead. ``metrics`` picks the plotted columns.
    """
    name: str
    base: ExperimentConfig
    axis: Optional[str] = None
    values: Tuple = ()
    budgets: Tuple[float, ...] = ()
    metrics: Tuple[str, ...] = ()
    description: str = ''

    def points(self) -> List[ExperimentConfig]:
        if self.axis is None:
            return [replace(self.base, label=self.name)]
        return [
            self.base.with_overrides(**{self.axis: value, 'label': f"{self.name}:{self.axis}={value}"})
            for value in self.values
        ]

    @property
    def x_label(self) -> str:
        return 'find_runs_fraction' if self.budgets else (self.axis or 'point')

    @property
    def plot_metrics(self) -> Tuple[str, ...]:
        if self.metrics:
            return self.metrics
        return ('reconstructed', 'min_purity') if self.budgets else ('eps_clust', 'eps_baseline')


PRESETS: Dict[str, ExperimentPreset] = {
    'smoke': ExperimentPreset(
        name='smoke',
        base=ExperimentConfig(mode='planted', n=200, k=2, p_intra=0.02, p_cross=0.5, eps=0.15,
                              gadget='qr7', seeds=(1,), queries=2000),
        description='Two planted domains of 100 vertices',
    ),
    # Majority voting at these ratios leaves het near 3, where the bound rule
    # rejects same-domain merges; splitting the votes for purify would raise
    # p_u from 0.16 to 0.24.
    'table1-mini': ExperimentPreset(
        name='table1-mini',
        base=ExperimentConfig(mode='voting', n=1000, k=2, ratio=0.02, p_succ=0.55, votes=100,
                              eps=0.15, gadget='qr7', C=15, depth=3, seeds=(1, 2, 3, 4, 5),
                              purify=False, merge='midpoint'),
        description='Majority voting with 2% cross votes at n=1000',
    ),
    'figure1-mini': ExperimentPreset(
        name='figure1-mini',
        base=ExperimentConfig(mode='voting', n=600, k=2, p_succ=0.55, votes=100, eps=0.15,
                              gadget='qr7', C=15, depth=3, seeds=(1, 2, 3), purify=False, merge='midpoint'),
        axis='ratio',
        values=(0.02, 0.05, 0.1, 0.2),
        description='Generalization error against the cross/intra vote ratio',
    ),
    'depth-sweep': ExperimentPreset(
        name='depth-sweep',
        base=ExperimentConfig(mode='voting', n=1000, k=2, ratio=0.02, p_succ=0.55, votes=100,
                              eps=0.15, gadget='qr7', C=15, seeds=(1, 2, 3), purify=False, merge='midpoint'),
        axis='depth',
        values=(1, 2, 3, 5, 7),
        description='Generalization error against the restart depth d',
    ),
    'baseline-growth': ExperimentPreset(
        name='baseline-growth',
        base=ExperimentConfig(mode='planted', n=400, k=2, p_intra=0.0, p_cross=0.5, p_u=0.01, eps=0.15,
                              gadget='qr7', seeds=tuple(range(1, 11)), purify=False, queries=2000),
        axis='n',
        values=(400, 800),
        metrics=('baseline_intra_backward',),
        description='Intra-domain backward edges of one global QuickSort as n doubles',
    ),
    'figure3-purity': ExperimentPreset(
        name='figure3-purity',
        base=ExperimentConfig(mode='planted', n=600, k=3, p_intra=0.02, p_cross=0.5, eps=0.15,
                              gadget='qr7', seeds=(1, 2, 3), purify=False, queries=1000),
        budgets=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0),
        description='Reconstructed share of each domain against the number of find runs',
    ),
}


def get_preset(name: str) -> ExperimentPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
