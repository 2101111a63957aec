"""
Django models for recorded experiment results.
"""
from dataclasses import asdict

from django.db import models


class ExperimentMode(models.TextChoices):
    """Tournament source of an experiment."""
    PLANTED = 'planted', 'Planted partition'
    VOTING = 'voting', 'Majority voting'


class ExperimentRecord(models.Model):
    """One MetricsRow of a run or bench invocation."""

    label = models.CharField(max_length=200, blank=True, default='')
    mode = models.CharField(
        max_length=10,
        choices=ExperimentMode.choices,
        default=ExperimentMode.PLANTED
    )
    config = models.JSONField(default=dict, help_text="Experiment config the row was produced with")
    seed = models.IntegerField()

    n = models.IntegerField()
    k = models.IntegerField()
    ratio = models.FloatField()
    p_succ = models.FloatField()
    eps_config = models.FloatField()

    # Metrics
    eps_clust = models.FloatField(help_text="Generalization error of the clustered ranking")
    eps_baseline = models.FloatField(help_text="Generalization error of one global QuickSort ordering")
    coverage = models.FloatField()
    min_purity = models.FloatField()
    reconstructed = models.FloatField(default=0.0)
    cluster_count = models.IntegerField()
    find_runs = models.IntegerField()
    copies_found = models.IntegerField()
    budget = models.IntegerField(default=0)
    correct_fraction = models.FloatField(default=0.0, help_text="Share of all queries answered correctly")
    correct_bound = models.FloatField(default=0.0, help_text="Guaranteed share of correct answers")
    inversions = models.FloatField(default=0.0, help_text="Mean within-domain share of inverted pairs")
    bad_edges = models.IntegerField(default=0)
    bad_edge_bound = models.FloatField(default=0.0)
    baseline_intra_backward = models.IntegerField(
        default=0,
        help_text="Intra-domain backward edges of the global QuickSort ordering"
    )
    wall_ms = models.IntegerField()

    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['label', 'seed', 'budget']
        indexes = [
            models.Index(fields=['label', 'seed'], name='ranking_exp_label_0b6f2c_idx'),
        ]

    def __str__(self):
        return f"{self.label or self.mode} seed={self.seed}: eps_clust={self.eps_clust:.4f}"

    @classmethod
    def from_row(cls, row, config) -> 'ExperimentRecord':
        return cls(mode=config.mode, config=config.to_dict(), **asdict(row))
