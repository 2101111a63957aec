"""
Experiment services used by the management commands and Celery tasks.

- generate(): draw the tournament, groundtruth and the independent tournament for Purify
- run_seed(): full pipeline for one seed, returning MetricsRow(s)
- run_seeds(): ThreadPoolExecutor fan-out, rows reassembled in seed order
- run_queued(): the same fan-out through Celery workers
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np
from django.conf import settings

from ranking.clustering import FindConfig, MergeConfig, replay_trace
from ranking.config import ExperimentConfig
from ranking.evaluation import (
    MetricsRow,
    bad_edges,
    coverage,
    global_order,
    intra_backward_edges,
    kendall_within_domain,
    model_score,
    order_error,
    purity,
    reconstructed_fraction,
)
from ranking.exceptions import RankingError
from ranking.fas import QuickSortConfig
from ranking.gadget import gadget_from_name
from ranking.generators import (
    Bounds,
    GroundTruth,
    PlantedSpec,
    VoteTally,
    bad_edge_bound,
    generate_planted,
    generate_voting,
    sample_queries,
    validate_preconditions,
    write_groundtruth,
)
from ranking.pipeline import PipelineConfig, RankModel, correct_query_bound, hetero_ranking, write_model
from ranking.presets import ExperimentPreset
from ranking.purify import PurifyConfig, write_nonoutliers
from ranking.seeding import child_seed
from ranking.tournament import Ordering, Tournament, write_tournament

logger = logging.getLogger(__name__)


@dataclass
class Instance:
    tournament: Tournament
    truth: GroundTruth
    fresh: Optional[Tournament] = None
    tally: Optional[VoteTally] = None


@dataclass
class SeedResult:
    seed: int
    rows: List[MetricsRow]
    model: RankModel = field(repr=False)
    instance: Instance = field(repr=False)


class ExperimentService:
    """Runs experiments described by an ExperimentConfig."""

    @staticmethod
    def generate(config: ExperimentConfig, seed: int) -> Instance:
        """
        Draw one instance. With Purify on, planted mode regenerates the
        tournament on the same domains from a fresh seed, and voting mode
        splits every pair's votes into two halves.
        """
        if config.mode == 'planted':
            spec = config.planted_spec()
            t, truth = generate_planted(spec, child_seed(seed, 0))
            fresh = None
            if config.purify:
                same_domains = replace(spec, orderings=tuple(tuple(int(v) for v in o) for o in truth.orderings))
                fresh, _ = generate_planted(same_domains, child_seed(seed, 1))
            return Instance(t, truth, fresh)

        t, truth, tally = generate_voting(config.voting_config(), config.sizes, child_seed(seed, 0))
        if not config.purify:
            return Instance(t, truth, None, tally)
        rng = np.random.default_rng(child_seed(seed, 1))
        first, second = tally.split(rng)
        return Instance(first.tournament(rng), truth, second.tournament(rng), tally)

    @staticmethod
    def stage_configs(config: ExperimentConfig, h: int, p_m: float) -> PipelineConfig:
        find = FindConfig.build(
            config.eps, p_m, h,
            depth=config.depth,
            copy_cap=config.C,
            sample_size=config.sample_size,
            max_restarts=settings.RANKING_FIND_MAX_RESTARTS,
        )
        quicksort = QuickSortConfig(runs=config.quicksort_runs, max_runs=settings.RANKING_QUICKSORT_MAX_RUNS)
        purify = None
        if config.purify:
            purify = PurifyConfig(
                sample_coefficient=settings.RANKING_PURIFY_SAMPLE_COEFFICIENT,
                threshold_scale=settings.RANKING_PURIFY_THRESHOLD_SCALE,
            )
        return PipelineConfig(find=find, quicksort=quicksort, purify=purify, merge=MergeConfig(rule=config.merge))

    @staticmethod
    def write_instance(instance: Instance, out_dir: Path) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / 'tournament.txt', 'w') as f:
            write_tournament(instance.tournament, f)
        with open(out_dir / 'groundtruth.txt', 'w') as f:
            write_groundtruth(instance.truth, f)
        if instance.fresh is not None:
            with open(out_dir / 'fresh.txt', 'w') as f:
                write_tournament(instance.fresh, f, comments=['independent tournament for purify'])

    @staticmethod
    def quality_columns(config: ExperimentConfig, bounds: Bounds, instance: Instance, model: RankModel,
                        baseline: Ordering, query_count: int) -> dict:
        """Guarantee-side columns: correct-answer bound, bad-edge count and bound, inversions."""
        voting = config.voting_config()
        if config.mode == 'planted':
            spec = config.planted_spec()
        else:
            spec = PlantedSpec.uniform(config.sizes, bounds.p_u)
        # a domain with no cluster of its own counts as a random order
        per_domain = kendall_within_domain(model, instance.truth)
        inversions = [per_domain.get(d, 0.5) for d in range(instance.truth.k)]
        return dict(
            correct_bound=correct_query_bound(query_count, voting.M, voting.m, config.eps, bounds.p_u) / query_count,
            inversions=float(np.mean(inversions)),
            bad_edges=bad_edges(instance.tournament, instance.truth),
            bad_edge_bound=bad_edge_bound(spec, config.total_n),
            baseline_intra_backward=intra_backward_edges(instance.tournament, baseline, instance.truth),
        )

    @classmethod
    def run_seed(cls, config: ExperimentConfig, seed: int, out_dir: Optional[Path] = None,
                 budgets: Sequence[float] = ()) -> SeedResult:
        """Generate, rank, evaluate and (optionally) write the artifacts of one seed."""
        started = time.perf_counter()
        bounds = config.bounds()
        instance = cls.generate(config, seed)
        seed_dir = Path(out_dir) / f"seed-{seed}" if out_dir is not None else None
        if seed_dir is not None:
            cls.write_instance(instance, seed_dir)

        gadget = gadget_from_name(config.gadget, child_seed(seed, 2))
        validate_preconditions(
            config.total_n, bounds, gadget.h, config.eps, config.sizes,
            config.intra_probabilities() if config.mode == 'planted' else None,
        )
        stages = cls.stage_configs(config, gadget.h, bounds.p_m)
        model = hetero_ranking(instance.tournament, bounds, config.eps, gadget, stages,
                               child_seed(seed, 3), fresh=instance.fresh)
        if seed_dir is not None:
            with open(seed_dir / 'model.txt', 'w') as f:
                write_model(model, f)
            with open(seed_dir / 'nonoutliers.txt', 'w') as f:
                write_nonoutliers(model.nonoutliers, f)

        queries = sample_queries(instance.truth, config.voting_config(),
                                 config.query_count(settings.RANKING_QUERY_COUNT), child_seed(seed, 4))
        score = model_score(model, instance.truth, queries, child_seed(seed, 5))
        baseline = global_order(instance.tournament, child_seed(seed, 6), stages.quicksort)
        eps_clust = score.error
        eps_baseline = order_error(baseline, instance.truth, queries)
        quality = cls.quality_columns(config, bounds, instance, model, baseline, len(queries))
        partitioning = model.partitioning
        trace = partitioning.trace
        wall_ms = int((time.perf_counter() - started) * 1000)
        row = MetricsRow(
            seed=seed,
            n=config.total_n,
            k=config.domain_count,
            ratio=config.ratio,
            p_succ=config.p_succ,
            eps_config=config.eps,
            eps_clust=eps_clust,
            eps_baseline=eps_baseline,
            coverage=coverage(partitioning),
            min_purity=purity(partitioning, instance.truth)[1],
            cluster_count=len(partitioning.clusters),
            find_runs=len(trace),
            copies_found=sum(1 for event in trace if event.kind == 'copy'),
            wall_ms=wall_ms,
            label=config.label,
            budget=len(trace),
            reconstructed=reconstructed_fraction(partitioning, instance.truth),
            correct_fraction=score.correct_fraction,
            **quality,
        )
        logger.info(
            f"seed {seed}: eps_clust={eps_clust:.4f} eps_baseline={eps_baseline:.4f} "
            f"clusters={row.cluster_count} coverage={row.coverage:.3f} in {wall_ms} ms"
        )

        rows = [row]
        if budgets:
            rows = []
            for fraction in budgets:
                budget = math.ceil(fraction * len(trace))
                partial = replay_trace(partitioning.n, trace, budget)
                rows.append(replace(
                    row,
                    budget=budget,
                    coverage=coverage(partial),
                    min_purity=purity(partial, instance.truth)[1],
                    cluster_count=len(partial.clusters),
                    reconstructed=reconstructed_fraction(partial, instance.truth),
                ))
        return SeedResult(seed=seed, rows=rows, model=model, instance=instance)

    @classmethod
    def run_seeds(cls, config: ExperimentConfig, seeds: Optional[Sequence[int]] = None, workers: int = 1,
                  out_dir: Optional[Path] = None, budgets: Sequence[float] = (),
                  on_rows: Optional[Callable[[List[MetricsRow]], None]] = None) -> List[MetricsRow]:
        """
        Run every seed, in parallel when workers > 1; rows come back in seed order.

        ``on_rows`` receives each seed's rows, in seed order, as soon as that
        seed and every seed before it have finished.
        """
        seeds = list(seeds if seeds is not None else config.seeds)
        results = {}
        delivered = 0

        def deliver():
            nonlocal delivered
            while delivered < len(seeds) and seeds[delivered] in results:
                if on_rows is not None:
                    on_rows(results[seeds[delivered]].rows)
                delivered += 1

        if workers <= 1:
            for s in seeds:
                results[s] = cls.run_seed(config, s, out_dir, budgets)
                deliver()
        else:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                futures = {ex.submit(cls.run_seed, config, s, out_dir, budgets): s for s in seeds}
                for future in as_completed(futures):
                    results[futures[future]] = future.result()
                    deliver()
        return [row for s in seeds for row in results[s].rows]

    @classmethod
    def run_queued(cls, config: ExperimentConfig, seeds: Optional[Sequence[int]] = None,
                   out_dir: Optional[Path] = None,
                   on_rows: Optional[Callable[[List[MetricsRow]], None]] = None) -> List[MetricsRow]:
        """Dispatch one Celery task per seed and collect the rows in seed order."""
        from ranking.tasks import run_experiment_seed

        seeds = list(seeds if seeds is not None else config.seeds)
        pending = [
            run_experiment_seed.delay(config.to_dict(), s, str(out_dir) if out_dir else None)
            for s in seeds
        ]
        rows = []
        for s, result in zip(seeds, pending):
            payload = result.get()
            if not payload.get('success'):
                raise RankingError(f"seed {s} failed on a worker: {payload.get('error')}")
            seed_rows = [MetricsRow(**values) for values in payload['rows']]
            if on_rows is not None:
                on_rows(seed_rows)
            rows.extend(seed_rows)
        return rows

    @classmethod
    def run_preset(cls, preset: ExperimentPreset, workers: int = 1, out_dir: Optional[Path] = None,
                   seeds: Optional[Sequence[int]] = None,
                   on_rows: Optional[Callable[[List[MetricsRow]], None]] = None) -> List[MetricsRow]:
        rows = []
        for index, point in enumerate(preset.points()):
            point_dir = Path(out_dir) / f"point-{index}" if out_dir is not None else None
            rows.extend(cls.run_seeds(point, seeds, workers, point_dir, preset.budgets, on_rows))
        return rows

    @staticmethod
    def record_rows(rows: Sequence[MetricsRow], config: ExperimentConfig) -> int:
        """Store rows as ExperimentRecord entries; the CSV stays canonical."""
        from ranking.models import ExperimentRecord

        records = [ExperimentRecord.from_row(row, config) for row in rows]
        ExperimentRecord.objects.bulk_create(records)
        logger.info(f"recorded {len(records)} experiment rows")
        return len(records)
