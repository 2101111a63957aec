"""
Management command to run the full ranking pipeline.
One metrics row per seed is appended to <out>/metrics.csv as the seed
finishes; per-seed artifacts (tournament, groundtruth, fresh tournament,
model, nonoutliers) go to <out>/seed-<seed>/.

Usage:
    python manage.py run --config configs/smoke.json
    python manage.py run --config configs/voting.json --seeds 1 2 3 4 5 --workers 4
    python manage.py run --preset smoke --no-purify
    python manage.py run --config configs/voting.json --queue   # fan out to Celery workers
"""
from pathlib import Path

from django.conf import settings

from ranking.management.base import RankingCommand
from ranking.reporting import MetricsCsvWriter
from ranking.services import ExperimentService


class Command(RankingCommand):
    help = 'Run generation, clustering, purify, ranking and evaluation for every seed'

    def add_arguments(self, parser):
        self.add_config_arguments(parser)
        parser.add_argument('--out', help='Output directory (default: RANKING_OUTPUT_DIR/<label>)')
        parser.add_argument('--workers', type=int, default=None,
                            help='Parallel seed workers (default: RANKING_WORKERS)')
        parser.add_argument('--queue', action='store_true', help='Run seeds as Celery tasks')
        parser.add_argument('--record', action='store_true', help='Also store rows as ExperimentRecord')

    def handle(self, *args, **options):
        config = self.load_config(options)
        out = Path(options['out']) if options.get('out') else \
            Path(settings.RANKING_OUTPUT_DIR) / (config.label or 'experiment')
        workers = options['workers'] or settings.RANKING_WORKERS

        self.stdout.write(self.style.HTTP_INFO(f'=== Running {config.label or "experiment"} ==='))
        self.stdout.write(f'Seeds: {list(config.seeds)} | purify: {config.purify} | gadget: {config.gadget}')

        with MetricsCsvWriter(out / 'metrics.csv') as sink:
            if options['queue']:
                rows = ExperimentService.run_queued(config, out_dir=out, on_rows=sink.write)
            else:
                rows = ExperimentService.run_seeds(config, workers=workers, out_dir=out, on_rows=sink.write)

        for row in rows:
            self.stdout.write(
                f'  seed {row.seed}: eps_clust={row.eps_clust:.4f} eps_baseline={row.eps_baseline:.4f} '
                f'clusters={row.cluster_count} purity={row.min_purity:.3f}'
            )
        if options['record']:
            ExperimentService.record_rows(rows, config)

        self.stdout.write(self.style.SUCCESS(f'Done. {len(rows)} rows written to {out / "metrics.csv"}'))
