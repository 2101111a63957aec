"""
Management command to run a bench preset.
Writes every (sweep point, seed) row to metrics.csv, the per-point
mean ± stderr to summary.csv and a static plot.svg.

Usage:
    python manage.py bench --preset figure1-mini
    python manage.py bench --preset figure3-purity --workers 3 --out runs/fig3
"""
from pathlib import Path

from django.conf import settings

from ranking.management.base import RankingCommand
from ranking.presets import PRESETS, get_preset
from ranking.reporting import MetricsCsvWriter, plot_summary, summarize, write_summary
from ranking.services import ExperimentService


class Command(RankingCommand):
    help = 'Sweep a bench preset and write metrics, summary and plot'

    def add_arguments(self, parser):
        parser.add_argument('--preset', required=True, help=f'One of: {", ".join(sorted(PRESETS))}')
        parser.add_argument('--out', help='Output directory (default: RANKING_OUTPUT_DIR/<preset>)')
        parser.add_argument('--seeds', type=int, nargs='+', help='Override the preset seeds')
        parser.add_argument('--workers', type=int, default=None,
                            help='Parallel seed workers (default: RANKING_WORKERS)')
        parser.add_argument('--record', action='store_true', help='Also store rows as ExperimentRecord')

    def handle(self, *args, **options):
        preset = get_preset(options['preset'])
        out = Path(options['out']) if options.get('out') else Path(settings.RANKING_OUTPUT_DIR) / preset.name
        workers = options['workers'] or settings.RANKING_WORKERS

        self.stdout.write(self.style.HTTP_INFO(f'=== Bench {preset.name} ==='))
        if preset.description:
            self.stdout.write(preset.description)

        with MetricsCsvWriter(out / 'metrics.csv') as sink:
            rows = ExperimentService.run_preset(preset, workers=workers, out_dir=out,
                                                seeds=options.get('seeds'), on_rows=sink.write)

        points = summarize(rows, preset.x_label)
        write_summary(points, preset.x_label, out / 'summary.csv')
        metrics = preset.plot_metrics
        plot_summary(points, preset.x_label, metrics, out / 'plot.svg', title=preset.name)

        for p in points:
            values = ' '.join(f'{m}={p.mean[m]:.4f}±{p.stderr[m]:.4f}' for m in metrics)
            self.stdout.write(f'  {preset.x_label}={p.x:g}: {values}')
        if options['record']:
            ExperimentService.record_rows(rows, preset.base)

        self.stdout.write(self.style.SUCCESS(f'Done. {len(rows)} rows, summary and plot in {out}'))
