"""
Management command to generate a tournament instance.
Writes tournament.txt and groundtruth.txt, plus fresh.txt (the independent
tournament used by purify) unless --no-purify is given.

Usage:
    python manage.py gen --config configs/smoke.json --out runs/smoke --seed 7
"""
from pathlib import Path

from django.conf import settings

from ranking.management.base import RankingCommand
from ranking.services import ExperimentService


class Command(RankingCommand):
    help = 'Generate a tournament, its groundtruth and the fresh tournament for purify'

    def add_arguments(self, parser):
        self.add_config_arguments(parser)
        parser.add_argument('--out', help='Output directory (default: RANKING_OUTPUT_DIR/<label>/gen)')

    def handle(self, *args, **options):
        config = self.load_config(options)
        seed = config.seeds[0]
        out = Path(options['out']) if options.get('out') else \
            Path(settings.RANKING_OUTPUT_DIR) / (config.label or 'experiment') / 'gen'

        self.stdout.write(f'Generating {config.mode} instance: n={config.total_n}, k={config.domain_count}, seed={seed}')
        instance = ExperimentService.generate(config, seed)
        ExperimentService.write_instance(instance, out)

        files = sorted(p.name for p in out.iterdir() if p.suffix == '.txt')
        self.stdout.write(self.style.SUCCESS(f'Done. Wrote {", ".join(files)} to {out}'))
