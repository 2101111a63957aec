"""
Shared plumbing for the ranking management commands: exit codes and config flags.

Exit codes: 0 success, 1 pipeline failure, 2 config or format error,
3 feasibility refusal.
"""
import logging

from django.core.management.base import BaseCommand, CommandError

from ranking.clustering import MERGE_RULES
from ranking.config import ExperimentConfig
from ranking.exceptions import ConfigError, ConstructionError, FormatError, RankingError, SizeLimitError
from ranking.presets import get_preset

logger = logging.getLogger(__name__)

EXIT_PIPELINE = 1
EXIT_CONFIG = 2
EXIT_SIZE_LIMIT = 3


class RankingCommand(BaseCommand):
    """BaseCommand that maps ranking errors onto exit codes."""

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except SizeLimitError as e:
            raise CommandError(str(e), returncode=EXIT_SIZE_LIMIT) from e
        except (ConfigError, FormatError, ConstructionError) as e:
            raise CommandError(str(e), returncode=EXIT_CONFIG) from e
        except OSError as e:
            raise CommandError(f"I/O error: {e}", returncode=EXIT_CONFIG) from e
        except RankingError as e:
            logger.error(f"pipeline failure: {e}")
            raise CommandError(str(e), returncode=EXIT_PIPELINE) from e

    @staticmethod
    def add_config_arguments(parser):
        parser.add_argument('--config', help='Experiment config (JSON)')
        parser.add_argument('--preset', help='Use the base config of a bench preset')
        parser.add_argument('--seed', type=int, help='Run a single seed')
        parser.add_argument('--seeds', type=int, nargs='+', help='Run these seeds')
        parser.add_argument('--no-purify', action='store_true', help='Skip outlier removal')
        parser.add_argument('--gadget', help="Gadget name, e.g. 'qr7' or 'random60'")
        parser.add_argument('--runs', type=int, help='QuickSort repetitions (default ceil(log2 n), capped)')
        parser.add_argument('--depth', type=int, help='Restart depth d for the embedding search')
        parser.add_argument('--copies', type=int, help='Copies found before restarts kick in (C)')
        parser.add_argument('--sample', type=int, help='Window sample size for degree estimates (0 = exact)')
        parser.add_argument('--merge', choices=MERGE_RULES, help="Merge rule for pairs: 'bound' or 'midpoint'")

    @staticmethod
    def load_config(options) -> ExperimentConfig:
        if bool(options.get('config')) == bool(options.get('preset')):
            raise ConfigError('pass exactly one of --config or --preset')
        if options.get('config'):
            config = ExperimentConfig.from_file(options['config'])
        else:
            config = get_preset(options['preset']).points()[0]

        seeds = None
        if options.get('seeds'):
            seeds = options['seeds']
        elif options.get('seed') is not None:
            seeds = [options['seed']]
        return config.with_overrides(
            seeds=seeds,
            purify=False if options.get('no_purify') else None,
            gadget=options.get('gadget'),
            quicksort_runs=options.get('runs'),
            depth=options.get('depth'),
            C=options.get('copies'),
            sample_size=options.get('sample'),
            merge=options.get('merge'),
        )
