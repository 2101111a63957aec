"""
Celery tasks for running experiment seeds on workers.
"""
from dataclasses import asdict
from pathlib import Path
import logging

from celery import shared_task

from ranking.config import ExperimentConfig
from ranking.exceptions import RankingError
from ranking.services import ExperimentService

logger = logging.getLogger(__name__)


@shared_task(name='ranking.tasks.run_experiment_seed')
def run_experiment_seed(config_data: dict, seed: int, out_dir: str = None):
    """
    Run the full pipeline for one seed.

    Args:
        config_data: ExperimentConfig as a plain dict (JSON-serializable)
        seed: experiment seed
        out_dir: artifact directory, or None to skip writing files
    """
    logger.info(f"Starting experiment seed {seed}...")
    try:
        config = ExperimentConfig.from_dict(config_data)
        result = ExperimentService.run_seed(config, seed, Path(out_dir) if out_dir else None)
        logger.info(f"Experiment seed {seed} complete")
        return {
            'success': True,
            'seed': seed,
            'rows': [asdict(row) for row in result.rows],
        }
    except RankingError as e:
        logger.error(f"Experiment seed {seed} failed: {e}")
        return {'success': False, 'seed': seed, 'error': str(e)}
    except Exception as e:
        logger.error(f"Unexpected error in experiment seed {seed}: {e}")
        return {'success': False, 'seed': seed, 'error': str(e)}
