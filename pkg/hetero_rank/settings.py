"""
Django settings for hetero_rank project.
Pipeline defaults are read from the environment (.env supported for local runs).
"""

import os
import dj_database_url
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env (local dev only)
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('SECRET_KEY', 'django-insecure-replace-this-in-production')

DEBUG = os.getenv('DEBUG', 'True') == 'True'

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'ranking',
]

# Database
# Uses DATABASE_URL env var when set, falls back to SQLite locally
DATABASES = {
    'default': dj_database_url.config(
        default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}",
        conn_max_age=600,
        conn_health_checks=True,
    )
}

TIME_ZONE = 'UTC'
USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Celery Configuration
CELERY_BROKER_URL = os.getenv('REDIS_URL', 'redis://localhost:6379/0')
CELERY_RESULT_BACKEND = os.getenv('REDIS_URL', 'redis://localhost:6379/0')
CELERY_ACCEPT_CONTENT = ['application/json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = TIME_ZONE

# Logging
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'standard': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'standard',
        },
    },
    'loggers': {
        'ranking': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}

# Ranking pipeline settings
RANKING_OUTPUT_DIR = Path(os.getenv('RANKING_OUTPUT_DIR', BASE_DIR / 'runs'))
RANKING_WORKERS = int(os.getenv('RANKING_WORKERS', 1))
RANKING_QUICKSORT_MAX_RUNS = int(os.getenv('RANKING_QUICKSORT_MAX_RUNS', 8))
RANKING_PURIFY_SAMPLE_COEFFICIENT = float(os.getenv('RANKING_PURIFY_SAMPLE_COEFFICIENT', 30))
RANKING_PURIFY_THRESHOLD_SCALE = float(os.getenv('RANKING_PURIFY_THRESHOLD_SCALE', 8))
RANKING_FIND_MAX_RESTARTS = int(os.getenv('RANKING_FIND_MAX_RESTARTS', 3))
RANKING_EXHAUSTIVE_SUBSET_LIMIT = int(os.getenv('RANKING_EXHAUSTIVE_SUBSET_LIMIT', 10_000_000))
RANKING_QUERY_COUNT = int(os.getenv('RANKING_QUERY_COUNT', 10_000))
