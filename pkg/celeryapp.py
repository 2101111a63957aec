"""
Celery configuration for hetero_rank project.
Workers pick up per-seed pipeline runs queued by `manage.py run --queue`.
"""
import os
from celery import Celery

# Set the default Django settings module for the 'celery' program.
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'hetero_rank.settings')

app = Celery('hetero_rank')

# Using a string here means the worker doesn't have to serialize
# the configuration object to child processes.
app.config_from_object('django.conf:settings', namespace='CELERY')

# Load task modules from all registered Django apps.
app.autodiscover_tasks()
