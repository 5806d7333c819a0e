"""HTTP service over the evaluators with file-backed persistence."""

from .app import ServiceSettings, create_app, load_configs_dir
from .jobs import Job, JobQueue
from .store import JsonLogStore

__all__ = [
    "Job",
    "JobQueue",
    "JsonLogStore",
    "ServiceSettings",
    "create_app",
    "load_configs_dir",
]
