"""HTTP service, job queue, persistence and CLI over the core pipeline."""

from .store import ProjectStore, StoreError
from .jobs import JobQueue, JobError

__all__ = ["ProjectStore", "StoreError", "JobQueue", "JobError"]
