"""
Concurrency utilities.
A small worker pool for running experiment jobs side by side.
"""

from malab.core.concurrency.config import (
    WorkerState, JobResult, WorkerPoolConfig
)
from malab.core.concurrency.worker import (
    BaseWorker, FunctionWorker, WorkerPool, run_jobs
)

__all__ = [
    'WorkerState',
    'JobResult',
    'WorkerPoolConfig',
    'BaseWorker',
    'FunctionWorker',
    'WorkerPool',
    'run_jobs',
]
