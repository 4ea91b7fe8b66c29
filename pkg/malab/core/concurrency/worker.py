"""
Job workers.
Runs the independent jobs of an experiment matrix on a thread pool.
Jobs share no mutable state; callers serialize their own side effects.
"""

from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor, Future
from threading import Lock, Event
from typing import Callable, Optional, Dict, List
import traceback
import time

from malab.core.concurrency.config import (
    WorkerState, T, JobResult, WorkerPoolConfig
)
from malab.utils import get_logger

logger = get_logger("MALab.Workers")


####
##      BASE CLASS FOR WORKERS
#####
class BaseWorker(ABC):
    """Base class for all workers"""

    def __init__(self, job_id: Optional[str] = None):
        self.job_id = job_id or f"job_{id(self)}"
        self.state = WorkerState.PENDING
        self._result = None
        self._error: Optional[BaseException] = None
        self._execution_time: float = 0.0
        self._metadata: Dict[str, object] = {}
        self._cancelled = Event()

    @abstractmethod
    def execute(self):
        """
        Job body. Subclasses override this; exceptions are captured into
        the JobResult instead of propagating.
        """
        pass

    def run(self) -> JobResult:
        """Executes the job and returns its result"""

        if self._cancelled.is_set():
            self.state = WorkerState.CANCELLED
            return self._create_result()

        self.state = WorkerState.RUNNING
        start_time = time.perf_counter()

        try:
            self._result = self.execute()
            self.state = WorkerState.COMPLETED

        except Exception as e:
            self._error = e
            self.state = WorkerState.FAILED
            logger.error(f"Job {self.job_id} failed: {e}")
            logger.debug(traceback.format_exc())

        finally:
            self._execution_time = time.perf_counter() - start_time

        return self._create_result()

    def cancel(self) -> bool:
        """Cancels a job that has not started"""

        if self.state == WorkerState.PENDING:
            self._cancelled.set()
            self.state = WorkerState.CANCELLED
            return True
        return False

    def is_cancelled(self) -> bool:
        return self._cancelled.is_set()

    def _create_result(self) -> JobResult:
        return JobResult(
            job_id = self.job_id,
            state = self.state,
            result = self._result,
            error = self._error,
            execution_time = self._execution_time,
            metadata = self._metadata.copy()
        )


####
##      FUNCTION WORKER
#####
class FunctionWorker(BaseWorker):
    """Worker that wraps a function"""

    def __init__(self, func: Callable[..., T], *args, job_id: Optional[str] = None, **kwargs):
        super().__init__(job_id)
        self.func = func
        self.args = args
        self.kwargs = kwargs

    def execute(self):
        return self.func(*self.args, **self.kwargs)


####
##      WORKER POOL
#####
class WorkerPool:
    """Thread pool that keeps results in submission order"""

    def __init__(self, config: Optional[WorkerPoolConfig] = None):
        self.config = config or WorkerPoolConfig()
        self._executor = ThreadPoolExecutor(max_workers = self.config.max_workers)
        self._futures: Dict[str, Future] = {}
        self._workers: Dict[str, BaseWorker] = {}
        self._order: List[str] = []
        self._lock = Lock()
        self._shutdown = False

    def submit_worker(self, worker: BaseWorker) -> str:
        """Submits a worker for execution"""

        if self._shutdown:
            raise RuntimeError("WorkerPool is shut down")

        with self._lock:
            if worker.job_id in self._workers:
                raise ValueError(f"duplicate job id '{worker.job_id}'")
            self._workers[worker.job_id] = worker
            self._order.append(worker.job_id)
            self._futures[worker.job_id] = self._executor.submit(worker.run)
        logger.debug(f"submitted {worker.job_id}")
        return worker.job_id

    def submit_function(self, func: Callable[..., T], *args, job_id: Optional[str] = None, **kwargs) -> str:
        """Submits a function for execution"""

        return self.submit_worker(FunctionWorker(func, *args, job_id = job_id, **kwargs))

    def get_result(self, job_id: str, timeout: Optional[float] = None) -> JobResult:
        """Waits for one job"""

        with self._lock:
            future = self._futures.get(job_id)
        if future is None:
            raise KeyError(f"job {job_id} not found")
        try:
            return future.result(timeout = timeout or self.config.timeout)
        except Exception as e:
            return JobResult(job_id = job_id, state = WorkerState.FAILED, error = e)

    def wait_all(self, timeout: Optional[float] = None) -> List[JobResult]:
        """Waits for every submitted job; results follow submission order."""

        with self._lock:
            order = list(self._order)
        return [self.get_result(job_id, timeout) for job_id in order]

    def cancel(self, job_id: str) -> bool:
        with self._lock:
            worker = self._workers.get(job_id)
            future = self._futures.get(job_id)
        if worker is None:
            return False
        cancelled = future.cancel() if future is not None else False
        return worker.cancel() or cancelled

    def get_stats(self) -> Dict[str, int]:
        """Returns pool stats"""

        with self._lock:
            states = [w.state for w in self._workers.values()]
        return {state.value: states.count(state) for state in WorkerState}

    def shutdown(self, wait: bool = True):
        self._shutdown = True
        self._executor.shutdown(wait = wait)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.config.auto_shutdown:
            self.shutdown()


def run_jobs(jobs: Dict[str, Callable[[], T]], max_workers: int = 1) -> List[JobResult]:
    """
    Runs named jobs, in parallel when max_workers > 1, and returns their
    results in the order given.
    """

    if max_workers <= 1:
        return [FunctionWorker(fn, job_id = name).run() for name, fn in jobs.items()]
    with WorkerPool(WorkerPoolConfig(max_workers = max_workers)) as pool:
        for name, fn in jobs.items():
            pool.submit_function(fn, job_id = name)
        return pool.wait_all()
