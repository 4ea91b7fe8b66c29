from enum import Enum
from dataclasses import dataclass, field
from typing import TypeVar, Generic, Any, Optional, Dict

# GENERIC TYPES
T = TypeVar('T')


####
##      WORKER STATE
#####
class WorkerState(Enum):
    """Lifecycle of a job"""

    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    CANCELLED = "cancelled"


####
##      JOB RESULT
#####
@dataclass
class JobResult(Generic[T]):
    """Outcome of one experiment job"""

    job_id: str
    state: WorkerState
    result: Optional[T] = None
    error: Optional[BaseException] = None
    execution_time: float = 0.0
    metadata: Dict[str, Any] = field(default_factory = dict)

    @property
    def ok(self) -> bool:
        return self.state == WorkerState.COMPLETED


####
##      WORKER POOL CONFIGURATION
#####
@dataclass
class WorkerPoolConfig:
    """Worker pool configuration."""

    max_workers: int = 4
    timeout: Optional[float] = None
    auto_shutdown: bool = True

    def __post_init__(self):
        if self.max_workers < 1:
            raise ValueError("max_workers must be >= 1")
