"""
MALab Exceptions
Every failure the laboratory can report has its own class so that the
CLI can map it onto an exit status and a readable message.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence


####
##      BASE EXCEPTION CLASS
#####
class MALabError(Exception):
    """Base exception for MALab"""

    pass


####
##      DOMAIN MEMBERSHIP EXCEPTION CLASS
#####
class DomainMembershipError(MALabError):
    """Exception raised when a point lies outside the closed domain"""

    pass


####
##      TOLERANCE EXCEPTION CLASS
#####
class ToleranceError(MALabError):
    """Exception raised when a point expected on the boundary is not"""

    pass


####
##      RESOLUTION EXCEPTION CLASS
#####
class ResolutionError(MALabError):
    """Exception raised when a grid spacing is too coarse for the domain"""

    pass


####
##      SINGULAR EVALUATION EXCEPTION CLASS
#####
class SingularEvaluationError(MALabError):
    """Exception raised when a singular function is evaluated on its singular set"""

    pass


####
##      STENCIL EXCEPTION CLASS
#####
class StencilError(MALabError):
    """Exception raised when a stencil neighbor cannot be resolved"""

    pass


####
##      DIVERGENCE EXCEPTION CLASS
#####
class DivergenceError(MALabError):
    """Exception raised when the Newton iteration does not converge"""

    def __init__(self, message: str, history: Optional[Sequence[float]] = None):
        super().__init__(message)
        self.history: List[float] = list(history or [])


####
##      ILL POSED PROBLEM EXCEPTION CLASS
#####
class IllPosedError(MALabError):
    """Exception raised for exponents outside the well-posed range (0, 2)"""

    pass


####
##      ARGUMENT EXCEPTION CLASS
#####
class ArgumentError(MALabError, ValueError):
    """Exception raised on invalid numeric arguments"""

    pass


####
##      GEOMETRY EXCEPTION CLASS
#####
class GeometryError(MALabError):
    """Exception raised when a geometric construction has no admissible data"""

    pass


####
##      RANK EXCEPTION CLASS
#####
class RankError(GeometryError):
    """Exception raised when a point set does not span the space"""

    def __init__(self, message: str, rank: int):
        super().__init__(message)
        self.rank = rank


####
##      CONVEXITY VIOLATION EXCEPTION CLASS
#####
class ConvexityViolationError(MALabError):
    """Exception raised when a discrete function contradicts convexity"""

    pass


####
##      RANGE EXCEPTION CLASS
#####
class RangeError(MALabError):
    """Exception raised when a barrier parameter leaves its validity range"""

    def __init__(self, message: str, condition: str = ""):
        super().__init__(message)
        self.condition = condition or message


####
##      EXPERIMENT EXCEPTION CLASS
#####
class ExperimentError(MALabError):
    """Exception raised when an experiment has too little usable data"""

    pass


####
##      CONFIGURATION ISSUE
#####
@dataclass(frozen = True)
class ConfigIssue:
    """One problem found in a run-config file"""

    line: int
    message: str

    def __str__(self) -> str:
        where = f"line {self.line}" if self.line > 0 else "config"
        return f"{where}: {self.message}"


####
##      CONFIGURATION EXCEPTION CLASS
#####
class ConfigurationError(MALabError):
    """Exception raised when a run config is invalid; lists every issue found"""

    def __init__(self, issues: Sequence[ConfigIssue]):
        self.issues: List[ConfigIssue] = sorted(issues, key = lambda i: (i.line, i.message))
        super().__init__("\n".join(str(issue) for issue in self.issues))


####
##      COMMAND EXCEPTION CLASS
#####
class CommandError(MALabError):
    """Exception raised for CLI command errors"""

    def __init__(self, *args, returncode: int = 2, **kwargs):
        self.returncode = returncode
        super().__init__(*args, **kwargs)


####
##      COMMAND NOT FOUND EXCEPTION CLASS
#####
class CommandNotFoundError(CommandError):
    """Exception raised when a command is not found"""

    pass


####
##      COMMAND EXECUTION EXCEPTION CLASS
#####
class CommandExecutionError(CommandError):
    """Exception raised when a command execution fails"""

    pass
