"""
Shared enumerations used across MALab modules.
"""

from enum import Enum


####
##      DOMAIN KIND
#####
class DomainKind(str, Enum):
    """Built-in convex domain catalog"""

    DISK = "disk"
    ELLIPSE = "ellipse"
    GRAPH = "graph"
    INTERVAL = "interval"


####
##      RHS WEIGHT
#####
class Weight(str, Enum):
    """Distance-like weight w in f = s(x) w(x)^(-alpha)"""

    DISTANCE = "distance"
    GRAPH = "graph"
    XN = "xn"


####
##      RHS QUADRATURE
#####
class RhsQuadrature(str, Enum):
    """How the discrete right-hand side is assembled at a node"""

    HAT = "hat"
    NODE = "node"


####
##      SUPPORTING SLOPE METHOD
#####
class SlopeMethod(str, Enum):
    """Normal supporting-slope estimator at a boundary point"""

    QUOTIENT = "quotient"
    EXTRAPOLATED = "extrapolated"


####
##      BARRIER FAMILY
#####
class BarrierFamily(str, Enum):
    """Explicit barrier catalog"""

    V0 = "V0"
    VSTAR = "VSTAR"
    POINTED_W = "POINTED_W"
    U0 = "U0"
    VPLUS = "VPLUS"
    VMINUS = "VMINUS"
    LOG_ALPHA1 = "LOG_ALPHA1"
    PLANE_SHIFT = "PLANE_SHIFT"


####
##      BARRIER SENSE
#####
class Sense(str, Enum):
    """Side of the solution a barrier bounds"""

    BELOW = "below"
    ABOVE = "above"
