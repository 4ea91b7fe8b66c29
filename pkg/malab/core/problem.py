"""
Problem definitions.
The Dirichlet problem det D^2 u = s(x) w(x)^(-alpha), u = phi on the
boundary, together with the boundary-data catalog, the scale function,
pointwise and assembled right-hand sides and the closed-form oracles
used to check the solver.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.spatial import cKDTree

from malab.core.domain import DomainSpec, as_points
from malab.core.grid import Grid
from malab.core.types import DomainKind, RhsQuadrature, Weight
from malab.utils import get_logger
from malab.utils.exceptions import (
    ArgumentError, DomainMembershipError, GeometryError, IllPosedError,
    SingularEvaluationError
)

logger = get_logger("MALab.Problem")

GAUSS_POINTS = 16
RHS_CHUNK = 2 ** 16
# Keeps graded quadrature points strictly inside in floating point
GRADED_FLOOR = 1e-12
# Largest jump between neighboring boundary samples, relative to 1 + max |phi|
JUMP_TOL = 0.1


####
##      ANALYTIC FUNCTION
#####
class AnalyticFunction:
    """
    Closed-form function with vectorized value, gradient and Hessian.
    Subclasses implement `eval`, `grad` and `hess` on (N, dim) arrays.
    """

    dim: int = 2

    def eval(self, points) -> np.ndarray:
        raise NotImplementedError

    def grad(self, points) -> np.ndarray:
        raise NotImplementedError

    def hess(self, points) -> np.ndarray:
        raise NotImplementedError

    def det_hessian(self, points) -> np.ndarray:
        return np.linalg.det(self.hess(points))

    def __call__(self, points):
        pts, single = as_points(points, self.dim)
        values = self.eval(pts)
        return float(values[0]) if single else values


####
##      BOUNDARY DATA
#####
@dataclass(frozen = True)
class BoundaryData(AnalyticFunction):
    """
    Catalog of boundary data phi, written in coordinates relative to
    `origin` (the base point of the domain):

    zero            0
    half_quadratic  |x'|^2 / 2
    full_quadratic  |x|^2 / 2
    quadratic       x'^T M x' / 2
    liouville       |x'|^2 / 2 + x_n^(2-alpha) / ((2-alpha)(1-alpha)), alpha in (0, 1)
    """

    tag: str = "half_quadratic"
    dim: int = 2
    matrix: Optional[Tuple[float, ...]] = None
    alpha: Optional[float] = None
    origin: Optional[Tuple[float, ...]] = None

    TAGS = ("zero", "half_quadratic", "full_quadratic", "quadratic", "liouville")

    def __post_init__(self):
        if self.tag not in self.TAGS:
            raise ArgumentError(f"unknown boundary data '{self.tag}'")
        origin = tuple(self.origin) if self.origin is not None else (0.0,) * self.dim
        object.__setattr__(self, "origin", origin)
        m = self.dim - 1
        if self.tag == "quadratic":
            if self.matrix is None or len(self.matrix) != m * m:
                raise ArgumentError(f"quadratic boundary data needs a {m}x{m} phi_matrix")
            mat = np.array(self.matrix, dtype = float).reshape(m, m)
            if not np.allclose(mat, mat.T):
                raise ArgumentError("phi_matrix must be symmetric")
        if self.tag == "liouville" and (self.alpha is None or not 0 < self.alpha < 1):
            raise ArgumentError("liouville boundary data needs alpha in (0, 1)")

    @property
    def tangential_matrix(self) -> np.ndarray:
        """Hessian of phi in x' at the origin."""

        m = self.dim - 1
        if self.tag == "zero":
            return np.zeros((m, m))
        if self.tag == "quadratic":
            return np.array(self.matrix, dtype = float).reshape(m, m)
        return np.eye(m)

    def _rel(self, points) -> np.ndarray:
        pts, _ = as_points(points, self.dim)
        return pts - np.array(self.origin)

    def eval(self, points) -> np.ndarray:
        x = self._rel(points)
        xp, xn = x[:, :-1], x[:, -1]
        if self.tag == "zero":
            return np.zeros(x.shape[0])
        if self.tag == "full_quadratic":
            return 0.5 * np.sum(x * x, axis = -1)
        value = 0.5 * np.einsum("ni,ij,nj->n", xp, self.tangential_matrix, xp)
        if self.tag == "liouville":
            a = self.alpha
            value = value + np.clip(xn, 0.0, None) ** (2 - a) / ((2 - a) * (1 - a))
        return value

    def grad(self, points) -> np.ndarray:
        x = self._rel(points)
        out = np.zeros_like(x)
        if self.tag == "zero":
            return out
        if self.tag == "full_quadratic":
            return x.copy()
        out[:, :-1] = x[:, :-1] @ self.tangential_matrix
        if self.tag == "liouville":
            a = self.alpha
            out[:, -1] = np.clip(x[:, -1], 0.0, None) ** (1 - a) / (1 - a)
        return out

    def hess(self, points) -> np.ndarray:
        x = self._rel(points)
        n = self.dim
        out = np.zeros((x.shape[0], n, n))
        if self.tag == "zero":
            return out
        if self.tag == "full_quadratic":
            out[:] = np.eye(n)
            return out
        out[:, :-1, :-1] = self.tangential_matrix
        if self.tag == "liouville":
            xn = x[:, -1]
            if np.any(xn <= 0):
                raise SingularEvaluationError("liouville Hessian is singular on {x_n = 0}")
            out[:, -1, -1] = xn ** (-self.alpha)
        return out

    def tangential_gradient(self, x0, normal) -> np.ndarray:
        """Gradient of phi projected onto the tangent plane with the given normal."""

        g = self.grad(np.asarray(x0, dtype = float)[None, :])[0]
        normal = np.asarray(normal, dtype = float)
        return g - (g @ normal) * normal


def liouville(alpha: float, dim: int = 2) -> BoundaryData:
    """The half-space solution U0 of det D^2 u = x_n^(-alpha)."""

    return BoundaryData(tag = "liouville", dim = dim, alpha = alpha)


####
##      SCALE FUNCTION
#####
@dataclass(frozen = True)
class ScaleFunction:
    """s(x) = s0 (1 + amplitude cos x_1), bounded by s0(1 -+ |amplitude|)."""

    s0: float = 1.0
    amplitude: float = 0.0

    def __post_init__(self):
        if self.s0 <= 0:
            raise ArgumentError("scale must be positive")
        if not abs(self.amplitude) < 1:
            raise ArgumentError("scale_amplitude must lie in (-1, 1)")

    @property
    def lower(self) -> float:
        return self.s0 * (1 - abs(self.amplitude))

    @property
    def upper(self) -> float:
        return self.s0 * (1 + abs(self.amplitude))

    @property
    def is_constant(self) -> bool:
        return self.amplitude == 0

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.is_constant:
            return np.full(points.shape[0], self.s0)
        return self.s0 * (1 + self.amplitude * np.cos(points[:, 0]))


####
##      PROBLEM SPECIFICATION
#####
@dataclass(frozen = True)
class ProblemSpec:
    """Dirichlet problem det D^2 u = s w^(-alpha), u = phi on the boundary."""

    domain: DomainSpec
    alpha: float
    weight: Weight = Weight.GRAPH
    scale: ScaleFunction = field(default_factory = ScaleFunction)
    phi: Optional[BoundaryData] = None
    mu: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise IllPosedError(f"alpha must be in (0,2), got {self.alpha}")
        object.__setattr__(self, "weight", Weight(self.weight))
        phi = self.phi or BoundaryData(tag = "half_quadratic", dim = self.domain.dim)
        if phi.dim != self.domain.dim:
            raise ArgumentError("boundary data and domain dimensions differ")
        object.__setattr__(self, "phi", phi)
        if self.mu is not None and self.mu <= 0:
            raise ArgumentError("mu must be positive")

    @property
    def dim(self) -> int:
        return self.domain.dim

    def check_boundary_data(self, count: int = 4096) -> bool:
        """
        phi is finite and continuous on dense boundary samples.
        Continuity is checked by comparing every sample with its nearest
        neighbor on the boundary; the interval boundary has two points
        and is only checked for finiteness.
        """

        samples = self.domain.sample_boundary(count)
        values = self.phi.eval(samples)
        if not np.all(np.isfinite(values)):
            return False
        if self.dim == 1:
            return True
        _, nbr = cKDTree(samples).query(samples, k = 2)
        jump = float(np.max(np.abs(values - values[nbr[:, 1]])))
        limit = JUMP_TOL * (1.0 + float(np.max(np.abs(values))))
        if jump > limit:
            logger.warning(f"boundary data jumps by {jump:.3e} between neighboring samples")
            return False
        return True


def make_boundary_data(tag: str, domain: DomainSpec, matrix: Optional[Sequence[float]] = None,
                       alpha: Optional[float] = None) -> BoundaryData:
    """Boundary data anchored at the base point of `domain`."""

    return BoundaryData(
        tag = tag, dim = domain.dim,
        matrix = tuple(matrix) if matrix is not None else None,
        alpha = alpha, origin = tuple(domain.base_point),
    )


# -- right-hand side ---------------------------------------------------

def weight_values(problem: ProblemSpec, points: np.ndarray) -> np.ndarray:
    """Distance-like weight w at interior points."""

    domain = problem.domain
    if problem.weight == Weight.DISTANCE:
        return domain.distance(points)
    if problem.weight == Weight.XN:
        return points[:, -1] - domain.base_point[-1]
    return points[:, -1] - domain.lower_graph(points[:, :-1])


def rhs_eval(problem: ProblemSpec, p, alpha: Optional[float] = None):
    """f(p) = s(p) w(p)^(-alpha) at strictly interior points."""

    pts, single = as_points(p, problem.dim)
    a = problem.alpha if alpha is None else alpha
    if not np.all(problem.domain.contains(pts)):
        raise SingularEvaluationError("right-hand side evaluated outside the open domain")
    try:
        w = weight_values(problem, pts)
    except DomainMembershipError as e:
        raise SingularEvaluationError(str(e)) from e
    if np.any(w <= 0):
        raise SingularEvaluationError("right-hand side weight vanishes at an evaluation point")
    values = problem.scale(pts) * w ** (-a)
    return float(values[0]) if single else values


def assemble_rhs(problem: ProblemSpec, grid: Grid, alpha: Optional[float] = None,
                 quadrature: RhsQuadrature = RhsQuadrature.NODE) -> np.ndarray:
    """
    Discrete right-hand side per node.
    `node` (the default) evaluates f at the nodes. `hat` averages f
    along the two e_n arms of each node against the kernel of the
    unequal-arm second difference, so that the one dimensional scheme
    reproduces u'' = f exactly at the nodes.
    """

    a = problem.alpha if alpha is None else alpha
    if RhsQuadrature(quadrature) == RhsQuadrature.NODE or a == 0:
        return rhs_eval(problem, grid.points, alpha = a)

    axis = grid.dim - 1
    up, down = grid.arms(axis)
    ends_up = grid.plus[:, axis] >= grid.size
    ends_down = grid.minus[:, axis] >= grid.size
    power = 2.0 / (2.0 - a)
    sigma, wq = leggauss(GAUSS_POINTS)
    sigma = 0.5 * (sigma + 1.0)
    wq = 0.5 * wq
    e_n = np.zeros(grid.dim)
    e_n[-1] = 1.0

    out = np.empty(grid.size)
    for start in range(0, grid.size, RHS_CHUNK):
        sl = slice(start, start + RHS_CHUNK)
        x = grid.points[sl]
        total = np.zeros(x.shape[0])
        for arm, graded, sign in ((up[sl], ends_up[sl], 1.0), (down[sl], ends_down[sl], -1.0)):
            # plain: s = arm * sigma; graded: s = arm * (1 - sigma^p)
            s_plain = arm[:, None] * sigma[None, :]
            s_grad = arm[:, None] * (1.0 - np.maximum(sigma[None, :] ** power, GRADED_FLOOR))
            s = np.where(graded[:, None], s_grad, s_plain)
            kernel = 1.0 - s / arm[:, None]
            jac = np.where(
                graded[:, None],
                arm[:, None] * power * sigma[None, :] ** (power - 1.0),
                arm[:, None],
            )
            pts = x[:, None, :] + sign * s[:, :, None] * e_n
            f = rhs_eval(problem, pts.reshape(-1, grid.dim), alpha = a).reshape(s.shape)
            total += np.sum(wq[None, :] * kernel * f * jac, axis = 1)
        out[sl] = 2.0 / (up[sl] + down[sl]) * total
    return out


# -- oracles -----------------------------------------------------------

####
##      ONE DIMENSIONAL SOLUTION
#####
@dataclass(frozen = True)
class OneDimensionalSolution(AnalyticFunction):
    """u(x) = p(x) + A x + B with p'' = x^(-alpha) and p(0) = 0."""

    alpha: float
    slope: float
    offset: float
    dim: int = 1

    @staticmethod
    def particular(alpha: float, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype = float)
        if alpha == 1:
            safe = np.where(x > 0, x, 1.0)
            return np.where(x > 0, x * np.log(safe), 0.0)
        return np.clip(x, 0.0, None) ** (2 - alpha) / ((2 - alpha) * (1 - alpha))

    def eval(self, points) -> np.ndarray:
        pts, _ = as_points(points, 1)
        x = pts[:, 0]
        return self.particular(self.alpha, x) + self.slope * x + self.offset

    def grad(self, points) -> np.ndarray:
        pts, _ = as_points(points, 1)
        x = pts[:, 0]
        if np.any(x <= 0):
            raise SingularEvaluationError("derivative evaluated at x <= 0")
        if self.alpha == 1:
            d = np.log(x) + 1.0
        else:
            d = x ** (1 - self.alpha) / (1 - self.alpha)
        return (d + self.slope)[:, None]

    def hess(self, points) -> np.ndarray:
        pts, _ = as_points(points, 1)
        x = pts[:, 0]
        if np.any(x <= 0):
            raise SingularEvaluationError("second derivative evaluated at x <= 0")
        return (x ** (-self.alpha))[:, None, None]


def solve_1d(alpha: float, interval: Tuple[float, float] = (0.0, 1.0),
             boundary_values: Tuple[float, float] = (0.0, 0.0)) -> OneDimensionalSolution:
    """Closed-form solution of u'' = x^(-alpha) on an interval of [0, inf)."""

    if not 0 < alpha < 2:
        raise IllPosedError(f"alpha must be in (0,2), got {alpha}")
    x0, x1 = map(float, interval)
    if not 0 <= x0 < x1:
        raise ArgumentError("interval must satisfy 0 <= x0 < x1")
    p0, p1 = OneDimensionalSolution.particular(alpha, np.array([x0, x1]))
    u0, u1 = map(float, boundary_values)
    slope = ((u1 - p1) - (u0 - p0)) / (x1 - x0)
    offset = u0 - p0 - slope * x0
    return OneDimensionalSolution(alpha = alpha, slope = slope, offset = offset)


####
##      RADIAL DISK SOLUTION
#####
@dataclass(frozen = True)
class RadialDiskSolution(AnalyticFunction):
    """
    Radially symmetric solution on a 2D disk of radius R with zero
    boundary data and f = s (R - r)^(-alpha).
    """

    domain: DomainSpec
    alpha: float
    s: float = 1.0
    dim: int = 2

    def __post_init__(self):
        if self.domain.kind != DomainKind.DISK or self.domain.dim != 2:
            raise GeometryError("the radial oracle needs a 2D disk")
        if not 0 < self.alpha < 2:
            raise IllPosedError(f"alpha must be in (0,2), got {self.alpha}")

    @property
    def radius(self) -> float:
        return self.domain.radius

    def _integral(self, r: np.ndarray) -> np.ndarray:
        """int_0^r rho (R - rho)^(-alpha) d rho."""

        R, a = self.radius, self.alpha
        r = np.asarray(r, dtype = float)
        q = np.clip(R - r, 1e-300, None)
        if a == 1:
            exact = R * (math.log(R) - np.log(q)) - (R - q)
        else:
            exact = R * (R ** (1 - a) - q ** (1 - a)) / (1 - a) - (R ** (2 - a) - q ** (2 - a)) / (2 - a)
        series = R ** (-a) * r ** 2 / 2 + a * R ** (-a - 1) * r ** 3 / 3
        return np.where(r < 1e-4 * R, series, exact)

    def slope(self, r) -> np.ndarray:
        """u'(r) >= 0."""

        return np.sqrt(2 * self.s * np.clip(self._integral(r), 0.0, None))

    def slope_over_r(self, r) -> np.ndarray:
        r = np.asarray(r, dtype = float)
        safe = np.where(r > 0, r, 1.0)
        limit = math.sqrt(self.s * self.radius ** (-self.alpha))
        return np.where(r > 0, self.slope(r) / safe, limit)

    def radial_value(self, r) -> np.ndarray:
        """u(r) = -int_r^R u'."""

        R = self.radius
        r = np.atleast_1d(np.asarray(r, dtype = float))
        out = np.empty(r.shape)
        for i, ri in enumerate(r):
            if ri >= R:
                out[i] = 0.0
                continue
            val, _ = quad(lambda t: float(self.slope(t)), ri, R, limit = 200)
            out[i] = -val
        return out

    def _radii(self, points) -> Tuple[np.ndarray, np.ndarray]:
        pts, _ = as_points(points, 2)
        rel = pts - np.array(self.domain.center)
        return rel, np.linalg.norm(rel, axis = -1)

    def eval(self, points) -> np.ndarray:
        _, r = self._radii(points)
        return self.radial_value(r)

    def grad(self, points) -> np.ndarray:
        rel, r = self._radii(points)
        return self.slope_over_r(r)[:, None] * rel

    def hess(self, points) -> np.ndarray:
        rel, r = self._radii(points)
        if np.any(r >= self.radius):
            raise SingularEvaluationError("radial Hessian is singular on the boundary")
        over = self.slope_over_r(r)
        u1 = self.slope(r)
        f = self.s * (self.radius - r) ** (-self.alpha)
        second = np.where(r > 0, r * f / np.where(u1 > 0, u1, 1.0), over)
        safe = np.where(r > 0, r, 1.0)
        unit = rel / safe[:, None]
        outer = unit[:, :, None] * unit[:, None, :]
        hess = second[:, None, None] * outer + over[:, None, None] * (np.eye(2) - outer)
        hess[r == 0] = np.eye(2) * over[r == 0, None, None]
        return hess

    def maximal_section(self, r0: float) -> Tuple[float, float, float]:
        """(h_bar, M, d) for y0 at distance R - r0 above the lowest boundary point."""

        u0 = float(self.radial_value(r0)[0])
        m = float(self.slope(np.array([r0]))[0])
        return -u0 - m * (self.radius - r0), m, self.radius - r0
