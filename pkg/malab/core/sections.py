"""
Section geometry.
malab.core.sections extracts sections S_h(x0) of discrete and analytic
convex functions and measures them: extents, centers of mass, John
ellipsoids, the normalized height b(h), the sliding and diagonal
normalizations and the maximal interior section through a point.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar
from scipy.spatial import ConvexHull, Delaunay, QhullError

from malab.core.domain import BoundaryFrame, DomainSpec, boundary_frame
from malab.core.grid import Grid
from malab.core.problem import AnalyticFunction
from malab.core.scheme import GridFunction, gradient
from malab.core.types import SlopeMethod
from malab.utils import get_logger
from malab.utils.exceptions import (
    ArgumentError, ConvexityViolationError, DomainMembershipError,
    GeometryError, RankError, StencilError
)

logger = get_logger("MALab.Sections")

MVEE_TOL = 1e-7
MVEE_MAX_ITER = 100_000
RESOLVED_NODES = 6
EXTRAPOLATION_NODES = 8

Function = Union[GridFunction, AnalyticFunction, Any]


####
##      ELLIPSOID
#####
@dataclass(frozen = True)
class Ellipsoid:
    """{x : (x - c)^T Q (x - c) <= 1} with Q symmetric positive definite."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        q = np.atleast_2d(np.asarray(self.shape, dtype = float))
        q = 0.5 * (q + q.T)
        if np.any(np.linalg.eigvalsh(q) <= 0):
            raise GeometryError("ellipsoid shape matrix must be positive definite")
        object.__setattr__(self, "center", np.asarray(self.center, dtype = float))
        object.__setattr__(self, "shape", q)

    @property
    def dim(self) -> int:
        return self.shape.shape[0]

    @property
    def axes(self) -> np.ndarray:
        """Semi-axis lengths, ascending."""

        return np.sort(1.0 / np.sqrt(np.linalg.eigvalsh(self.shape)))

    @property
    def volume(self) -> float:
        n = self.dim
        unit_ball = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
        return unit_ball / math.sqrt(np.linalg.det(self.shape))

    def gauge(self, points) -> np.ndarray:
        rel = np.atleast_2d(points) - self.center
        return np.einsum("ni,ij,nj->n", rel, self.shape, rel)

    def contains(self, points, slack: float = 1e-6) -> np.ndarray:
        return self.gauge(points) <= 1.0 + slack

    def dilated(self, factor: float) -> "Ellipsoid":
        """Same center, axes multiplied by `factor`."""

        return Ellipsoid(center = self.center, shape = self.shape / factor ** 2)


####
##      SLIDING TRANSFORM
#####
@dataclass(frozen = True)
class SlidingTransform:
    """A x = x - nu x_n with nu_n = 0."""

    nu: np.ndarray

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype = float)
        if nu[-1] != 0:
            raise ArgumentError("sliding vector must have zero normal component")
        object.__setattr__(self, "nu", nu)

    @property
    def matrix(self) -> np.ndarray:
        n = self.nu.size
        mat = np.eye(n)
        mat[:, -1] -= self.nu
        return mat

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.matrix))

    def apply(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype = float))
        return pts - pts[:, -1:] * self.nu

    def inverse(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype = float))
        return pts + pts[:, -1:] * self.nu

    def pullback(self, fn) -> "SlidFunction":
        """u o A^{-1}, whose sections are the images A S_h(u)."""

        return SlidFunction(base = fn, transform = self)


@dataclass(frozen = True)
class SlidFunction(AnalyticFunction):
    """fn(x + nu x_n)."""

    base: Any
    transform: SlidingTransform

    @property
    def dim(self) -> int:
        return self.transform.nu.size

    def eval(self, points) -> np.ndarray:
        return self.base.eval(self.transform.inverse(points))

    def grad(self, points) -> np.ndarray:
        inv = np.linalg.inv(self.transform.matrix)
        return self.base.grad(self.transform.inverse(points)) @ inv

    def hess(self, points) -> np.ndarray:
        inv = np.linalg.inv(self.transform.matrix)
        return np.einsum("ji,njk,kl->nil", inv, self.base.hess(self.transform.inverse(points)), inv)


####
##      DIAGONAL SCALING
#####
@dataclass(frozen = True)
class DiagonalScaling:
    """F_h = diag(h^(1/2), ..., h^(1/2), h^(1/(2 - alpha)))."""

    h: float
    alpha: float
    dim: int = 2

    def __post_init__(self):
        if self.h <= 0:
            raise ArgumentError("h must be positive")
        if not 0 < self.alpha < 2:
            raise ArgumentError("alpha must be in (0,2)")

    @property
    def factors(self) -> np.ndarray:
        f = np.full(self.dim, math.sqrt(self.h))
        f[-1] = self.h ** (1.0 / (2.0 - self.alpha))
        return f

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.factors)

    def apply(self, points) -> np.ndarray:
        return np.atleast_2d(np.asarray(points, dtype = float)) * self.factors

    def inverse(self, points) -> np.ndarray:
        return np.atleast_2d(np.asarray(points, dtype = float)) / self.factors


@dataclass(frozen = True)
class RescaledFunction(AnalyticFunction):
    """v(y) = fn(F y) / h."""

    base: Any
    scaling: DiagonalScaling
    domain: Optional[DomainSpec] = None

    @property
    def dim(self) -> int:
        return self.scaling.dim

    def _image(self, points) -> np.ndarray:
        x = self.scaling.apply(points)
        if self.domain is not None and np.any(self.domain.level(x) > 0):
            raise DomainMembershipError("rescaled evaluation leaves the domain")
        return x

    def eval(self, points) -> np.ndarray:
        return np.asarray(self.base.eval(self._image(points))) / self.scaling.h

    def grad(self, points) -> np.ndarray:
        return self.base.grad(self._image(points)) * self.scaling.factors / self.scaling.h

    def hess(self, points) -> np.ndarray:
        f = self.scaling.factors
        return self.base.hess(self._image(points)) * np.outer(f, f) / self.scaling.h


####
##      SECTION
#####
@dataclass(frozen = True)
class Section:
    """
    S_h(x0) = {u < u(x0) + p.(x - x0) + h}. Grid sections keep member
    node indices; analytic sections carry extents only.
    """

    base_point: np.ndarray
    height: float
    slope: np.ndarray
    value: float
    members: np.ndarray
    points: np.ndarray
    boundary_part: np.ndarray
    truncated: bool
    frame: BoundaryFrame
    normal_extent: float
    tangential_extent: float
    normal_step: float = 0.0
    grid: Optional[Grid] = field(default = None, repr = False)

    @property
    def size(self) -> int:
        return int(self.members.size)

    @property
    def resolved(self) -> bool:
        """At least six nodes across the normal extent (always true for analytic sections)."""

        if self.normal_step == 0:
            return True
        return self.normal_extent >= RESOLVED_NODES * self.normal_step

    def plane(self, points) -> np.ndarray:
        pts = np.atleast_2d(points)
        return self.value + (pts - self.base_point) @ self.slope

    def coordinates(self, points) -> Tuple[np.ndarray, np.ndarray]:
        return self.frame.coordinates(points)


# -- supporting plane ---------------------------------------------------

def _boundary_function(u: Function):
    fn = u.boundary if isinstance(u, GridFunction) else u
    if fn is None or not hasattr(fn, "grad"):
        raise GeometryError("boundary data must provide a gradient")
    return fn


def supporting_slope(u: GridFunction, x0, frame: Optional[BoundaryFrame] = None,
                     method: SlopeMethod = SlopeMethod.QUOTIENT, rho: Optional[float] = None,
                     alpha: Optional[float] = None) -> np.ndarray:
    """
    Gradient of the supporting plane of u at the boundary point x0:
    tangential part from the boundary data, normal part the largest slope
    keeping the plane below u on the nodes within rho of x0.
    """

    x0 = np.asarray(x0, dtype = float)
    frame = frame or boundary_frame(u.grid.domain, x0)
    rho = u.grid.domain.rho if rho is None else rho
    phi = _boundary_function(u)
    g_tau = frame.tangential_part(phi.grad(x0[None, :]))[0]
    base_value = float(np.asarray(phi.eval(x0[None, :]))[0])

    tang, t = frame.coordinates(u.grid.points)
    dist = np.linalg.norm(u.grid.points - x0, axis = -1)
    admissible = (dist <= rho) & (t > 0)
    if not np.any(admissible):
        raise GeometryError(f"no nodes within {rho} of {x0.tolist()} to support a plane")

    rel = u.grid.points - x0
    lifted = u.values - base_value - rel @ g_tau
    quotients = lifted[admissible] / t[admissible]
    slope = float(np.min(quotients))

    if SlopeMethod(method) == SlopeMethod.EXTRAPOLATED:
        a = u.alpha if alpha is None else alpha
        off_line = np.linalg.norm(tang, axis = -1)
        near = np.flatnonzero(admissible & (off_line <= 0.5 * np.min(u.grid.steps)))
        near = near[np.argsort(t[near], kind = "stable")][:EXTRAPOLATION_NODES]
        if a is not None and near.size >= 4:
            tt = t[near]
            shape = tt * np.log(tt) if a == 1 else tt ** (2.0 - a)
            design = np.column_stack([np.ones_like(tt), tt, shape, tt ** 2])
            coef, *_ = np.linalg.lstsq(design, lifted[near], rcond = None)
            slope = float(coef[1])
        else:
            logger.debug("too few nodes on the normal line; using the difference quotient")

    return g_tau + slope * frame.normal


# -- sections -----------------------------------------------------------

def section(u: Function, x0, h: float, frame: Optional[BoundaryFrame] = None,
            slope: Optional[np.ndarray] = None, value: Optional[float] = None,
            method: SlopeMethod = SlopeMethod.QUOTIENT, rho: Optional[float] = None) -> Section:
    """
    Section of u at x0 and height h. Interior grid nodes use the
    discrete gradient; boundary points use supporting_slope. Analytic
    functions (with eval/grad) take the analytic path.
    """

    if h <= 0:
        raise ArgumentError(f"section height must be positive, got {h}")
    x0 = np.asarray(x0, dtype = float)
    if not isinstance(u, GridFunction):
        return analytic_section(u, x0, h, frame = frame, slope = slope, value = value, rho = rho)

    grid = u.grid
    rho = grid.domain.rho if rho is None else rho
    node = None
    try:
        node = grid.locate(x0)
    except StencilError:
        pass

    if node is not None:
        frame = frame or BoundaryFrame.standard(grid.dim, x0)
        p = gradient(u, node) if slope is None else np.asarray(slope, dtype = float)
        u0 = float(u.values[node]) if value is None else value
    else:
        frame = frame or boundary_frame(grid.domain, x0)
        p = supporting_slope(u, x0, frame, method = method, rho = rho) if slope is None else np.asarray(slope, dtype = float)
        u0 = float(np.asarray(_boundary_function(u).eval(x0[None, :]))[0]) if value is None else value

    allp = grid.all_points
    gap = u.extended() - u0 - (allp - x0) @ p - h
    inside = gap[: grid.size] < 0
    members = np.flatnonzero(inside)

    # Crossings toward the first non-member along each axis
    crossings = []
    for j in range(grid.dim):
        for ext in (grid.plus[:, j], grid.minus[:, j]):
            nbr = ext[members]
            outside = (nbr >= grid.size) | ~inside[np.minimum(nbr, grid.size - 1)]
            if not np.any(outside):
                continue
            i = members[outside]
            k = nbr[outside]
            fi, fk = gap[i], gap[k]
            denom = np.where(fk > fi, fi - fk, -1.0)
            theta = np.where(fk >= 0, np.clip(fi / denom, 0.0, 1.0), 1.0)
            crossings.append(allp[i] + theta[:, None] * (allp[k] - allp[i]))

    extent_points = np.vstack([grid.points[members]] + crossings) if members.size else np.empty((0, grid.dim))
    tang, nor = frame.coordinates(extent_points)
    normal_extent = float(np.max(np.abs(nor))) if nor.size else 0.0
    tangential_extent = float(np.max(np.linalg.norm(tang, axis = -1))) if nor.size else 0.0

    adjacent = np.any(grid.plus[members] >= grid.size, axis = 1) | np.any(grid.minus[members] >= grid.size, axis = 1)
    truncated = normal_extent >= rho or tangential_extent >= rho
    normal_step = float(np.abs(grid.steps @ frame.normal)) if np.count_nonzero(frame.normal) == 1 else float(np.min(grid.steps))

    return Section(
        base_point = x0, height = float(h), slope = p, value = u0,
        members = members, points = grid.points[members],
        boundary_part = members[adjacent], truncated = bool(truncated), frame = frame,
        normal_extent = normal_extent, tangential_extent = tangential_extent,
        normal_step = normal_step, grid = grid,
    )


def analytic_section(fn, x0, h: float, frame: Optional[BoundaryFrame] = None,
                     slope: Optional[np.ndarray] = None, value: Optional[float] = None,
                     rho: Optional[float] = None, reach: float = 1e3) -> Section:
    """Extents of the section of a closed-form convex function."""

    x0 = np.asarray(x0, dtype = float)
    dim = x0.size
    frame = frame or BoundaryFrame.standard(dim, x0)
    p = np.asarray(fn.grad(x0[None, :])[0] if slope is None else slope, dtype = float)
    u0 = float(np.asarray(fn.eval(x0[None, :]))[0]) if value is None else value

    def gap(y: np.ndarray) -> float:
        return float(np.asarray(fn.eval(y[None, :]))[0] - u0 - (y - x0) @ p - h)

    tangents = frame.tangents

    def lowest_at_height(t: float) -> float:
        if tangents.shape[0] == 0:
            return gap(x0 + t * frame.normal)
        res = minimize(lambda c: gap(x0 + c @ tangents + t * frame.normal),
                       np.zeros(tangents.shape[0]), method = "Nelder-Mead",
                       options = {"xatol": 1e-12, "fatol": 1e-14 * max(h, 1e-300)})
        return float(min(res.fun, gap(x0 + t * frame.normal)))

    normal_extent = _sup_root(lowest_at_height, reach)

    tangential_extent = 0.0
    if tangents.shape[0]:
        e = tangents[0]

        def lowest_along(s: float) -> float:
            res = minimize_scalar(lambda t: gap(x0 + s * e + t * frame.normal),
                                  bounds = (0.0, max(normal_extent, 1e-300)), method = "bounded",
                                  options = {"xatol": 1e-14})
            return float(min(res.fun, gap(x0 + s * e)))

        tangential_extent = _sup_root(lowest_along, reach)

    rho_lim = math.inf if rho is None else rho
    return Section(
        base_point = x0, height = float(h), slope = p, value = u0,
        members = np.empty(0, dtype = int), points = np.empty((0, dim)),
        boundary_part = np.empty(0, dtype = int),
        truncated = bool(normal_extent >= rho_lim or tangential_extent >= rho_lim),
        frame = frame, normal_extent = normal_extent, tangential_extent = tangential_extent,
    )


def _sup_root(g, reach: float) -> float:
    """Largest s > 0 with g(s) < 0 for a convex-sublevel profile g (g(0) < 0)."""

    if g(0.0) >= 0:
        return 0.0
    hi = 1e-6
    while g(hi) < 0:
        hi *= 2.0
        if hi > reach:
            raise GeometryError("section is unbounded")
    lo = hi / 2.0 if hi > 1e-6 else 0.0
    return float(brentq(g, lo, hi, xtol = 1e-15, rtol = 1e-13, maxiter = 500))


def center_of_mass(sec: Section) -> np.ndarray:
    """Mean of the member nodes (uniform cells)."""

    if sec.size == 0:
        raise GeometryError("empty section has no center of mass")
    return np.mean(sec.points, axis = 0)


def hull_defect(sec: Section) -> int:
    """Grid nodes inside the convex hull of the members that are not members."""

    if sec.grid is None or sec.size <= sec.grid.dim:
        return 0
    try:
        tri = Delaunay(sec.points)
    except QhullError:
        return 0
    inside = tri.find_simplex(sec.grid.points, tol = 1e-12) >= 0
    inside[sec.members] = False
    return int(np.count_nonzero(inside))


# -- John ellipsoid -----------------------------------------------------

def john_ellipsoid(points, tol: float = MVEE_TOL, max_iter: int = MVEE_MAX_ITER) -> Ellipsoid:
    """Minimum-volume enclosing ellipsoid (Khachiyan iteration on the hull vertices)."""

    pts = np.atleast_2d(np.asarray(points, dtype = float))
    n = pts.shape[1]
    rank = int(np.linalg.matrix_rank(pts - pts.mean(axis = 0), tol = 1e-10 * max(1.0, np.ptp(pts))))
    if pts.shape[0] <= n or rank < n:
        raise RankError(f"points span an affine space of dimension {rank} < {n}", rank)
    if n > 1:
        pts = pts[ConvexHull(pts).vertices]
    else:
        pts = np.array([pts.min(axis = 0), pts.max(axis = 0)])

    m = pts.shape[0]
    lifted = np.vstack([pts.T, np.ones(m)])
    weights = np.full(m, 1.0 / m)
    for _ in range(int(max_iter)):
        x = lifted @ (weights[:, None] * lifted.T)
        gauge = np.einsum("im,ij,jm->m", lifted, np.linalg.inv(x), lifted)
        j = int(np.argmax(gauge))
        top = gauge[j]
        step = (top - n - 1.0) / ((n + 1.0) * (top - 1.0))
        updated = (1.0 - step) * weights
        updated[j] += step
        change = np.linalg.norm(updated - weights)
        weights = updated
        if change < tol:
            break

    center = pts.T @ weights
    cov = (pts.T * weights) @ pts - np.outer(center, center)
    shape = np.linalg.inv(cov) / n
    rel = pts - center
    worst = float(np.max(np.einsum("ni,ij,nj->n", rel, shape, rel)))
    if worst > 1.0:
        shape = shape / worst
    return Ellipsoid(center = center, shape = shape)


def john_containment(ellipsoid: Ellipsoid, points, slack: float = 1e-3) -> bool:
    """The n-fold shrink of the ellipsoid about its center lies in the hull of `points`."""

    pts = np.atleast_2d(np.asarray(points, dtype = float))
    n = ellipsoid.dim
    shrunk = ellipsoid.dilated(1.0 / n)
    if n == 1:
        r = 1.0 / math.sqrt(shrunk.shape[0, 0])
        c = float(shrunk.center[0])
        return bool(c - r >= pts.min() - slack and c + r <= pts.max() + slack)
    hull = ConvexHull(pts)
    inv = np.linalg.inv(shrunk.shape)
    normals, offsets = hull.equations[:, :-1], hull.equations[:, -1]
    support = normals @ shrunk.center + np.sqrt(np.einsum("fi,ij,fj->f", normals, inv, normals))
    scale = max(1.0, float(np.ptp(pts)))
    return bool(np.all(support + offsets <= slack * scale))


# -- normalized heights and pinches -------------------------------------

@dataclass(frozen = True)
class FlaggedValue:
    """A measured value and whether the section behind it was truncated."""

    value: float
    truncated: bool = False

    def __float__(self) -> float:
        return self.value


def b_of_h(u: Function, h: float, x0 = None, alpha: Optional[float] = None, **kwargs) -> FlaggedValue:
    """
    b(h) = h^(-1/(2-alpha)) times the normal extent of S_h(x0).
    On a grid the extent is interpolated: it covers the member nodes and
    the linear crossings toward the first non-member along each axis, so
    it can exceed the largest member x_n by up to one step.
    """

    a = alpha if alpha is not None else getattr(u, "alpha", None)
    if a is None:
        raise ArgumentError("alpha is required for b(h)")
    if x0 is None:
        dim = u.grid.dim if isinstance(u, GridFunction) else u.dim
        x0 = u.grid.domain.base_point if isinstance(u, GridFunction) else np.zeros(dim)
    sec = section(u, x0, h, **kwargs)
    return FlaggedValue(sec.normal_extent * h ** (-1.0 / (2.0 - a)), sec.truncated)


def sliding_normalize(sec: Section) -> Tuple[SlidingTransform, Section]:
    """Shear making the center of mass lie on the normal axis through x0."""

    star = center_of_mass(sec)
    tang, nor = sec.frame.coordinates(star[None, :])
    d_h = float(nor[0])
    if d_h <= 0:
        raise GeometryError("section center of mass has no positive normal height")
    nu = np.append(tang[0] / d_h, 0.0)
    transform = SlidingTransform(nu)

    tang_all, nor_all = sec.frame.coordinates(sec.points)
    local = transform.apply(np.column_stack([tang_all, nor_all]))
    moved = sec.base_point + local[:, :-1] @ sec.frame.tangents + local[:, -1:] * sec.frame.normal
    tangential_extent = float(np.max(np.linalg.norm(local[:, :-1], axis = -1))) if local.size else 0.0
    shifted = Section(
        base_point = sec.base_point, height = sec.height, slope = sec.slope, value = sec.value,
        members = sec.members, points = moved, boundary_part = sec.boundary_part,
        truncated = sec.truncated, frame = sec.frame, normal_extent = sec.normal_extent,
        tangential_extent = tangential_extent, normal_step = sec.normal_step, grid = None,
    )
    return transform, shifted


def diagonal_rescale(u: Function, h: float, alpha: float, domain: Optional[DomainSpec] = None):
    """v(x) = u(F_h x) / h for grid functions (on the rescaled grid) or analytic functions."""

    if isinstance(u, GridFunction):
        scaling = DiagonalScaling(h, alpha, u.grid.dim)
        boundary = RescaledFunction(u.boundary, scaling) if u.boundary is not None else None
        return GridFunction(
            grid = u.grid.rescaled(scaling.factors), values = u.values / h, trace = u.trace / h,
            alpha = u.alpha, boundary = boundary,
        )
    scaling = DiagonalScaling(h, alpha, u.dim)
    return RescaledFunction(u, scaling, domain)


def liouville_gauge(y: np.ndarray, h: float, alpha: float) -> np.ndarray:
    """Gauge of S_h(U0) at points y given in (tangential, normal) coordinates."""

    if not 0 < alpha < 1:
        raise ArgumentError("U0 sections need alpha in (0, 1)")
    y = np.atleast_2d(y)
    tang2 = np.sum(y[:, :-1] ** 2, axis = -1)
    tn = np.abs(y[:, -1])
    c = 1.0 / ((2 - alpha) * (1 - alpha))

    def level(lam):
        return 0.5 * tang2 / lam ** 2 + c * (tn / lam) ** (2 - alpha) - h

    lo = np.full(y.shape[0], 1e-12)
    hi = np.ones(y.shape[0])
    for _ in range(200):
        grow = level(hi) >= 0
        if not np.any(grow):
            break
        hi[grow] *= 2.0
    for _ in range(100):
        mid = np.sqrt(lo * hi)
        above = level(mid) >= 0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    out = hi
    out[(tang2 == 0) & (tn == 0)] = 0.0
    return out


def pinch_eta(sec: Section, alpha: float) -> float:
    """
    Smallest eta with (1 - eta) S_h(U0) cap grid inside S_h(u) and
    S_h(u) inside (1 + eta) S_h(U0), both centered at x0.
    """

    if sec.grid is None or sec.size == 0:
        raise GeometryError("pinch needs a grid section with members")
    tang, nor = sec.frame.coordinates(sec.grid.points)
    y = np.column_stack([tang, nor])
    gauge = liouville_gauge(y, sec.height, alpha)
    member = np.zeros(sec.grid.size, dtype = bool)
    member[sec.members] = True
    outer = float(np.max(gauge[member])) - 1.0
    inner = 1.0 - float(np.min(gauge[~member])) if np.any(~member) else 0.0
    return max(outer, inner, 0.0)


def sandwich_constant(sec: Section, alpha: float) -> float:
    """K with members inside E < K h and nodes with E < h / K all members."""

    if sec.grid is None or sec.size == 0:
        raise GeometryError("sandwich constant needs a grid section with members")
    tang, nor = sec.frame.coordinates(sec.grid.points)
    energy = np.sum(tang ** 2, axis = -1) + np.abs(nor) ** (2.0 - alpha)
    member = np.zeros(sec.grid.size, dtype = bool)
    member[sec.members] = True
    outer = float(np.max(energy[member])) / sec.height
    inner = sec.height / float(np.min(energy[~member])) if np.any(~member) else 1.0
    return max(outer, inner, 1.0)


def volume_ratio(sec: Section, alpha: float) -> float:
    """d_h^(-alpha) |S_h|^2 / h^n."""

    if sec.grid is None:
        raise GeometryError("volume ratio needs a grid section")
    star = center_of_mass(sec)
    _, nor = sec.frame.coordinates(star[None, :])
    d_h = float(nor[0])
    volume = sec.size * sec.grid.cell_volume
    return d_h ** (-alpha) * volume ** 2 / sec.height ** sec.grid.dim


# -- maximal interior sections -------------------------------------------

@dataclass(frozen = True)
class MaximalSection:
    """Largest section S_h(y0) inside the domain and where it touches the boundary."""

    interior_point: np.ndarray
    height: float
    tangency: np.ndarray
    normal_slope: float
    gradient: np.ndarray
    normal: np.ndarray


def maximal_interior_section(u: Function, y0, domain: Optional[DomainSpec] = None,
                             samples: int = 4096) -> MaximalSection:
    """
    h_bar = min over the boundary of phi(z) - u(y0) - p.(z - y0) with
    p = grad u(y0); the argmin is the tangency point and M = -p.nu there.
    """

    y0 = np.asarray(y0, dtype = float)
    if isinstance(u, GridFunction):
        domain = domain or u.grid.domain
        node = u.grid.locate(y0)
        u0 = float(u.values[node])
        p = gradient(u, node)
        phi = u.boundary
    else:
        if domain is None:
            raise ArgumentError("analytic functions need a domain for maximal sections")
        u0 = float(np.asarray(u.eval(y0[None, :]))[0])
        p = np.asarray(u.grad(y0[None, :])[0], dtype = float)
        phi = u
    if phi is None:
        raise GeometryError("boundary data is required for maximal sections")

    def lift(z: np.ndarray) -> np.ndarray:
        z = np.atleast_2d(z)
        return np.asarray(phi.eval(z)) - u0 - (z - y0) @ p

    z = domain.sample_boundary(samples)
    gaps = lift(z)
    j = int(np.argmin(gaps))
    best, x0 = float(gaps[j]), z[j]

    chart = domain.boundary_chart(x0)
    if chart is not None:
        s0, curve, width = chart
        res = minimize_scalar(lambda s: float(lift(curve(s))[0]), bounds = (s0 - width, s0 + width),
                              method = "bounded", options = {"xatol": 1e-12})
        if res.fun < best:
            best, x0 = float(res.fun), curve(res.x)

    if best < 0:
        raise ConvexityViolationError(
            f"maximal section height is negative ({best:.3e}) at y0={y0.tolist()}"
        )
    frame = boundary_frame(domain, x0, tol = 1e-6)
    return MaximalSection(
        interior_point = y0, height = best, tangency = x0,
        normal_slope = float(-p @ frame.normal), gradient = p, normal = frame.normal,
    )
