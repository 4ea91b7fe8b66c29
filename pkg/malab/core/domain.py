"""
Convex domains.
malab.core.domain describes the bounded convex domains the laboratory
solves on: their lower boundary graph x_n = g(x'), level function,
distance to the boundary, inner normals and tangent frames. Grids live
in `malab.core.grid`.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.stats import qmc

from malab.core.types import DomainKind
from malab.utils import get_logger
from malab.utils.exceptions import (
    ArgumentError, DomainMembershipError, GeometryError, ToleranceError
)

logger = get_logger("MALab.Domain")

# Membership slack (relative to the domain scale) for "closed domain" tests
CLOSED_TOL = 1e-12
DENSE_SAMPLES = 2 ** 12
NEWTON_TOL = 1e-12


def halton(count: int, dim: int) -> np.ndarray:
    """Deterministic low-discrepancy points in [0, 1)^dim (origin skipped)."""

    sampler = qmc.Halton(d = dim, scramble = False)
    sampler.fast_forward(1)
    return sampler.random(count)


def as_points(p, dim: int) -> Tuple[np.ndarray, bool]:
    """Returns an (N, dim) array and whether the input was a single point."""

    arr = np.asarray(p, dtype = float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[-1] != dim:
        raise ArgumentError(f"expected points of dimension {dim}, got shape {arr.shape}")
    return arr, single


####
##      BOUNDARY GRAPH
#####
@dataclass(frozen = True)
class BoundaryGraph:
    """
    Radially symmetric lower boundary x_n = g(x') = gamma(|x'|).
    `profile` selects the closed form: an even polynomial with
    nonnegative coefficients, a circular arc of radius `radius`, or an
    elliptic arc with tangential semi-axis `a` and normal semi-axis `b`.
    """

    profile: str = "polynomial"
    coefficients: Tuple[float, ...] = ()
    radius: float = 1.0
    a: float = 1.0
    b: float = 1.0

    @property
    def max_radius(self) -> float:
        """Largest |x'| on which the profile is defined."""

        if self.profile == "disk":
            return self.radius
        if self.profile == "ellipse":
            return self.a
        return math.inf

    @property
    def is_flat(self) -> bool:
        return self.profile == "polynomial" and not any(self.coefficients)

    def gamma(self, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Returns gamma, gamma', gamma'' and gamma'/r at radii r >= 0."""

        r = np.asarray(r, dtype = float)
        if self.profile == "polynomial":
            g = np.zeros_like(r)
            g1 = np.zeros_like(r)
            g2 = np.zeros_like(r)
            g1r = np.zeros_like(r)
            for k, c in enumerate(self.coefficients, start = 1):
                g = g + c * r ** (2 * k)
                g1 = g1 + 2 * k * c * r ** (2 * k - 1)
                g2 = g2 + 2 * k * (2 * k - 1) * c * r ** (2 * k - 2)
                g1r = g1r + 2 * k * c * r ** (2 * k - 2)
            return g, g1, g2, g1r

        if self.profile == "disk":
            a = b = self.radius
        else:
            a, b = self.a, self.b
        s = np.clip(1.0 - (r / a) ** 2, 0.0, None)
        if np.any(s <= 0.0):
            raise DomainMembershipError("boundary graph evaluated beyond its base")
        root = np.sqrt(s)
        g = b - b * root
        g1r = (b / a ** 2) / root
        g1 = g1r * r
        g2 = (b / a ** 2) * s ** -1.5
        return g, g1, g2, g1r

    def value(self, xp: np.ndarray) -> np.ndarray:
        """g(x') for an (N, n-1) array of tangential coordinates."""

        r = np.linalg.norm(np.atleast_2d(xp), axis = -1)
        return self.gamma(r)[0]

    def gradient(self, xp: np.ndarray) -> np.ndarray:
        """Gradient of g, shape (N, n-1)."""

        xp = np.atleast_2d(np.asarray(xp, dtype = float))
        r = np.linalg.norm(xp, axis = -1)
        _, _, _, g1r = self.gamma(r)
        return g1r[:, None] * xp

    def hessian(self, xp: np.ndarray) -> np.ndarray:
        """D^2 g = gamma'' xx^T + (gamma'/r)(I - xx^T), shape (N, n-1, n-1)."""

        xp = np.atleast_2d(np.asarray(xp, dtype = float))
        m = xp.shape[-1]
        r = np.linalg.norm(xp, axis = -1)
        _, _, g2, g1r = self.gamma(r)
        safe = np.where(r > 0.0, r, 1.0)
        unit = xp / safe[:, None]
        outer = unit[:, :, None] * unit[:, None, :]
        eye = np.broadcast_to(np.eye(m), outer.shape)
        hess = g2[:, None, None] * outer + g1r[:, None, None] * (eye - outer)
        at_origin = r == 0.0
        if np.any(at_origin):
            hess[at_origin] = g2[at_origin, None, None] * np.eye(m)
        return hess


####
##      DOMAIN SPECIFICATION
#####
@dataclass(frozen = True)
class DomainSpec:
    """
    Bounded convex domain.

    disk      center, radius (a ball in 3D)
    ellipse   center, axes = (a, b), 2D and axis aligned
    graph     {g(x') < x_n < height, |x'| < base_radius} with the even
              polynomial g(r) = sum c_k r^(2k) from `coefficients`
    interval  (0, length), dim 1

    `rho` is the neighborhood scale: interior balls of radius rho touch
    the lower boundary and sections are truncated at distance rho.
    """

    kind: DomainKind
    dim: int = 2
    rho: float = 0.5
    center: Tuple[float, ...] = ()
    radius: float = 1.0
    axes: Tuple[float, ...] = (1.0, 1.0)
    coefficients: Tuple[float, ...] = ()
    height: float = 1.0
    base_radius: float = 1.0
    length: float = 1.0
    graph: BoundaryGraph = field(init = False, repr = False, compare = False)

    def __post_init__(self):
        kind = DomainKind(self.kind)
        object.__setattr__(self, "kind", kind)

        if self.rho <= 0:
            raise ArgumentError("rho must be positive")

        expected = {
            DomainKind.DISK: (2, 3),
            DomainKind.ELLIPSE: (2,),
            DomainKind.GRAPH: (2, 3),
            DomainKind.INTERVAL: (1,),
        }[kind]
        if self.dim not in expected:
            raise ArgumentError(f"{kind.value} domains support dim in {expected}, got {self.dim}")

        if kind in (DomainKind.DISK, DomainKind.ELLIPSE):
            center = tuple(float(c) for c in self.center) or (0.0,) * self.dim
            if len(center) != self.dim:
                raise ArgumentError("center must have one coordinate per dimension")
            object.__setattr__(self, "center", center)

        if kind == DomainKind.DISK:
            if self.radius <= 0:
                raise ArgumentError("radius must be positive")
            graph = BoundaryGraph(profile = "disk", radius = self.radius)
        elif kind == DomainKind.ELLIPSE:
            if len(self.axes) != 2 or min(self.axes) <= 0:
                raise ArgumentError("ellipse axes must be two positive numbers")
            graph = BoundaryGraph(profile = "ellipse", a = self.axes[0], b = self.axes[1])
        elif kind == DomainKind.GRAPH:
            if any(c < 0 for c in self.coefficients):
                raise GeometryError("graph coefficients must be nonnegative (convex g)")
            if self.height <= 0 or self.base_radius <= 0:
                raise ArgumentError("height and base_radius must be positive")
            graph = BoundaryGraph(coefficients = tuple(float(c) for c in self.coefficients))
        else:
            if self.length <= 0:
                raise ArgumentError("length must be positive")
            graph = BoundaryGraph()
        object.__setattr__(self, "graph", graph)

    # ------------------------------------------------------------------
    # Geometry helpers
    # ------------------------------------------------------------------
    @property
    def base_point(self) -> np.ndarray:
        """Lowest boundary point; the lower graph has g = 0 and grad g = 0 there."""

        if self.kind == DomainKind.DISK:
            base = np.array(self.center)
            base[-1] -= self.radius
            return base
        if self.kind == DomainKind.ELLIPSE:
            base = np.array(self.center)
            base[-1] -= self.axes[1]
            return base
        return np.zeros(self.dim)

    @property
    def scale(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.max(hi - lo))

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.kind == DomainKind.DISK:
            c = np.array(self.center)
            return c - self.radius, c + self.radius
        if self.kind == DomainKind.ELLIPSE:
            c, ax = np.array(self.center), np.array(self.axes)
            return c - ax, c + ax
        if self.kind == DomainKind.GRAPH:
            lo = np.full(self.dim, -self.base_radius)
            hi = np.full(self.dim, self.base_radius)
            lo[-1], hi[-1] = 0.0, self.height
            return lo, hi
        return np.zeros(1), np.array([self.length])

    def lower_graph(self, xp: np.ndarray) -> np.ndarray:
        """x_n coordinate of the lower boundary above the tangential point x'."""

        xp = np.atleast_2d(np.asarray(xp, dtype = float))
        base = self.base_point
        return base[-1] + self.graph.value(xp - base[:-1])

    def level(self, points) -> np.ndarray:
        """Convex level function, negative exactly inside the domain."""

        pts, _ = as_points(points, self.dim)
        if self.kind == DomainKind.DISK:
            c = np.array(self.center)
            return np.linalg.norm(pts - c, axis = -1) - self.radius
        if self.kind == DomainKind.ELLIPSE:
            q = (pts - np.array(self.center)) / np.array(self.axes)
            return np.sum(q ** 2, axis = -1) - 1.0
        if self.kind == DomainKind.GRAPH:
            xp, xn = pts[:, :-1], pts[:, -1]
            r = np.linalg.norm(xp, axis = -1)
            g = self.graph.gamma(r)[0]
            return np.maximum.reduce([g - xn, xn - self.height, r - self.base_radius])
        x = pts[:, 0]
        return np.maximum(-x, x - self.length)

    def contains(self, points) -> np.ndarray:
        return self.level(points) < 0.0

    # ------------------------------------------------------------------
    # Distance
    # ------------------------------------------------------------------
    def distance(self, points) -> np.ndarray:
        """Vectorized distance to the boundary for points of the closed domain."""

        pts, _ = as_points(points, self.dim)
        outside = self.level(pts) > CLOSED_TOL * max(self.scale, 1.0)
        if np.any(outside):
            bad = pts[np.argmax(outside)]
            raise DomainMembershipError(f"point {bad.tolist()} lies outside the domain")

        if self.kind == DomainKind.DISK:
            d = self.radius - np.linalg.norm(pts - np.array(self.center), axis = -1)
        elif self.kind == DomainKind.ELLIPSE:
            d = _ellipse_distance(pts - np.array(self.center), *self.axes)
        elif self.kind == DomainKind.GRAPH:
            xp, xn = pts[:, :-1], pts[:, -1]
            r = np.linalg.norm(xp, axis = -1)
            d_graph = _radial_graph_distance(self.graph, r, xn)
            d = np.minimum.reduce([d_graph, self.height - xn, self.base_radius - r])
        else:
            x = pts[:, 0]
            d = np.minimum(x, self.length - x)
        return np.clip(d, 0.0, None)

    def outside_gap(self, points) -> np.ndarray:
        """How far points sit outside the domain (<= 0 inside), in length units."""

        pts, _ = as_points(points, self.dim)
        if self.kind == DomainKind.ELLIPSE:
            lev = self.level(pts)
            return (np.sqrt(np.clip(lev + 1.0, 0.0, None)) - 1.0) * min(self.axes)
        return self.level(pts)

    # ------------------------------------------------------------------
    # Sampling
    # ------------------------------------------------------------------
    def sample_interior(self, count: int) -> np.ndarray:
        """Deterministic interior samples (Halton points of the bounding box)."""

        lo, hi = self.bounding_box()
        found = np.empty((0, self.dim))
        draw = count
        while found.shape[0] < count and draw < 64 * count + 64:
            raw = lo + (hi - lo) * halton(draw, self.dim)
            found = raw[self.contains(raw)]
            draw *= 2
        return found[:count]

    def sample_boundary(self, count: int) -> np.ndarray:
        """Deterministic samples covering the whole boundary."""

        if self.kind == DomainKind.INTERVAL:
            return np.array([[0.0], [self.length]])

        if self.kind in (DomainKind.DISK, DomainKind.ELLIPSE):
            c = np.array(self.center)
            if self.dim == 2:
                theta = 2 * np.pi * np.arange(count) / count
                ax = np.array(self.axes) if self.kind == DomainKind.ELLIPSE else np.array([self.radius] * 2)
                return c + np.stack([ax[0] * np.cos(theta), ax[1] * np.sin(theta)], axis = -1)
            u = halton(count, 2)
            z = 2 * u[:, 0] - 1
            phi = 2 * np.pi * u[:, 1]
            s = np.sqrt(1 - z ** 2)
            return c + self.radius * np.stack([s * np.cos(phi), s * np.sin(phi), z], axis = -1)

        # Graph kind: lower graph, top lid and side wall
        m = self.dim - 1
        n_low = count // 2
        n_top = count // 4
        n_side = count - n_low - n_top
        if m == 1:
            xs = np.linspace(-self.base_radius, self.base_radius, n_low + 2)[1:-1, None]
            top = np.linspace(-self.base_radius, self.base_radius, n_top + 2)[1:-1, None]
        else:
            xs = _disk_halton(n_low, self.base_radius)
            top = _disk_halton(n_top, self.base_radius)
        lower = np.column_stack([xs, self.graph.value(xs)])
        lower = lower[lower[:, -1] <= self.height]
        top = top[self.graph.value(top) < self.height]
        lid = np.column_stack([top, np.full(top.shape[0], self.height)])
        g_edge = float(self.graph.gamma(np.array([self.base_radius]))[0][0])
        heights = g_edge + (self.height - g_edge) * (np.arange(n_side) + 0.5) / max(n_side, 1)
        if m == 1:
            sign = np.where(np.arange(n_side) % 2 == 0, 1.0, -1.0)
            side = np.column_stack([sign * self.base_radius, heights])
        else:
            ang = 2 * np.pi * halton(n_side, 1)[:, 0]
            side = np.column_stack([
                self.base_radius * np.cos(ang), self.base_radius * np.sin(ang), heights
            ])
        if g_edge >= self.height:
            side = side[:0]
        return np.vstack([lower, lid, side])

    def boundary_chart(self, z: np.ndarray) -> Optional[Tuple[float, Callable[[float], np.ndarray], float]]:
        """
        Local 2D parametrization of the boundary piece through z: returns
        (parameter of z, parameter -> point, natural step) or None in 3D.
        """

        if self.dim != 2:
            return None
        z = np.asarray(z, dtype = float)
        if self.kind in (DomainKind.DISK, DomainKind.ELLIPSE):
            c = np.array(self.center)
            ax = np.array(self.axes) if self.kind == DomainKind.ELLIPSE else np.array([self.radius] * 2)
            q = (z - c) / ax
            theta0 = math.atan2(q[1], q[0])

            def curve(theta: float) -> np.ndarray:
                return c + ax * np.array([math.cos(theta), math.sin(theta)])

            return theta0, curve, 2 * np.pi / 512
        if self.kind == DomainKind.GRAPH and abs(z[1] - self.lower_graph(z[:1])[0]) <= 1e-9:
            graph = self.graph

            def curve(s: float) -> np.ndarray:
                return np.array([s, float(graph.value(np.array([[s]]))[0])])

            return float(z[0]), curve, self.base_radius / 256
        return None

    # ------------------------------------------------------------------
    # Invariant checks (sampled)
    # ------------------------------------------------------------------
    def check_convexity(self, pairs: int = 10_000) -> bool:
        """Midpoint convexity on deterministic member pairs."""

        pts = self.sample_interior(2 * pairs)
        half = pts.shape[0] // 2
        mid = 0.5 * (pts[:half] + pts[half:2 * half])
        return bool(np.all(self.contains(mid)))

    def check_interior_ball(self, count: int = 256) -> float:
        """
        Worst ratio dist(x0 + rho nu, boundary)/rho over lower-boundary
        samples of height <= rho whose ball stays within the base.
        """

        if self.kind == DomainKind.INTERVAL:
            return float(min(self.length / 2, self.rho) / self.rho)
        base = self.base_point
        reach = self.graph.max_radius
        limit = min(reach, self.base_radius if self.kind == DomainKind.GRAPH else reach) - self.rho
        if limit <= 0:
            raise GeometryError("rho exceeds the lateral size of the domain")
        m = self.dim - 1
        if m == 1:
            xp = np.linspace(-limit, limit, count)[:, None]
        else:
            xp = _disk_halton(count, limit)
        x0 = np.column_stack([xp + base[:-1], self.lower_graph(xp + base[:-1])])
        x0 = x0[x0[:, -1] - base[-1] <= self.rho]
        grad = self.graph.gradient(xp[: x0.shape[0]])
        normal = np.column_stack([-grad, np.ones(grad.shape[0])])
        normal /= np.linalg.norm(normal, axis = -1, keepdims = True)
        centers = x0 + self.rho * normal
        inside = self.contains(centers)
        if not np.all(inside):
            return 0.0
        return float(np.min(self.distance(centers)) / self.rho)

    def check_distance_ratio(self, count: int = 4096) -> Tuple[float, float]:
        """Sampled range of (x_n - g(x'))/d in {x_n - base_n <= rho/2}."""

        pts = self.sample_interior(count)
        base = self.base_point
        pts = pts[pts[:, -1] - base[-1] <= self.rho / 2]
        pts = pts[np.linalg.norm(pts[:, :-1] - base[:-1], axis = -1) < 0.999 * self.graph.max_radius]
        if pts.shape[0] == 0:
            raise GeometryError("no samples in the boundary strip")
        vertical = pts[:, -1] - self.lower_graph(pts[:, :-1])
        ratio = vertical / self.distance(pts)
        return float(np.min(ratio)), float(np.max(ratio))


####
##      BOUNDARY FRAME
#####
@dataclass(frozen = True)
class BoundaryFrame:
    """Orthonormal frame at a boundary point: inner normal plus tangents (rows)."""

    base_point: np.ndarray
    normal: np.ndarray
    tangents: np.ndarray

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype = float)
        tangents = np.atleast_2d(np.asarray(self.tangents, dtype = float)).reshape(-1, normal.size)
        basis = np.vstack([tangents, normal])
        if not np.allclose(basis @ basis.T, np.eye(normal.size), atol = 1e-10):
            raise GeometryError("frame is not orthonormal")
        object.__setattr__(self, "base_point", np.asarray(self.base_point, dtype = float))
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "tangents", tangents)

    @classmethod
    def standard(cls, dim: int, base_point = None) -> "BoundaryFrame":
        """Frame at the origin of the half space {x_n > 0}."""

        base = np.zeros(dim) if base_point is None else np.asarray(base_point, dtype = float)
        eye = np.eye(dim)
        return cls(base_point = base, normal = eye[-1], tangents = eye[:-1])

    def coordinates(self, points) -> Tuple[np.ndarray, np.ndarray]:
        """Tangential coordinates (N, n-1) and normal coordinate (N,) of x - x0."""

        rel = np.atleast_2d(np.asarray(points, dtype = float)) - self.base_point
        return rel @ self.tangents.T, rel @ self.normal

    def tangential_part(self, points) -> np.ndarray:
        """(x - x0)_tau in ambient coordinates."""

        tang, _ = self.coordinates(points)
        return tang @ self.tangents

    def reconstruct(self, points) -> np.ndarray:
        tang, nor = self.coordinates(points)
        return tang @ self.tangents + nor[:, None] * self.normal


def tangent_basis(normal: np.ndarray) -> np.ndarray:
    """Orthonormal tangents: projections of the coordinate axes least aligned with the normal."""

    n = normal.size
    if n == 1:
        return np.zeros((0, 1))
    order = np.argsort(np.abs(normal), kind = "stable")[: n - 1]
    order = np.sort(order)
    proj = np.eye(n)[:, order] - np.outer(normal, normal[order])
    q, r = np.linalg.qr(proj)
    q = q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))
    return q.T


# -- operations --------------------------------------------------------

def distance_to_boundary(domain: DomainSpec, p):
    """Euclidean distance from a point (or an (N, dim) array) of the closed domain to its boundary."""

    pts, single = as_points(p, domain.dim)
    d = domain.distance(pts)
    return float(d[0]) if single else d


def boundary_frame(domain: DomainSpec, x0, tol: float = 1e-9) -> BoundaryFrame:
    """Inner normal and tangent frame at a boundary point."""

    x0 = np.asarray(x0, dtype = float).reshape(domain.dim)
    scale = max(domain.scale, 1.0)
    gap = float(domain.outside_gap(x0)[0])
    if gap > tol * scale:
        raise ToleranceError(f"{x0.tolist()} is outside the domain by {gap:.3e}")
    if gap < 0 and float(domain.distance(x0)[0]) > tol * scale:
        raise ToleranceError(f"{x0.tolist()} is not on the boundary")

    if domain.kind == DomainKind.DISK:
        normal = np.array(domain.center) - x0
    elif domain.kind == DomainKind.ELLIPSE:
        normal = -(x0 - np.array(domain.center)) / np.array(domain.axes) ** 2
    elif domain.kind == DomainKind.INTERVAL:
        normal = np.array([1.0 if x0[0] < domain.length / 2 else -1.0])
    else:
        xp, xn = x0[:-1], x0[-1]
        r = float(np.linalg.norm(xp))
        g = float(domain.graph.value(xp[None, :])[0])
        if abs(xn - g) <= tol * scale:
            grad = domain.graph.gradient(xp[None, :])[0]
            normal = np.append(-grad, 1.0)
        elif abs(xn - domain.height) <= tol * scale:
            normal = np.zeros(domain.dim)
            normal[-1] = -1.0
        else:
            normal = np.append(-xp / max(r, 1e-300), 0.0)

    normal = normal / np.linalg.norm(normal)
    return BoundaryFrame(base_point = x0, normal = normal, tangents = tangent_basis(normal))


# -- internals ---------------------------------------------------------

def _disk_halton(count: int, radius: float) -> np.ndarray:
    u = halton(count, 2)
    r = radius * np.sqrt(u[:, 0])
    phi = 2 * np.pi * u[:, 1]
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def _ellipse_distance(q: np.ndarray, a: float, b: float, chunk: int = 1024) -> np.ndarray:
    """Distance from points q (centered) to the ellipse boundary: dense seed then Newton."""

    theta_grid = 2 * np.pi * np.arange(DENSE_SAMPLES) / DENSE_SAMPLES
    ca, sb = a * np.cos(theta_grid), b * np.sin(theta_grid)
    out = np.empty(q.shape[0])
    for start in range(0, q.shape[0], chunk):
        block = q[start:start + chunk]
        d2 = (ca[None, :] - block[:, :1]) ** 2 + (sb[None, :] - block[:, 1:2]) ** 2
        best = np.argmin(d2, axis = 1)
        dense = np.sqrt(d2[np.arange(block.shape[0]), best])
        theta = theta_grid[best]
        q1, q2 = block[:, 0], block[:, 1]
        for _ in range(30):
            s, c = np.sin(theta), np.cos(theta)
            f = (b * b - a * a) * s * c + a * q1 * s - b * q2 * c
            fp = (b * b - a * a) * (c * c - s * s) + a * q1 * c + b * q2 * s
            step = np.where(np.abs(fp) > 1e-300, f / np.where(fp == 0, 1.0, fp), 0.0)
            step = np.clip(step, -np.pi / DENSE_SAMPLES * 4, np.pi / DENSE_SAMPLES * 4)
            theta = theta - step
            if np.max(np.abs(step)) < NEWTON_TOL:
                break
        polished = np.hypot(a * np.cos(theta) - q1, b * np.sin(theta) - q2)
        out[start:start + chunk] = np.minimum(polished, dense)
    return out


def _radial_graph_distance(graph: BoundaryGraph, rho0: np.ndarray, z0: np.ndarray,
                           samples: int = 64, chunk: int = 4096) -> np.ndarray:
    """
    Distance from (rho0, z0) to the curve (s, gamma(s)) in the meridian plane.
    The closest parameter lies in [rho0, rho0 + z0 - gamma(rho0)].
    """

    out = np.empty(rho0.shape[0])
    frac = np.linspace(0.0, 1.0, samples)
    for start in range(0, rho0.shape[0], chunk):
        r0 = rho0[start:start + chunk]
        h0 = z0[start:start + chunk]
        gap = np.clip(h0 - graph.gamma(r0)[0], 0.0, None)
        if graph.is_flat:
            out[start:start + chunk] = gap
            continue
        s = r0[:, None] + gap[:, None] * frac[None, :]
        gs = graph.gamma(s.ravel())[0].reshape(s.shape)
        d2 = (s - r0[:, None]) ** 2 + (gs - h0[:, None]) ** 2
        best = np.argmin(d2, axis = 1)
        rows = np.arange(r0.shape[0])
        dense = np.sqrt(d2[rows, best])
        width = gap / (samples - 1)
        lo_b = np.clip(s[rows, best] - width, r0, None)
        hi_b = s[rows, best] + width
        t = s[rows, best]
        for _ in range(30):
            g, g1, g2, _ = graph.gamma(t)
            f1 = (t - r0) + (g - h0) * g1
            f2 = 1.0 + g1 * g1 + (g - h0) * g2
            ok = f2 > 0
            step = np.where(ok, f1 / np.where(ok, f2, 1.0), 0.0)
            t = np.clip(t - step, lo_b, hi_b)
            if np.max(np.abs(step)) < NEWTON_TOL:
                break
        g = graph.gamma(t)[0]
        polished = np.hypot(t - r0, g - h0)
        out[start:start + chunk] = np.minimum(polished, dense)
    return out
