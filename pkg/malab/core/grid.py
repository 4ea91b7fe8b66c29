"""
Solver grids.
Node-centered lattices strictly inside a DomainSpec, with the boundary
intersections of every stencil line through a boundary-adjacent node.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from malab.core.domain import DomainSpec
from malab.core.stencil import Stencil
from malab.core.types import DomainKind
from malab.utils import get_logger
from malab.utils.exceptions import ArgumentError, ResolutionError, StencilError

logger = get_logger("MALab.Grid")

BISECTION_STEPS = 60
MIN_SPAN = 8


####
##      GRID
#####
@dataclass(frozen = True)
class Grid:
    """
    Interior nodes of a lattice plus boundary intersection points.

    Values live in an extended vector: entries [0, K) are the interior
    nodes, entries [K, K + M) the boundary points. `plus[i, d]` and
    `minus[i, d]` give the extended index of the neighbor of node i along
    stencil direction d and its opposite; `plus_t` / `minus_t` are the arm
    lengths in units of one lattice step along that direction.
    """

    domain: DomainSpec
    spacing: float
    stencil: Stencil
    steps: np.ndarray
    anchor: np.ndarray
    kmin: np.ndarray
    index: np.ndarray = field(repr = False)
    lattice: np.ndarray = field(repr = False)
    points: np.ndarray = field(repr = False)
    plus: np.ndarray = field(repr = False)
    minus: np.ndarray = field(repr = False)
    plus_t: np.ndarray = field(repr = False)
    minus_t: np.ndarray = field(repr = False)
    boundary_points: np.ndarray = field(repr = False)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def boundary_size(self) -> int:
        return int(self.boundary_points.shape[0])

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.steps))

    @property
    def all_points(self) -> np.ndarray:
        """Interior nodes followed by boundary points."""

        return np.vstack([self.points, self.boundary_points])

    def arms(self, direction: int):
        """Euclidean (plus, minus) arm lengths for one stencil direction."""

        unit = np.linalg.norm(self.stencil.directions[direction] * self.steps)
        return self.plus_t[:, direction] * unit, self.minus_t[:, direction] * unit

    def lookup(self, lattice: np.ndarray) -> np.ndarray:
        """Node indices of integer lattice coordinates, -1 where there is no node."""

        lattice = np.atleast_2d(lattice)
        rel = lattice - self.kmin
        ok = np.all((rel >= 0) & (rel < np.array(self.index.shape)), axis = -1)
        out = np.full(lattice.shape[0], -1, dtype = int)
        if np.any(ok):
            out[ok] = self.index[tuple(rel[ok].T)]
        return out

    def locate(self, p, tol: float = 1e-9) -> int:
        """Index of the node at p."""

        p = np.asarray(p, dtype = float).reshape(self.dim)
        k = np.rint((p - self.anchor) / self.steps).astype(int)
        idx = int(self.lookup(k)[0])
        if idx < 0 or np.max(np.abs(self.points[idx] - p) / self.steps) > tol:
            raise StencilError(f"{p.tolist()} is not a grid node")
        return idx

    def nearest(self, p) -> int:
        """Index of the node closest to p."""

        p = np.asarray(p, dtype = float).reshape(self.dim)
        return int(np.argmin(np.linalg.norm(self.points - p, axis = -1)))

    def rescaled(self, factors) -> "Grid":
        """Same nodes in coordinates y = x / factors (componentwise)."""

        factors = np.asarray(factors, dtype = float)
        if factors.shape != (self.dim,) or np.any(factors <= 0):
            raise ArgumentError("rescale factors must be positive, one per axis")
        return replace(
            self,
            steps = self.steps / factors,
            anchor = self.anchor / factors,
            points = self.points / factors,
            boundary_points = self.boundary_points / factors,
        )


def make_grid(domain: DomainSpec, spacing: float, stencil: Optional[Stencil] = None,
              clearance: float = 0.01) -> Grid:
    """
    Builds the interior lattice of spacing `spacing`.
    The lattice goes through the base point tangentially and is offset by
    half a cell along e_n. Nodes closer to the boundary than
    clearance * spacing are dropped.
    """

    if spacing <= 0:
        raise ArgumentError("spacing must be positive")
    if not 0 <= clearance < 0.5:
        raise ArgumentError("clearance must lie in [0, 0.5)")
    stencil = stencil or Stencil(domain.dim)
    if stencil.dim != domain.dim:
        raise ArgumentError("stencil and domain dimensions differ")

    dim = domain.dim
    lo, hi = domain.bounding_box()
    if domain.scale / spacing < MIN_SPAN:
        raise ResolutionError(
            f"spacing {spacing} leaves fewer than {MIN_SPAN} nodes across the domain diameter"
        )

    anchor = domain.base_point.copy()
    anchor[-1] += 0.5 * spacing
    steps = np.full(dim, float(spacing))
    kmin = np.floor((lo - anchor) / spacing).astype(int) - 1
    kmax = np.ceil((hi - anchor) / spacing).astype(int) + 1
    shape = tuple(kmax - kmin + 1)

    axes = [np.arange(kmin[j], kmax[j] + 1) for j in range(dim)]
    lattice = np.stack(np.meshgrid(*axes, indexing = "ij"), axis = -1).reshape(-1, dim)
    pts = anchor + lattice * spacing
    inside = domain.contains(pts)

    # Drop nodes hugging the boundary; only nodes with an axis neighbor outside can
    inside_grid = inside.reshape(shape)
    exposed = np.zeros(shape, dtype = bool)
    for j in range(dim):
        for shift in (1, -1):
            neighbor = np.roll(inside_grid, shift, axis = j)
            exposed |= inside_grid & ~neighbor
    candidates = np.flatnonzero(exposed.ravel())
    if candidates.size and clearance > 0:
        d = domain.distance(pts[candidates])
        inside[candidates[d <= clearance * spacing]] = False

    keep = np.flatnonzero(inside)
    if keep.size == 0:
        raise ResolutionError(f"spacing {spacing} leaves no interior node")

    index = np.full(shape, -1, dtype = int)
    index.reshape(-1)[keep] = np.arange(keep.size)
    lattice = lattice[keep]
    points = pts[keep]

    K, N = keep.size, stencil.size
    plus = np.empty((K, N), dtype = int)
    minus = np.empty((K, N), dtype = int)
    plus_t = np.ones((K, N))
    minus_t = np.ones((K, N))
    boundary = []
    next_id = K

    for d, vec in enumerate(stencil.directions):
        for sign, ext, frac in ((1, plus, plus_t), (-1, minus, minus_t)):
            target = lattice + sign * vec
            rel = target - kmin
            ok = np.all((rel >= 0) & (rel < np.array(shape)), axis = -1)
            nbr = np.full(K, -1, dtype = int)
            nbr[ok] = index[tuple(rel[ok].T)]
            ext[:, d] = nbr
            missing = np.flatnonzero(nbr < 0)
            if missing.size == 0:
                continue
            step = sign * vec * spacing
            t = _crossing(domain, points[missing], step)
            frac[missing, d] = t
            ext[missing, d] = next_id + np.arange(missing.size)
            boundary.append(points[missing] + t[:, None] * step)
            next_id += missing.size

    boundary_points = np.vstack(boundary) if boundary else np.empty((0, dim))
    if domain.kind != DomainKind.INTERVAL and K < MIN_SPAN:
        raise ResolutionError(f"spacing {spacing} leaves only {K} interior nodes")

    logger.debug(
        f"grid: {K} nodes, {boundary_points.shape[0]} boundary points, "
        f"spacing {spacing}, stencil width {stencil.width}"
    )
    return Grid(
        domain = domain, spacing = float(spacing), stencil = stencil, steps = steps,
        anchor = anchor, kmin = kmin, index = index, lattice = lattice, points = points,
        plus = plus, minus = minus, plus_t = plus_t, minus_t = minus_t,
        boundary_points = boundary_points,
    )


def _crossing(domain: DomainSpec, start: np.ndarray, step: np.ndarray) -> np.ndarray:
    """Fraction t > 0 with start + t * step on the boundary (vectorized bisection)."""

    lo = np.zeros(start.shape[0])
    hi = np.ones(start.shape[0])
    # The lattice neighbor may be inside but dropped by the clearance rule
    for _ in range(64):
        still_in = domain.level(start + hi[:, None] * step) < 0
        if not np.any(still_in):
            break
        lo[still_in] = hi[still_in]
        hi[still_in] *= 2.0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        in_mid = domain.level(start + mid[:, None] * step) < 0
        lo = np.where(in_mid, mid, lo)
        hi = np.where(in_mid, hi, mid)
    return hi
