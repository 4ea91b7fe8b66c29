"""
Monotone wide-stencil discretization of det D^2 u.
Second differences use the exact boundary arm lengths at
boundary-adjacent nodes; the determinant is the minimum over orthogonal
direction frames of the product of positive parts.
"""

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
from scipy import sparse

from malab.core.grid import Grid
from malab.core.stencil import Stencil
from malab.utils.exceptions import ArgumentError, StencilError

NodeRef = Union[int, np.ndarray, tuple, list]


####
##      GRID FUNCTION
#####
@dataclass(frozen = True)
class GridFunction:
    """
    Values at interior nodes plus the boundary trace at the grid's
    boundary intersection points.
    """

    grid: Grid
    values: np.ndarray
    trace: np.ndarray
    alpha: Optional[float] = None
    boundary: Any = None
    rhs: Optional[np.ndarray] = field(default = None, repr = False)
    frames: Optional[np.ndarray] = field(default = None, repr = False)
    history: List[Dict[str, float]] = field(default_factory = list, repr = False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype = float)
        trace = np.asarray(self.trace, dtype = float)
        if values.shape != (self.grid.size,):
            raise ArgumentError(f"expected {self.grid.size} node values, got {values.shape}")
        if trace.shape != (self.grid.boundary_size,):
            raise ArgumentError(f"expected {self.grid.boundary_size} trace values, got {trace.shape}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "trace", trace)

    @classmethod
    def sample(cls, grid: Grid, fn: Callable, alpha: Optional[float] = None,
               boundary: Any = None) -> "GridFunction":
        """Samples a vectorized function at nodes and boundary points."""

        evaluate = getattr(fn, "eval", fn)
        values = np.asarray(evaluate(grid.points), dtype = float)
        trace = np.asarray(evaluate(grid.boundary_points), dtype = float) if grid.boundary_size else np.empty(0)
        return cls(grid = grid, values = values, trace = trace, alpha = alpha,
                   boundary = boundary if boundary is not None else fn)

    @property
    def spacing(self) -> float:
        return self.grid.spacing

    @property
    def scale(self) -> float:
        """Magnitude of u used in relative tolerances."""

        peak = np.max(np.abs(self.extended())) if self.values.size else 0.0
        return float(max(1.0, peak))

    def extended(self) -> np.ndarray:
        return np.concatenate([self.values, self.trace])

    def with_values(self, values: np.ndarray, **changes) -> "GridFunction":
        return replace(self, values = np.asarray(values, dtype = float), **changes)

    def node(self, ref: NodeRef) -> int:
        if isinstance(ref, (int, np.integer)):
            if not 0 <= int(ref) < self.grid.size:
                raise StencilError(f"node index {ref} out of range")
            return int(ref)
        return self.grid.locate(ref)

    def to_csv(self, path: Union[str, Path], include_boundary: bool = False) -> Path:
        """One row per node: x1..xn, u with 17 significant digits."""

        path = Path(path)
        points = self.grid.all_points if include_boundary else self.grid.points
        values = self.extended() if include_boundary else self.values
        header = [f"x{j + 1}" for j in range(self.grid.dim)] + ["u"]
        with path.open("w", newline = "", encoding = "utf-8") as fh:
            writer = csv.writer(fh, lineterminator = "\n")
            writer.writerow(header)
            for p, v in zip(points, values):
                writer.writerow([format(float(c), ".17g") for c in p] + [format(float(v), ".17g")])
        return path


# -- second differences ------------------------------------------------

def second_differences(grid: Grid, ext: np.ndarray) -> np.ndarray:
    """(K, N) unequal-arm second differences along every stencil direction."""

    if not np.all(np.isfinite(ext)):
        raise StencilError("a stencil neighbor has no finite value")
    u0 = ext[: grid.size, None]
    up = ext[grid.plus]
    dn = ext[grid.minus]
    unit = grid.stencil.unit(grid.steps)[None, :]
    a = grid.plus_t * unit
    b = grid.minus_t * unit
    return 2.0 / (a + b) * ((up - u0) / a + (dn - u0) / b)


def _check_stencil(grid: Grid, stencil: Optional[Stencil]):
    if stencil is not None and stencil != grid.stencil:
        raise StencilError(
            f"grid was built for stencil width {grid.stencil.width}, got {stencil.width}"
        )


def ma_field(u: GridFunction):
    """Monotone determinant at every node and the index of the minimizing frame."""

    diffs = np.maximum(second_differences(u.grid, u.extended()), 0.0)
    frames = u.grid.stencil.frames
    products = np.prod(diffs[:, frames], axis = -1)
    best = np.argmin(products, axis = 1)
    return products[np.arange(products.shape[0]), best], best


def ma_monotone(u: GridFunction, node: Optional[NodeRef] = None, stencil: Optional[Stencil] = None):
    """
    Wide-stencil monotone approximation of det D^2 u: at each node the
    minimum over orthogonal frames of the product of positive parts of the
    second differences. Returns one value for `node`, else the (K,) field.
    """

    _check_stencil(u.grid, stencil)
    values, _ = ma_field(u)
    if node is None:
        return values
    return float(values[u.node(node)])


def linearized_ma(u: GridFunction, frames: Optional[np.ndarray] = None,
                  eps_reg: Optional[float] = None) -> sparse.csr_matrix:
    """
    Derivative of ma_monotone with the argmin frame frozen, as a sparse
    (K, K + M) operator on extended values. Row i is
    sum_k w_k Delta_k with cofactor weights w_k = prod_{j != k} max(Delta_j, eps_reg).
    """

    grid = u.grid
    K = grid.size
    diffs = second_differences(grid, u.extended())
    if frames is None:
        _, frames = ma_field(u)
    if eps_reg is None:
        eps_reg = 1e-12 * u.scale / grid.spacing ** 2
    active = grid.stencil.frames[frames]
    rows = np.arange(K)
    clipped = np.maximum(diffs[rows[:, None], active], eps_reg)

    unit = grid.stencil.unit(grid.steps)
    data, ii, jj = [], [], []
    for k in range(active.shape[1]):
        others = np.delete(clipped, k, axis = 1)
        w = np.prod(others, axis = 1) if others.shape[1] else np.ones(K)
        d = active[:, k]
        a = grid.plus_t[rows, d] * unit[d]
        b = grid.minus_t[rows, d] * unit[d]
        c_plus = 2.0 / (a * (a + b))
        c_minus = 2.0 / (b * (a + b))
        ii.extend([rows, rows, rows])
        jj.extend([rows, grid.plus[rows, d], grid.minus[rows, d]])
        data.extend([-w * (c_plus + c_minus), w * c_plus, w * c_minus])

    op = sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(ii), np.concatenate(jj))),
        shape = (K, K + grid.boundary_size),
    )
    return op.tocsr()


def gradient(u: GridFunction, p: NodeRef) -> np.ndarray:
    """Axis-wise three-point gradient; one-sided arms use the boundary trace."""

    i = u.node(p)
    grid = u.grid
    ext = u.extended()
    out = np.empty(grid.dim)
    for j in range(grid.dim):
        a = grid.plus_t[i, j] * grid.steps[j]
        b = grid.minus_t[i, j] * grid.steps[j]
        up, dn, u0 = ext[grid.plus[i, j]], ext[grid.minus[i, j]], ext[i]
        out[j] = (b * b * up - a * a * dn - (b * b - a * a) * u0) / (a * b * (a + b))
    return out


def discrete_convexity_defect(u: GridFunction) -> float:
    """Most negative second difference over all stencil directions (0 if none)."""

    diffs = second_differences(u.grid, u.extended())
    return float(min(0.0, np.min(diffs)))
