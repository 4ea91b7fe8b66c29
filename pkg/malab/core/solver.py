"""
Damped Newton solver.
Solves the monotone discretization of det D^2 u = f with continuation
in alpha from the uniformly elliptic alpha = 0 problem.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve
from scipy.spatial import ConvexHull, QhullError

from malab.core.grid import Grid, make_grid
from malab.core.problem import ProblemSpec, assemble_rhs, rhs_eval
from malab.core.scheme import GridFunction, linearized_ma, ma_field, second_differences
from malab.core.stencil import Stencil
from malab.core.types import RhsQuadrature
from malab.utils import get_logger
from malab.utils.exceptions import ArgumentError, DivergenceError

logger = get_logger("MALab.Solver")


####
##      SOLVER OPTIONS
#####
@dataclass(frozen = True)
class SolverOptions:
    """Newton and discretization settings."""

    tol: float = 1e-8
    max_iter: int = 200
    damping: int = 30
    continuation_step: float = 0.25
    rhs_quadrature: RhsQuadrature = RhsQuadrature.NODE
    clearance: float = 0.01

    def __post_init__(self):
        if self.tol <= 0:
            raise ArgumentError("tol must be positive")
        if self.max_iter < 1 or self.damping < 0:
            raise ArgumentError("max_iter must be >= 1 and damping >= 0")
        if self.continuation_step <= 0:
            raise ArgumentError("continuation_step must be positive")
        object.__setattr__(self, "rhs_quadrature", RhsQuadrature(self.rhs_quadrature))


def continuation_stages(alpha: float, step: float) -> List[float]:
    """0, step, 2 step, ... up to alpha (alpha itself last)."""

    stages = list(np.arange(0.0, alpha, step))
    if not stages or stages[-1] != alpha:
        stages.append(alpha)
    return [float(a) for a in stages]


def convex_envelope(grid: Grid, trace: np.ndarray) -> np.ndarray:
    """
    Lower convex envelope of the boundary data lifted to (x, phi),
    evaluated at the interior nodes. Any convex function with this trace
    lies below it.
    """

    pts = grid.boundary_points
    if grid.dim == 1:
        order = np.argsort(pts[:, 0])
        return np.interp(grid.points[:, 0], pts[order, 0], trace[order])
    lifted = np.column_stack([pts, trace])
    try:
        hull = ConvexHull(lifted)
    except QhullError:
        # Flat data: the envelope is the least-squares plane
        design = np.column_stack([pts, np.ones(pts.shape[0])])
        coef, *_ = np.linalg.lstsq(design, trace, rcond = None)
        return np.column_stack([grid.points, np.ones(grid.size)]) @ coef
    eq = hull.equations
    lower = eq[eq[:, grid.dim] < -1e-12]
    normal, height, offset = lower[:, : grid.dim], lower[:, grid.dim], lower[:, -1]
    planes = -(grid.points @ normal.T + offset) / height
    return np.max(planes, axis = 1)


def poisson_seed(grid: Grid, trace: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Discrete Poisson solution of Delta_h w = n f^(1/n) with w = phi on the boundary."""

    n = grid.dim
    K = grid.size
    rows = np.arange(K)
    data, ii, jj = [], [], []
    for j in range(n):
        a = grid.plus_t[:, j] * grid.steps[j]
        b = grid.minus_t[:, j] * grid.steps[j]
        c_plus = 2.0 / (a * (a + b))
        c_minus = 2.0 / (b * (a + b))
        ii.extend([rows, rows, rows])
        jj.extend([rows, grid.plus[:, j], grid.minus[:, j]])
        data.extend([-(c_plus + c_minus), c_plus, c_minus])
    lap = sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(ii), np.concatenate(jj))),
        shape = (K, K + grid.boundary_size),
    ).tocsr()
    target = n * np.power(rhs, 1.0 / n) - lap[:, K:] @ trace
    return spsolve(lap[:, :K].tocsc(), target)


def _weighted(residual: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return residual / (1.0 + rhs)


def newton(u: GridFunction, rhs: np.ndarray, options: SolverOptions,
           history: List[Dict[str, float]], stage_alpha: float) -> GridFunction:
    """Damped Newton on F(u) = MA(u) - rhs with the boundary trace fixed."""

    K = u.grid.size
    ma, frames = ma_field(u)
    residual = ma - rhs
    merit = float(np.linalg.norm(_weighted(residual, rhs)))

    for iteration in range(options.max_iter + 1):
        worst = float(np.max(np.abs(_weighted(residual, rhs)))) if K else 0.0
        history.append({
            "alpha": stage_alpha, "iteration": iteration,
            "residual": worst, "merit": merit,
        })
        logger.debug(f"alpha={stage_alpha:.3f} it={iteration} residual={worst:.3e} merit={merit:.3e}")
        if worst <= options.tol:
            return u.with_values(u.values, rhs = rhs, frames = frames)
        if iteration == options.max_iter:
            break

        jac = linearized_ma(u, frames)[:, :K].tocsc()
        step = spsolve(jac, -residual)
        if not np.all(np.isfinite(step)):
            raise DivergenceError("Newton step is not finite", [h["residual"] for h in history])

        lam = 1.0
        for halving in range(options.damping + 1):
            trial = u.with_values(u.values + lam * step)
            t_ma, t_frames = ma_field(trial)
            t_res = t_ma - rhs
            t_merit = float(np.linalg.norm(_weighted(t_res, rhs)))
            if t_merit < merit:
                break
            lam *= 0.5
        else:
            raise DivergenceError(
                f"line search failed at alpha={stage_alpha} after {options.damping} halvings",
                [h["residual"] for h in history],
            )
        history[-1]["halvings"] = halving
        if not np.array_equal(t_frames, frames):
            logger.debug(f"active frames changed at {int(np.sum(t_frames != frames))} nodes")
        u, frames, residual, merit = trial, t_frames, t_res, t_merit

    raise DivergenceError(
        f"no convergence within {options.max_iter} iterations at alpha={stage_alpha}",
        [h["residual"] for h in history],
    )


def solve(problem: ProblemSpec, spacing: float, stencil: Optional[Stencil] = None,
          options: Optional[SolverOptions] = None, grid: Optional[Grid] = None) -> GridFunction:
    """Solves the Dirichlet problem on a grid of the given spacing."""

    options = options or SolverOptions()
    stencil = stencil or Stencil(problem.dim)
    grid = grid or make_grid(problem.domain, spacing, stencil, clearance = options.clearance)
    trace = problem.phi.eval(grid.boundary_points) if grid.boundary_size else np.empty(0)

    history: List[Dict[str, float]] = []
    stages = continuation_stages(problem.alpha, options.continuation_step)
    rhs0 = assemble_rhs(problem, grid, alpha = 0.0, quadrature = options.rhs_quadrature)
    seed = poisson_seed(grid, trace, rhs0)
    envelope = convex_envelope(grid, trace)
    excess = float(np.max(seed - envelope)) if grid.size else 0.0
    if excess > 1e-8 * max(1.0, float(np.max(np.abs(envelope)))):
        logger.info(f"Poisson seed exceeds the convex envelope by {excess:.3e}")

    u = GridFunction(grid = grid, values = seed, trace = trace, alpha = problem.alpha, boundary = problem.phi)
    for stage in stages:
        rhs = assemble_rhs(problem, grid, alpha = stage, quadrature = options.rhs_quadrature)
        u = newton(u, rhs, options, history, stage)

    # Residual against f at the nodes, whatever the assembled rhs was
    pointwise = 0.0
    if grid.size:
        f = rhs_eval(problem, grid.points)
        pointwise = float(np.max(np.abs(_weighted(ma_field(u)[0] - f, f))))
    history[-1]["pointwise_residual"] = pointwise
    if pointwise > options.tol:
        logger.info(f"pointwise residual {pointwise:.2e} exceeds tol {options.tol:.0e} ({options.rhs_quadrature.value} rhs)")

    u = u.with_values(u.values, history = history, alpha = problem.alpha)
    logger.info(
        f"solved alpha={problem.alpha} on {grid.size} nodes in {len(history)} Newton steps "
        f"(final residual {history[-1]['residual']:.2e})"
    )
    return u


def frame_differences(u: GridFunction) -> np.ndarray:
    """Second differences along the directions of the active frames."""

    diffs = second_differences(u.grid, u.extended())
    _, frames = ma_field(u)
    active = u.grid.stencil.frames[frames]
    return diffs[np.arange(u.grid.size)[:, None], active]
