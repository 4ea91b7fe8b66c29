"""
Experiments.
Power-law fits and the boundary experiments built on them: section
localization exponents, the Liouville residual, the tangential
expansion with its pinch, and maximal interior section scaling.
Every experiment returns a result with `passed`, `to_dict()` and the
raw sweep rows.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from malab.core.domain import BoundaryFrame, DomainSpec, boundary_frame, distance_to_boundary
from malab.core.grid import make_grid
from malab.core.problem import AnalyticFunction, liouville
from malab.core.scheme import GridFunction, gradient, ma_monotone
from malab.core.sections import (
    Section, center_of_mass, john_ellipsoid, maximal_interior_section,
    pinch_eta, sandwich_constant, section, supporting_slope
)
from malab.core.stencil import DEFAULT_WIDTH, Stencil
from malab.core.types import DomainKind, SlopeMethod
from malab.utils import get_logger
from malab.utils.exceptions import (
    ArgumentError, ConvexityViolationError, ExperimentError, GeometryError,
    RankError
)

logger = get_logger("MALab.Verify")

SLOPE_TOLERANCE = 0.08
MIN_R_SQUARED = 0.98
MIN_PAIRS = 4
ETA_TOLERANCE = 0.02
DRIFT_CELLS = 3
MAX_HALVINGS = 40


####
##      SCALING REPORT
#####
@dataclass(frozen = True)
class ScalingReport:
    """Log-log fit of a measured quantity against h."""

    quantity: str
    pairs: List[Tuple[float, float]]
    slope: float
    intercept: float
    r_squared: float
    predicted: Optional[float]
    tolerance: float = SLOPE_TOLERANCE
    report_only: bool = False

    @property
    def passed(self) -> bool:
        if self.report_only or self.predicted is None:
            return True
        return abs(self.slope - self.predicted) <= self.tolerance and self.r_squared >= MIN_R_SQUARED

    def to_dict(self) -> Dict[str, Any]:
        return {
            "quantity": self.quantity,
            "pairs": [[float(h), float(v)] for h, v in self.pairs],
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "predicted": self.predicted,
            "tolerance": self.tolerance,
            "report_only": self.report_only,
            "pass": self.passed,
        }

    def summary(self) -> str:
        expected = "-" if self.predicted is None else f"{self.predicted:.4f}"
        verdict = "REPORT" if self.report_only else ("PASS" if self.passed else "FAIL")
        return (f"{self.quantity:<14} slope {self.slope:>8.4f}  predicted {expected:>8}  "
                f"R2 {self.r_squared:.4f}  {verdict}")


def fit_power_law(pairs: Sequence[Tuple[float, float]]) -> Tuple[float, float, float]:
    """Least squares of log v against log t: (slope, intercept, R^2)."""

    data = np.asarray(pairs, dtype = float)
    if data.ndim != 2 or data.shape[0] < MIN_PAIRS or data.shape[1] != 2:
        raise ArgumentError(f"power-law fits need at least {MIN_PAIRS} (t, v) pairs")
    if np.any(data <= 0) or not np.all(np.isfinite(data)):
        raise ArgumentError("power-law fits need positive finite pairs")
    x, y = np.log(data[:, 0]), np.log(data[:, 1])
    if np.ptp(x) == 0:
        raise ArgumentError("power-law fits need at least two distinct abscissae")
    fit = linregress(x, y)
    return float(fit.slope), float(fit.intercept), float(min(1.0, fit.rvalue ** 2))


def scaling_report(quantity: str, pairs: Sequence[Tuple[float, float]], predicted: Optional[float],
                   tolerance: float = SLOPE_TOLERANCE, report_only: bool = False) -> ScalingReport:
    slope, intercept, r2 = fit_power_law(pairs)
    return ScalingReport(
        quantity = quantity, pairs = [(float(a), float(b)) for a, b in pairs],
        slope = slope, intercept = intercept, r_squared = r2,
        predicted = predicted, tolerance = tolerance, report_only = report_only,
    )


# -- boundary sections ---------------------------------------------------

@dataclass(frozen = True)
class _Support:
    """Base point, frame and supporting plane shared by a sweep."""

    x0: np.ndarray
    frame: BoundaryFrame
    slope: np.ndarray
    value: float
    rho: Optional[float]


def _support(u, x0, alpha: float, method: SlopeMethod) -> _Support:
    if isinstance(u, GridFunction):
        domain = u.grid.domain
        x0 = domain.base_point if x0 is None else np.asarray(x0, dtype = float)
        frame = boundary_frame(domain, x0)
        slope = supporting_slope(u, x0, frame, method = method, alpha = alpha)
        value = float(np.asarray(u.boundary.eval(x0[None, :]))[0])
        return _Support(x0, frame, slope, value, domain.rho)
    x0 = np.zeros(u.dim) if x0 is None else np.asarray(x0, dtype = float)
    frame = BoundaryFrame.standard(u.dim, x0)
    return _Support(x0, frame, np.asarray(u.grad(x0[None, :])[0], dtype = float),
                    float(np.asarray(u.eval(x0[None, :]))[0]), None)


def _section(u, support: _Support, h: float) -> Section:
    return section(u, support.x0, h, frame = support.frame, slope = support.slope,
                   value = support.value, rho = support.rho)


def auto_h_list(u, x0 = None, alpha: Optional[float] = None, method: SlopeMethod = SlopeMethod.EXTRAPOLATED,
                start: float = 1.0, analytic_count: int = 8, support: Optional[_Support] = None) -> List[float]:
    """
    Dyadic heights from the largest untruncated section down to the
    smallest one with at least six nodes across its normal extent.
    Analytic functions get `analytic_count` heights.
    """

    alpha = alpha if alpha is not None else getattr(u, "alpha", None)
    support = support or _support(u, x0, alpha, method)
    heights: List[float] = []
    h = start
    for _ in range(MAX_HALVINGS):
        sec = _section(u, support, h)
        if sec.truncated:
            h *= 0.5
            continue
        if not sec.resolved or len(heights) >= (analytic_count if sec.grid is None else MAX_HALVINGS):
            break
        heights.append(h)
        h *= 0.5
    return heights


####
##      LOCALIZATION
#####
@dataclass(frozen = True)
class LocalizationResult:
    """Tangential and normal extent fits plus per-h sandwich constants."""

    tangential: ScalingReport
    normal: ScalingReport
    sandwich: List[Tuple[float, float]]
    excluded: List[float]
    rows: List[Dict[str, float]] = field(default_factory = list, repr = False)

    @property
    def passed(self) -> bool:
        return self.tangential.passed and self.normal.passed

    @property
    def sandwich_stability(self) -> Optional[float]:
        """max K / min K over the larger half of the heights."""

        if not self.sandwich:
            return None
        top = [k for _, k in self.sandwich[: max(1, len(self.sandwich) // 2)]]
        return max(top) / min(top)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": "localization",
            "reports": [self.tangential.to_dict(), self.normal.to_dict()],
            "sandwich": [[h, k] for h, k in self.sandwich],
            "sandwich_stability": self.sandwich_stability,
            "excluded_h": self.excluded,
            "pass": self.passed,
        }


def localization_experiment(u, x0 = None, h: Optional[Sequence[float]] = None, alpha: Optional[float] = None,
                            method: SlopeMethod = SlopeMethod.EXTRAPOLATED,
                            tolerance: float = SLOPE_TOLERANCE) -> LocalizationResult:
    """
    Extents of S_h(x0) against h: tangential slope 1/2, normal slope
    1/(2 - alpha). Truncated sections are excluded.
    """

    alpha = alpha if alpha is not None else getattr(u, "alpha", None)
    if alpha is None:
        raise ArgumentError("alpha is required for the localization experiment")
    support = _support(u, x0, alpha, method)
    heights = list(h) if h else auto_h_list(u, alpha = alpha, method = method, support = support)
    if not heights:
        raise ExperimentError("no untruncated, resolved section heights")

    tangential, normal, sandwich, excluded, rows = [], [], [], [], []
    for height in heights:
        sec = _section(u, support, height)
        if sec.truncated:
            logger.info(f"excluding h={height:g}: section reaches distance rho")
            excluded.append(float(height))
            continue
        k = sandwich_constant(sec, alpha) if sec.grid is not None else None
        if k is not None:
            sandwich.append((float(height), float(k)))
        tangential.append((height, sec.tangential_extent))
        normal.append((height, sec.normal_extent))
        rows.append({
            "h": float(height), "tangential_extent": sec.tangential_extent,
            "normal_extent": sec.normal_extent, "members": sec.size,
            "sandwich_K": k if k is not None else float("nan"),
        })
    if not rows:
        raise ExperimentError("every section was truncated")
    if len(rows) < MIN_PAIRS:
        raise ExperimentError(f"only {len(rows)} usable heights; need {MIN_PAIRS}")

    return LocalizationResult(
        tangential = scaling_report("tangential", tangential, 0.5, tolerance),
        normal = scaling_report("normal", normal, 1.0 / (2.0 - alpha), tolerance),
        sandwich = sandwich, excluded = excluded, rows = rows,
    )


####
##      LIOUVILLE RESIDUAL
#####
@dataclass(frozen = True)
class LiouvilleResult:
    """Weighted residual of the scheme on U0 and the trace defects near x_n = 0."""

    alpha: float
    spacing: float
    residual: float
    nodes: int
    trace_defects: List[Tuple[float, float]]
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": "liouville",
            "alpha": self.alpha, "spacing": self.spacing, "residual": self.residual,
            "nodes": self.nodes, "tolerance": self.tolerance,
            "trace_defects": [[t, d] for t, d in self.trace_defects],
            "pass": self.passed,
        }


def liouville_residual(alpha: float, spacing: float = 1.0 / 256, box: Optional[Sequence[float]] = None,
                       stencil_width: int = DEFAULT_WIDTH, levels: Sequence[int] = (1, 2, 3, 4, 5, 6),
                       tolerance: float = 0.02) -> LiouvilleResult:
    """
    max |ma(U0) - x_n^(-alpha)| x_n^alpha over grid nodes of a box in the
    upper half plane. `box` is (x'_max, x_n_min, x_n_max).
    """

    half_width, lo, hi = (0.5, 0.25, 1.0) if box is None else map(float, box)
    if lo <= 0 or hi <= lo or half_width <= 0:
        raise ArgumentError("box must lie strictly above x_n = 0")
    domain = DomainSpec(kind = DomainKind.GRAPH, dim = 2, coefficients = (),
                        height = hi + 0.25, base_radius = half_width + 0.5)
    grid = make_grid(domain, spacing, Stencil(2, stencil_width))
    exact = liouville(alpha, 2)
    u = GridFunction.sample(grid, exact, alpha = alpha)

    pts = grid.points
    keep = (np.abs(pts[:, 0]) <= half_width) & (pts[:, 1] >= lo) & (pts[:, 1] <= hi)
    if not np.any(keep):
        raise ExperimentError("the residual box contains no grid nodes")
    ma = ma_monotone(u)[keep]
    xn = pts[keep, 1]
    residual = float(np.max(np.abs(ma - xn ** (-alpha)) * xn ** alpha))

    xs = np.linspace(-half_width, half_width, 65)
    defects = []
    for k in levels:
        t = 10.0 ** (-k)
        line = np.column_stack([xs, np.full(xs.size, t)])
        defects.append((t, float(np.max(np.abs(exact.eval(line) - 0.5 * xs ** 2)))))
    logger.info(f"liouville residual alpha={alpha} h={spacing:g}: {residual:.3e}")
    return LiouvilleResult(alpha = alpha, spacing = spacing, residual = residual,
                           nodes = int(np.count_nonzero(keep)), trace_defects = defects,
                           tolerance = tolerance)


####
##      TANGENTIAL EXPANSION
#####
@dataclass(frozen = True)
class LinearPullback(AnalyticFunction):
    """fn(D y) for a diagonal D given by `factors`."""

    base: Any
    factors: np.ndarray

    @property
    def dim(self) -> int:
        return int(np.asarray(self.factors).size)

    def eval(self, points) -> np.ndarray:
        return np.asarray(self.base.eval(np.atleast_2d(points) * self.factors))

    def grad(self, points) -> np.ndarray:
        return self.base.grad(np.atleast_2d(points) * self.factors) * self.factors

    def hess(self, points) -> np.ndarray:
        f = np.asarray(self.factors)
        return self.base.hess(np.atleast_2d(points) * f) * np.outer(f, f)


@dataclass(frozen = True)
class ExpansionResult:
    """Fitted coefficient of x_n^(2-alpha) and the pinch eta(h)."""

    alpha: float
    a_hat: float
    predicted: float
    tolerance: float
    etas: List[Tuple[float, float]]
    samples: List[Tuple[float, float]]
    rows: List[Dict[str, float]] = field(default_factory = list, repr = False)

    @property
    def relative_error(self) -> float:
        return abs(self.a_hat - self.predicted) / self.predicted

    @property
    def monotone(self) -> bool:
        values = [eta for _, eta in self.etas]
        return all(b <= a + ETA_TOLERANCE for a, b in zip(values, values[1:]))

    @property
    def passed(self) -> bool:
        return self.relative_error <= self.tolerance and self.monotone

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": "expansion",
            "alpha": self.alpha, "a_hat": self.a_hat, "predicted": self.predicted,
            "relative_error": self.relative_error, "tolerance": self.tolerance,
            "eta": [[h, e] for h, e in self.etas], "eta_monotone": self.monotone,
            "pass": self.passed,
        }


def normalization_factors(matrix, f0: float, alpha: float) -> np.ndarray:
    """Diagonal D = diag(M^(-1/2), lambda) with lambda^(2-alpha) = det M / f(0)."""

    mat = np.atleast_2d(np.asarray(matrix, dtype = float))
    if not np.allclose(mat, np.diag(np.diag(mat))):
        raise ArgumentError("the tangential normalization needs a diagonal boundary Hessian")
    diag = np.diag(mat)
    if np.any(diag <= 0) or f0 <= 0:
        raise ArgumentError("normalization needs a positive definite Hessian and f(0) > 0")
    lam = (float(np.prod(diag)) / f0) ** (1.0 / (2.0 - alpha))
    return np.append(diag ** -0.5, lam)


def tangential_expansion_experiment(u: GridFunction, x0 = None, h: Optional[Sequence[float]] = None,
                                    alpha: Optional[float] = None, f0: Optional[float] = None,
                                    matrix = None, tolerance: float = 0.1,
                                    reach: Optional[float] = None) -> ExpansionResult:
    """
    After the affine normalization, regresses u - plane along the
    normal line against y_n^(2-alpha) and measures the pinch between
    S_h(u) and S_h(U0).
    """

    alpha = u.alpha if alpha is None else alpha
    if alpha is None or not 0 < alpha < 1:
        raise ArgumentError("the tangential expansion needs alpha in (0, 1)")
    grid = u.grid
    domain = grid.domain
    x0 = domain.base_point if x0 is None else np.asarray(x0, dtype = float)
    frame = BoundaryFrame.standard(grid.dim, x0)
    if not np.allclose(boundary_frame(domain, x0).normal, frame.normal, atol = 1e-9):
        raise GeometryError("the expansion is measured at a point with normal e_n")
    phi = u.boundary
    if matrix is None:
        matrix = getattr(phi, "tangential_matrix", np.eye(grid.dim - 1))
    if f0 is None:
        f0 = 1.0
    factors = normalization_factors(matrix, f0, alpha)

    slope = supporting_slope(u, x0, frame, method = SlopeMethod.EXTRAPOLATED, alpha = alpha)
    value = float(np.asarray(phi.eval(x0[None, :]))[0])
    tang, t = frame.coordinates(grid.points)
    on_line = np.linalg.norm(tang, axis = -1) <= 0.5 * float(np.min(grid.steps))
    reach = 0.25 * domain.rho if reach is None else reach
    line = on_line & (t >= 2.0 * grid.spacing) & (t <= reach)
    if np.count_nonzero(line) < MIN_PAIRS or float(np.max(t[line])) < 4.0 * float(np.min(t[line])):
        raise ExperimentError("normal line covers less than two octaves of resolved nodes")
    lifted = u.values[line] - value - (grid.points[line] - x0) @ slope
    y = t[line] / factors[-1]
    shape = y ** (2.0 - alpha)
    a_hat = float(shape @ lifted / (shape @ shape))
    predicted = 1.0 / ((2.0 - alpha) * (1.0 - alpha))

    scaled = GridFunction(
        grid = grid.rescaled(factors), values = u.values, trace = u.trace, alpha = alpha,
        boundary = LinearPullback(phi, factors),
    )
    support = _Support(x0 / factors, BoundaryFrame.standard(grid.dim, x0 / factors),
                       slope * factors, value, domain.rho / float(np.max(factors)))
    heights = list(h) if h else auto_h_list(scaled, alpha = alpha, support = support)
    etas, rows = [], []
    for height in heights:
        sec = _section(scaled, support, height)
        if sec.truncated or sec.size == 0:
            logger.info(f"excluding h={height:g} from the pinch")
            continue
        eta = pinch_eta(sec, alpha)
        etas.append((float(height), float(eta)))
        rows.append({"h": float(height), "eta": float(eta), "members": sec.size})

    order = np.argsort(t[line])
    samples = [(float(a), float(b)) for a, b in zip(t[line][order], lifted[order])]
    logger.info(f"expansion alpha={alpha}: a_hat={a_hat:.4f} predicted={predicted:.4f}")
    return ExpansionResult(alpha = alpha, a_hat = a_hat, predicted = predicted, tolerance = tolerance,
                           etas = etas, samples = samples, rows = rows)


####
##      MAXIMAL SECTIONS
#####
@dataclass(frozen = True)
class MaximalSectionResult:
    """Scaling of M and d(y0) against the maximal section height along a ray."""

    alpha: float
    records: List[Dict[str, float]]
    excluded: List[List[float]]
    reports: List[ScalingReport]
    box_constants: Optional[Tuple[float, float]]
    gradient_deviation: float
    log_law: Optional[Dict[str, Any]] = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": "maxsection",
            "alpha": self.alpha,
            "reports": [r.to_dict() for r in self.reports],
            "excluded_y0": self.excluded,
            "box_constants": list(self.box_constants) if self.box_constants else None,
            "gradient_deviation": self.gradient_deviation,
            "log_law": self.log_law,
            "pass": self.passed,
        }


def _tangential(frame: BoundaryFrame, vector: np.ndarray) -> np.ndarray:
    return (frame.tangents @ vector) @ frame.tangents


def _log_law(records: List[Dict[str, float]], dim: int) -> Dict[str, Any]:
    """|M|^n against -log h_bar: fitted slope, two parallel envelopes and monotonicity."""

    data = sorted((-math.log(r["h_bar"]), abs(r["M"]) ** dim) for r in records)
    x = np.array([a for a, _ in data])
    v = np.array([b for _, b in data])
    fit = linregress(x, v)
    offsets = v - fit.slope * x
    return {
        "slope": float(fit.slope),
        "lower_intercept": float(np.min(offsets)),
        "upper_intercept": float(np.max(offsets)),
        "increasing": bool(np.all(np.diff(v) > 0)),
        "positive_slopes": bool(fit.slope > 0),
    }


def maximal_section_experiment(u, alpha: Optional[float] = None, x0 = None, domain: Optional[DomainSpec] = None,
                               y0_top: float = 0.05, y0_bottom: float = 0.005, y0_count: int = 6,
                               tolerance: float = SLOPE_TOLERANCE) -> MaximalSectionResult:
    """
    Walks y0 along the inner normal toward x0 (distances from y0_top
    down to y0_bottom) and fits max(M, 1) and d(y0) against h_bar.
    """

    alpha = alpha if alpha is not None else getattr(u, "alpha", None)
    if alpha is None or not 1 <= alpha < 2:
        raise ArgumentError("maximal section scaling needs alpha in [1, 2)")
    is_grid = isinstance(u, GridFunction)
    domain = domain or (u.grid.domain if is_grid else getattr(u, "domain", None))
    if domain is None:
        raise ArgumentError("a domain is required for maximal sections")
    if not 0 < y0_bottom < y0_top or y0_count < 2:
        raise ArgumentError("the y0 ray needs 0 < y0_bottom < y0_top and at least two points")
    dim = domain.dim
    x0 = domain.base_point if x0 is None else np.asarray(x0, dtype = float)
    frame = boundary_frame(domain, x0)
    phi = u.boundary if is_grid else u
    drift_limit = DRIFT_CELLS * u.grid.spacing if is_grid else 1e-6 * max(domain.scale, 1.0)
    phi_tau = _tangential(frame, phi.grad(x0[None, :])[0]) if phi is not None else None

    records, excluded, seen = [], [], set()
    deviation = 0.0
    for dist in np.geomspace(y0_top, y0_bottom, y0_count):
        y0 = x0 + dist * frame.normal
        if is_grid:
            node = u.grid.nearest(y0)
            if node in seen:
                continue
            seen.add(node)
            y0 = u.grid.points[node]
        try:
            ms = maximal_interior_section(u, y0, domain)
        except ConvexityViolationError as e:
            logger.info(f"excluding y0={y0.tolist()}: {e}")
            excluded.append(y0.tolist())
            continue
        drift = float(np.linalg.norm(ms.tangency - x0))
        if drift > drift_limit or ms.height <= 0:
            logger.info(f"excluding y0={y0.tolist()}: tangency drifted by {drift:.3e}")
            excluded.append(y0.tolist())
            continue
        grad_tau = _tangential(frame, ms.gradient)
        if phi_tau is not None:
            deviation = max(deviation, float(np.linalg.norm(grad_tau - phi_tau)))
        records.append({
            "y0_distance": float(dist), "d": float(distance_to_boundary(domain, y0)),
            "h_bar": float(ms.height), "M": float(ms.normal_slope),
            **{f"y{j + 1}": float(c) for j, c in enumerate(y0)},
        })
    if len(records) < MIN_PAIRS:
        raise ExperimentError(f"only {len(records)} usable y0 on the ray; need {MIN_PAIRS}")

    h_bar = [r["h_bar"] for r in records]
    box = None
    if alpha == 1:
        reports = [scaling_report("max(M,1)", [(hb, max(r["M"], 1.0)) for hb, r in zip(h_bar, records)],
                                  None, tolerance, report_only = True)]
        log_law = _log_law(records, dim)
    else:
        beta = (dim + alpha - 1.0) / dim
        reports = [
            scaling_report("max(M,1)", [(hb, max(r["M"], 1.0)) for hb, r in zip(h_bar, records)],
                           (1.0 - beta) / (2.0 - beta), tolerance),
            scaling_report("d(y0)", [(hb, r["d"]) for hb, r in zip(h_bar, records)],
                           1.0 / (2.0 - beta), tolerance),
        ]
        log_law = None
        if is_grid:
            box = _box_constants(u, records, 1.0 / (2.0 - beta))
    return MaximalSectionResult(alpha = alpha, records = records, excluded = excluded, reports = reports,
                                box_constants = box, gradient_deviation = deviation, log_law = log_law)


def _box_constants(u: GridFunction, records: List[Dict[str, float]], power: float) -> Optional[Tuple[float, float]]:
    """Measured c, C of {|x'|^2 + |x_n| <= c h^p} in S - y0 in {... <= C h^p}."""

    lows, highs = [], []
    dim = u.grid.dim
    for r in records:
        y0 = np.array([r[f"y{j + 1}"] for j in range(dim)])
        node = u.grid.locate(y0)
        sec = section(u, y0, r["h_bar"], slope = gradient(u, node), value = float(u.values[node]))
        if sec.size == 0:
            continue
        rel = u.grid.points - y0
        energy = np.sum(rel[:, :-1] ** 2, axis = -1) + np.abs(rel[:, -1])
        scale = r["h_bar"] ** power
        member = np.zeros(u.grid.size, dtype = bool)
        member[sec.members] = True
        highs.append(float(np.max(energy[member])) / scale)
        if np.any(~member):
            lows.append(float(np.min(energy[~member])) / scale)
    if not highs or not lows:
        return None
    return min(lows), max(highs)


####
##      SECTION SWEEP
#####
@dataclass(frozen = True)
class SectionSweep:
    """Boundary sections over dyadic heights with the b(h) pair bounds."""

    alpha: float
    rows: List[Dict[str, Any]]
    violations: List[Tuple[float, float]]
    nested: bool

    @property
    def passed(self) -> bool:
        return not self.violations and self.nested

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": "sections",
            "alpha": self.alpha,
            "heights": [r["h"] for r in self.rows],
            "b_bound_violations": [[a, b] for a, b in self.violations],
            "nested": self.nested,
            "pass": self.passed,
        }


def b_pair_bounds(h1: float, h2: float, alpha: float) -> Tuple[float, float]:
    """Admissible range of b(h1) / b(h2) for h1 <= h2."""

    return (h1 / h2) ** ((1.0 - alpha) / (2.0 - alpha)), (h2 / h1) ** (1.0 / (2.0 - alpha))


def section_sweep(u, x0 = None, h: Optional[Sequence[float]] = None, alpha: Optional[float] = None,
                  method: SlopeMethod = SlopeMethod.EXTRAPOLATED, rel_tol: float = 1e-9) -> SectionSweep:
    """Extents, d_h, b(h) and John axes of S_h(x0) for each height."""

    alpha = alpha if alpha is not None else getattr(u, "alpha", None)
    if alpha is None:
        raise ArgumentError("alpha is required for a section sweep")
    support = _support(u, x0, alpha, method)
    heights = sorted(h, reverse = True) if h else auto_h_list(u, alpha = alpha, method = method, support = support)
    if not heights:
        raise ExperimentError("no untruncated, resolved section heights")

    rows, members = [], []
    for height in heights:
        sec = _section(u, support, height)
        b = sec.normal_extent * height ** (-1.0 / (2.0 - alpha))
        row: Dict[str, Any] = {
            "h": float(height), "tangential_extent": sec.tangential_extent,
            "normal_extent": sec.normal_extent, "b_h": b, "truncated": int(sec.truncated),
        }
        if sec.grid is not None and sec.size:
            _, nor = sec.frame.coordinates(center_of_mass(sec)[None, :])
            row["d_h"] = float(nor[0])
            try:
                axes = john_ellipsoid(sec.points).axes
                row.update({f"axis{j + 1}": float(a) for j, a in enumerate(axes)})
            except RankError:
                logger.debug(f"section at h={height:g} is too thin for an ellipsoid")
            members.append(set(sec.members.tolist()))
        rows.append(row)

    kept = [r for r in rows if not r["truncated"] and r["b_h"] > 0]
    violations = []
    for i, big in enumerate(kept):
        for small in kept[i + 1:]:
            lo, hi = b_pair_bounds(small["h"], big["h"], alpha)
            ratio = small["b_h"] / big["b_h"]
            if ratio < lo * (1 - rel_tol) or ratio > hi * (1 + rel_tol):
                violations.append((small["h"], big["h"]))
    nested = all(small <= big for big, small in zip(members, members[1:]))
    return SectionSweep(alpha = alpha, rows = rows, violations = violations, nested = nested)
