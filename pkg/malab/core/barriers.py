"""
Explicit barriers.
Every family is written as

    v = c0 + p'.x' + x'^T A' x' / 2 + kappa g*(x') + psi(t) + l x_n,   t = x_n - g(x')

so that value, gradient, Hessian and det D^2 v = psi'' det(A' + kappa D^2 g* - psi' D^2 g)
share one implementation. Certificates sample the sub/supersolution
inequality and the boundary ordering the family claims.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from malab.core.domain import DomainSpec, halton
from malab.core.problem import AnalyticFunction, ProblemSpec, rhs_eval
from malab.core.scheme import GridFunction
from malab.core.types import BarrierFamily, DomainKind, Sense
from malab.utils import get_logger
from malab.utils.exceptions import ArgumentError, RangeError, SingularEvaluationError

logger = get_logger("MALab.Barriers")

CERTIFICATE_SAMPLES = 2 ** 14
PASS_FLOOR = -1e-10
FD_STEP = 1e-4

# Families, their admissible alpha and which use the curved boundary graph
_ALPHA_RANGE = {
    BarrierFamily.V0: (0.0, 1.0),
    BarrierFamily.VSTAR: (0.0, 1.0),
    BarrierFamily.U0: (0.0, 1.0),
    BarrierFamily.POINTED_W: (0.0, 1.0),
    BarrierFamily.VPLUS: (1.0, 2.0),
    BarrierFamily.VMINUS: (1.0, 2.0),
    BarrierFamily.PLANE_SHIFT: (0.0, 2.0),
}
_GRAPH_FAMILIES = {
    BarrierFamily.V0, BarrierFamily.VSTAR, BarrierFamily.VPLUS,
    BarrierFamily.VMINUS, BarrierFamily.LOG_ALPHA1,
}
_REQUIRED = {
    BarrierFamily.V0: ("mu", "Lambda"),
    BarrierFamily.VSTAR: ("mu", "Lambda", "C_star", "cap"),
    BarrierFamily.U0: (),
    BarrierFamily.POINTED_W: ("h", "C1", "Lambda"),
    BarrierFamily.VMINUS: ("C0", "C1"),
    BarrierFamily.VPLUS: ("c1", "C"),
    BarrierFamily.PLANE_SHIFT: ("c0", "p"),
}


####
##      BARRIER
#####
@dataclass(frozen = True)
class Barrier(AnalyticFunction):
    """
    A closed-form barrier. `params` holds the family constants; the
    boundary graph comes from `domain` (flat half space when None).
    """

    family: BarrierFamily
    alpha: float
    params: Dict[str, Any] = field(default_factory = dict)
    domain: Optional[DomainSpec] = None
    sense: Sense = Sense.BELOW
    dim: int = 2

    def __post_init__(self):
        family = BarrierFamily(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "sense", Sense(self.sense))
        if self.domain is not None:
            object.__setattr__(self, "dim", self.domain.dim)
        if self.dim < 2:
            raise ArgumentError("barriers are defined for dim >= 2")

        if family == BarrierFamily.LOG_ALPHA1:
            if self.alpha != 1:
                raise RangeError("LOG_ALPHA1 needs alpha = 1", "alpha == 1")
            required = ("C0", "C1") if self.sense == Sense.BELOW else ("c1", "C")
        else:
            lo, hi = _ALPHA_RANGE[family]
            if not lo < self.alpha < hi:
                raise RangeError(
                    f"{family.value} needs alpha in ({lo:g},{hi:g}), got {self.alpha}",
                    f"{lo:g} < alpha < {hi:g}",
                )
            required = _REQUIRED[family]
        missing = [k for k in required if k not in self.params]
        if missing:
            raise RangeError(f"{family.value} is missing parameters {missing}", "required parameters")
        for key in ("mu", "Lambda", "h", "C1", "C0", "c1", "cap"):
            if key in self.params and key in required and float(self.params[key]) <= 0:
                raise RangeError(f"{family.value} needs {key} > 0", f"{key} > 0")
        if float(self.params.get("shift", 0)) < 0:
            raise RangeError(f"{family.value} needs a nonnegative shift", "shift >= 0")
        if self.params.get("C_star", 0) < 0 or self.params.get("C", 0) < 0:
            raise RangeError(f"{family.value} needs nonnegative linear constants", "C >= 0")

        cap = self.params.get("cap")
        if cap is not None and family in (BarrierFamily.V0, BarrierFamily.VSTAR):
            t_max = self.height_limit()
            if cap > t_max:
                raise RangeError(
                    f"cap {cap:g} exceeds {t_max:.4g}, where det D^2 v0 >= Lambda (x_n - g)^(-alpha) may fail",
                    "cap <= (mu^n (1-alpha) / (Lambda kappa_max))^(1/(1-alpha))",
                )
        if cap is not None and family == BarrierFamily.LOG_ALPHA1 and cap >= math.exp(-1.0 / self.dim):
            raise RangeError("LOG_ALPHA1 is only defined for x_n - g < exp(-1/n)", "cap < exp(-1/n)")

    # ------------------------------------------------------------------
    # Family constants
    # ------------------------------------------------------------------
    @property
    def beta(self) -> float:
        return (self.dim + self.alpha - 1.0) / self.dim

    @property
    def uses_graph(self) -> bool:
        return self.family in _GRAPH_FAMILIES and self.domain is not None

    @property
    def base(self) -> np.ndarray:
        return self.domain.base_point if self.domain is not None else np.zeros(self.dim)

    def _p(self, key: str, default: float = 0.0) -> float:
        return float(self.params.get(key, default))

    @property
    def power_coefficient(self) -> float:
        """K in mu|x'|^2 + K t^(2-alpha) (and the analogous constants)."""

        n, a = self.dim, self.alpha
        if self.family in (BarrierFamily.V0, BarrierFamily.VSTAR):
            return self._p("Lambda") / ((2 - a) * (1 - a) * self._p("mu") ** (n - 1))
        if self.family == BarrierFamily.U0:
            return 1.0 / ((2 - a) * (1 - a))
        if self.family == BarrierFamily.POINTED_W:
            return self._p("Lambda") / ((2 - a) * (1 - a) * self.pointed_curvature ** (n - 1))
        return 0.0

    @property
    def pointed_exponent(self) -> float:
        """a with 2a = n / (n + 1 - alpha)."""

        return 0.5 * self.dim / (self.dim + 1 - self.alpha)

    @property
    def pointed_curvature(self) -> float:
        h = self._p("h")
        return h ** (1 - 2 * self.pointed_exponent) / self._p("C1") ** 2

    def quadratic_matrix(self) -> np.ndarray:
        m = self.dim - 1
        if self.family in (BarrierFamily.V0, BarrierFamily.VSTAR):
            return 2 * self._p("mu") * np.eye(m)
        if self.family == BarrierFamily.U0:
            return np.eye(m)
        if self.family == BarrierFamily.POINTED_W:
            return self.pointed_curvature * np.eye(m)
        return np.zeros((m, m))

    def affine_part(self) -> Tuple[float, np.ndarray, float]:
        """(c0, p', l)."""

        m = self.dim - 1
        fam = self.family
        if fam == BarrierFamily.PLANE_SHIFT:
            p = np.asarray(self.params["p"], dtype = float)
            if p.shape != (self.dim,):
                raise RangeError("PLANE_SHIFT slope must have one entry per dimension", "len(p) == n")
            return self._p("c0"), p[:-1], float(p[-1])
        if fam in (BarrierFamily.VMINUS, BarrierFamily.VPLUS, BarrierFamily.LOG_ALPHA1):
            grad0 = np.asarray(self.params.get("grad0", np.zeros(m)), dtype = float).reshape(m)
            lower = fam == BarrierFamily.VMINUS or (fam == BarrierFamily.LOG_ALPHA1 and self.sense == Sense.BELOW)
            ell = -self._p("C1") if lower else self._p("C")
            return self._p("phi0"), grad0, ell
        if fam == BarrierFamily.VSTAR:
            return 0.0, np.zeros(m), -self._p("C_star")
        if fam == BarrierFamily.POINTED_W:
            return 0.0, np.zeros(m), self._p("epsilon")
        if fam == BarrierFamily.V0:
            return -self._p("shift"), np.zeros(m), 0.0
        return 0.0, np.zeros(m), 0.0

    @property
    def kappa(self) -> float:
        return self._p("C_star") if self.family == BarrierFamily.VSTAR else 0.0

    def psi(self, t: np.ndarray, order: int = 2) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """psi(t) and its first two derivatives (derivatives only when order allows)."""

        fam, a, n = self.family, self.alpha, self.dim
        t = np.asarray(t, dtype = float)
        zero = np.zeros_like(t)
        if fam == BarrierFamily.PLANE_SHIFT:
            return zero, zero, zero
        safe = np.where(t > 0, t, 1.0)

        if fam in (BarrierFamily.VMINUS, BarrierFamily.VPLUS):
            b = self.beta
            c = self._p("C0") if fam == BarrierFamily.VMINUS else self._p("c1")
            value = -c * np.clip(t, 0.0, None) ** (2 - b) / (2 - b)
            d1 = np.where(t > 0, -c * safe ** (1 - b), -np.inf) if order >= 1 else zero
            d2 = np.where(t > 0, c * (b - 1) * safe ** (-b), np.inf) if order >= 2 else zero
            return value, d1, d2

        if fam == BarrierFamily.LOG_ALPHA1:
            c = self._p("C0") if self.sense == Sense.BELOW else self._p("c1")
            big_l = -np.log(safe)
            value = np.where(t > 0, -c * safe * np.abs(big_l) ** (1.0 / n), 0.0)
            d1 = -c * big_l ** (1.0 / n) + (c / n) * big_l ** (1.0 / n - 1) if order >= 1 else zero
            d2 = (c / (n * safe)) * big_l ** (1.0 / n - 2) * (big_l + 1 - 1.0 / n) if order >= 2 else zero
            return value, d1, d2

        k = self.power_coefficient
        value = k * np.clip(t, 0.0, None) ** (2 - a)
        d1 = k * (2 - a) * np.clip(t, 0.0, None) ** (1 - a)
        d2 = np.where(t > 0, k * (2 - a) * (1 - a) * safe ** (-a), np.inf) if order >= 2 else zero
        return value, d1, d2

    # ------------------------------------------------------------------
    # Boundary graph and its capped envelope
    # ------------------------------------------------------------------
    def _graph(self, xp: np.ndarray):
        m = xp.shape[1]
        if not self.uses_graph:
            return np.zeros(xp.shape[0]), np.zeros_like(xp), np.zeros((xp.shape[0], m, m))
        graph = self.domain.graph
        return graph.value(xp), graph.gradient(xp), graph.hessian(xp)

    def envelope_radius(self) -> Tuple[float, float]:
        """(L*, r*): slope cap of g* and the radius where gamma' reaches it."""

        slope_cap = 0.5 * self._p("cap") * self.domain.rho
        graph = self.domain.graph
        if graph.is_flat:
            return slope_cap, math.inf

        def excess(r):
            return float(graph.gamma(np.array([r]))[1][0]) - slope_cap

        hi = graph.max_radius * (1 - 1e-12) if math.isfinite(graph.max_radius) else 1.0
        while math.isinf(graph.max_radius) and excess(hi) < 0:
            hi *= 2.0
        if excess(hi) < 0:
            return slope_cap, math.inf
        return slope_cap, float(brentq(excess, 0.0, hi, xtol = 1e-14))

    def _envelope(self, xp: np.ndarray):
        """g*, grad g*, D^2 g* for VSTAR."""

        m = xp.shape[1]
        if self.family != BarrierFamily.VSTAR or not self.uses_graph:
            return np.zeros(xp.shape[0]), np.zeros_like(xp), np.zeros((xp.shape[0], m, m))
        slope_cap, r_star = self.envelope_radius()
        r = np.linalg.norm(xp, axis = -1)
        inner = r <= r_star
        value = np.empty(xp.shape[0])
        grad = np.empty_like(xp)
        hess = np.empty((xp.shape[0], m, m))
        if np.any(inner):
            g, dg, d2g = self._graph(xp[inner])
            value[inner], grad[inner], hess[inner] = g, dg, d2g
        outer = ~inner
        if np.any(outer):
            g_star = float(self.domain.graph.gamma(np.array([r_star]))[0][0])
            ro = r[outer]
            unit = xp[outer] / ro[:, None]
            value[outer] = g_star + slope_cap * (ro - r_star)
            grad[outer] = slope_cap * unit
            proj = np.eye(m) - unit[:, :, None] * unit[:, None, :]
            hess[outer] = (slope_cap / ro)[:, None, None] * proj
        return value, grad, hess

    def smooth_at(self, points, margin: float = 10 * FD_STEP) -> np.ndarray:
        """Points where the closed form is C^2 in a neighborhood (away from the g* kink)."""

        pts = np.atleast_2d(points)
        if self.family != BarrierFamily.VSTAR or not self.uses_graph:
            return np.ones(pts.shape[0], dtype = bool)
        _, r_star = self.envelope_radius()
        r = np.linalg.norm(pts[:, :-1] - self.base[:-1], axis = -1)
        return np.abs(r - r_star) > margin

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------
    def _split(self, points, strict: bool):
        pts = np.atleast_2d(np.asarray(points, dtype = float))
        if pts.shape[1] != self.dim:
            raise ArgumentError(f"expected points of dimension {self.dim}")
        xp = pts[:, :-1] - self.base[:-1]
        g, dg, d2g = self._graph(xp)
        t = pts[:, -1] - self.base[-1] - g
        if self.family != BarrierFamily.PLANE_SHIFT:
            if np.any(t < -1e-12) or (strict and np.any(t <= 0)):
                raise SingularEvaluationError(f"{self.family.value} evaluated on or below its singular set")
            if self.family == BarrierFamily.LOG_ALPHA1 and np.any(t >= 1):
                raise SingularEvaluationError("LOG_ALPHA1 evaluated at x_n - g >= 1")
        return pts, xp, np.clip(t, 0.0, None), g, dg, d2g

    def eval(self, points) -> np.ndarray:
        pts, xp, t, *_ = self._split(points, strict = False)
        c0, p, ell = self.affine_part()
        a_mat = self.quadratic_matrix()
        psi, _, _ = self.psi(t, order = 0)
        g_star, _, _ = self._envelope(xp)
        quad = 0.5 * np.einsum("ni,ij,nj->n", xp, a_mat, xp)
        return c0 + xp @ p + quad + self.kappa * g_star + psi + ell * (pts[:, -1] - self.base[-1])

    def grad(self, points) -> np.ndarray:
        pts, xp, t, g, dg, _ = self._split(points, strict = self.family in (BarrierFamily.VMINUS, BarrierFamily.VPLUS, BarrierFamily.LOG_ALPHA1))
        c0, p, ell = self.affine_part()
        _, d1, _ = self.psi(t, order = 1)
        _, dg_star, _ = self._envelope(xp)
        out = np.empty_like(pts)
        out[:, :-1] = p + xp @ self.quadratic_matrix() + self.kappa * dg_star - d1[:, None] * dg
        out[:, -1] = d1 + ell
        return out

    def tangential_block(self, points):
        """(A' + kappa D^2 g* - psi' D^2 g, psi'' , grad g) at strictly interior points."""

        pts, xp, t, g, dg, d2g = self._split(points, strict = self.family != BarrierFamily.PLANE_SHIFT)
        _, d1, d2 = self.psi(t)
        _, _, h_star = self._envelope(xp)
        block = self.quadratic_matrix()[None, :, :] + self.kappa * h_star - d1[:, None, None] * d2g
        return block, d2, dg

    def hess(self, points) -> np.ndarray:
        block, d2, dg = self.tangential_block(points)
        n = self.dim
        out = np.zeros((block.shape[0], n, n))
        out[:, :-1, :-1] = block + d2[:, None, None] * dg[:, :, None] * dg[:, None, :]
        out[:, :-1, -1] = -d2[:, None] * dg
        out[:, -1, :-1] = out[:, :-1, -1]
        out[:, -1, -1] = d2
        return out

    def det_hessian(self, points) -> np.ndarray:
        block, d2, _ = self.tangential_block(points)
        return d2 * np.linalg.det(block)

    def height_limit(self) -> float:
        """Largest cap for which det D^2 v0 >= Lambda t^(-alpha) is guaranteed."""

        kappa = self.max_curvature()
        if kappa <= 0:
            return math.inf
        n, a = self.dim, self.alpha
        mu, lam = self._p("mu"), self._p("Lambda")
        return (mu ** n * (1 - a) / (lam * kappa)) ** (1.0 / (1 - a))

    def max_curvature(self, samples: int = 512) -> float:
        """Largest eigenvalue of D^2 g over the base of the domain."""

        if not self.uses_graph or self.domain.graph.is_flat:
            return 0.0
        graph = self.domain.graph
        reach = graph.max_radius if math.isfinite(graph.max_radius) else self.domain.base_radius
        r = np.linspace(0.0, reach, samples, endpoint = not math.isfinite(graph.max_radius))
        if self.domain.kind == DomainKind.GRAPH:
            r = r[graph.gamma(r)[0] <= self.domain.height]
        cap = self.params.get("cap")
        if cap is not None:
            r = r[graph.gamma(r)[0] <= cap]
        _, _, g2, g1r = graph.gamma(r)
        return float(np.max(np.maximum(g2, g1r)))

    def to_dict(self) -> Dict[str, Any]:
        params = {k: (list(map(float, v)) if isinstance(v, (list, tuple, np.ndarray)) else float(v))
                  for k, v in sorted(self.params.items())}
        return {"family": self.family.value, "alpha": self.alpha, "sense": self.sense.value, "parameters": params}


def make_barrier(family, problem: ProblemSpec, sense: Optional[Sense] = None, **params) -> Barrier:
    """Barrier on the problem's domain; v+/v- and log families take phi(0), grad phi(0) from the problem."""

    family = BarrierFamily(family)
    if sense is None:
        sense = Sense.ABOVE if family == BarrierFamily.VPLUS else Sense.BELOW
    if family in (BarrierFamily.VMINUS, BarrierFamily.VPLUS, BarrierFamily.LOG_ALPHA1):
        base = problem.domain.base_point[None, :]
        params.setdefault("phi0", float(problem.phi.eval(base)[0]))
        params.setdefault("grad0", problem.phi.grad(base)[0][:-1].tolist())
    return Barrier(family = family, alpha = problem.alpha, params = params,
                   domain = problem.domain, sense = sense)


####
##      SCALED FUNCTION
#####
@dataclass(frozen = True)
class ScaledFunction(AnalyticFunction):
    """factor * base."""

    base: Any
    factor: float

    @property
    def dim(self) -> int:
        return self.base.dim

    def eval(self, points) -> np.ndarray:
        return self.factor * np.asarray(self.base.eval(points))

    def grad(self, points) -> np.ndarray:
        return self.factor * self.base.grad(points)

    def hess(self, points) -> np.ndarray:
        return self.factor * self.base.hess(points)


# -- checks -------------------------------------------------------------

def det_hessian_crosscheck(b: Barrier, samples, step: Optional[float] = None) -> float:
    """Max relative deviation between closed-form det D^2 b and central differences of eval."""

    pts = np.atleast_2d(np.asarray(samples, dtype = float))
    scale = b.domain.scale if b.domain is not None else 1.0
    step = FD_STEP * scale if step is None else step
    pts = pts[b.smooth_at(pts, 10 * step)]
    n = b.dim
    closed = b.det_hessian(pts)
    hess = b.hess(pts)
    eye = np.eye(n) * step
    fd = np.empty((pts.shape[0], n, n))
    for i in range(n):
        for j in range(i, n):
            val = (b.eval(pts + eye[i] + eye[j]) - b.eval(pts + eye[i] - eye[j])
                   - b.eval(pts - eye[i] + eye[j]) + b.eval(pts - eye[i] - eye[j])) / (4 * step * step)
            fd[:, i, j] = fd[:, j, i] = val
    fd_det = np.linalg.det(fd)
    norm = np.max(np.abs(hess), axis = (1, 2))
    denom = np.maximum(np.abs(closed), 1e-6 * np.maximum(norm, 1.0) ** n)
    return float(np.max(np.abs(fd_det - closed) / denom)) if pts.shape[0] else 0.0


####
##      CERTIFICATE
#####
@dataclass(frozen = True)
class Certificate:
    """Outcome of a sampled barrier inequality check."""

    family: str
    parameters: Dict[str, Any]
    region: Dict[str, Any]
    kind: str
    samples: int
    worst_margin: float
    witness: List[float]
    passed: bool
    margins: Dict[str, float] = field(default_factory = dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "parameters": self.parameters,
            "region": self.region,
            "kind": self.kind,
            "samples": self.samples,
            "worst_margin": self.worst_margin,
            "witness": self.witness,
            "pass": self.passed,
            "margins": self.margins,
        }


def _region_samples(domain: DomainSpec, cap: float, count: int) -> np.ndarray:
    lo, hi = domain.bounding_box()
    base = domain.base_point
    hi = hi.copy()
    hi[-1] = min(hi[-1], base[-1] + cap)
    pts = lo + (hi - lo) * halton(count, domain.dim)
    return pts[domain.contains(pts)]


def _lower_graph_samples(domain: DomainSpec, cap: float, count: int) -> np.ndarray:
    z = domain.sample_boundary(count)
    base = domain.base_point
    reach = np.linalg.norm(z[:, :-1] - base[:-1], axis = -1) < domain.graph.max_radius * (1 - 1e-9)
    z = z[reach & (z[:, -1] - base[-1] <= cap)]
    on_graph = np.abs(z[:, -1] - domain.lower_graph(z[:, :-1])) <= 1e-9 * max(domain.scale, 1.0)
    return z[on_graph]


def _cap_samples(domain: DomainSpec, cap: float, count: int) -> np.ndarray:
    lo, hi = domain.bounding_box()
    m = domain.dim - 1
    level = domain.base_point[-1] + cap
    if m == 1:
        xp = np.linspace(lo[0], hi[0], count)[:, None]
    else:
        xp = lo[:-1] + (hi[:-1] - lo[:-1]) * halton(count, m)
    pts = np.column_stack([xp, np.full(xp.shape[0], level)])
    return pts[domain.contains(pts)]


def certify_subsolution(b: Barrier, prob: ProblemSpec, region: Optional[Dict[str, Any]] = None,
                        margin_kind: str = "full", solution: Optional[GridFunction] = None,
                        cap_floor: Optional[float] = None, samples: int = CERTIFICATE_SAMPLES) -> Certificate:
    """
    Lower barriers: det D^2 b >= Lambda f and b <= phi, b <= floor on the cap.
    Upper barriers: det D^2 b <= lambda f and b >= phi, b >= max phi on the cap.
    Margins are relative; the certificate passes when all are >= 0.
    """

    if margin_kind not in ("equation", "boundary", "full"):
        raise ArgumentError(f"unknown margin kind '{margin_kind}'")
    domain = prob.domain
    region = dict(region or {})
    cap = float(region.get("cap", b.params.get("cap", domain.rho / 2)))
    region["cap"] = cap
    if b.family == BarrierFamily.LOG_ALPHA1 and cap >= math.exp(-1.0 / b.dim):
        raise RangeError("LOG_ALPHA1 certificates need cap < exp(-1/n)", "cap < exp(-1/n)")
    lower = b.sense == Sense.BELOW
    worst, witness = math.inf, []
    margins: Dict[str, float] = {}
    count = 0

    def record(name: str, values: np.ndarray, points: np.ndarray):
        nonlocal worst, witness, count
        if values.size == 0:
            return
        k = int(np.argmin(values))
        margins[name] = float(values[k])
        count += int(values.size)
        if values[k] < worst:
            worst, witness = float(values[k]), points[k].tolist()

    if margin_kind in ("equation", "full"):
        pts = _region_samples(domain, cap, samples)
        if solution is not None:
            nodes = solution.grid.points
            pts = np.vstack([pts, nodes[nodes[:, -1] - domain.base_point[-1] <= cap]])
        f = rhs_eval(prob, pts, alpha = prob.alpha if b.family != BarrierFamily.LOG_ALPHA1 else 1.0)
        det = b.det_hessian(pts)
        if lower:
            target = prob.scale.upper / prob.scale(pts) * f
            record("equation", (det - target) / target, pts)
        else:
            target = prob.scale.lower / prob.scale(pts) * f
            record("equation", (target - det) / target, pts)

    if margin_kind in ("boundary", "full"):
        z = _lower_graph_samples(domain, cap, samples)
        phi = prob.phi.eval(z)
        v = b.eval(z)
        record("boundary", ((phi - v) if lower else (v - phi)) / (1 + np.abs(phi)), z)

        top = _cap_samples(domain, cap, max(64, samples // 64))
        if lower:
            if cap_floor is None and solution is None:
                raise RangeError("lower barrier certificates need a solution or an explicit cap_floor", "cap_floor")
            floor = float(cap_floor) if cap_floor is not None else float(np.min(solution.extended()))
            record("cap", (floor - b.eval(top)) / (1 + abs(floor)), top)
        else:
            ceiling = float(np.max(prob.phi.eval(domain.sample_boundary(4096))))
            record("cap", (b.eval(top) - ceiling) / (1 + abs(ceiling)), top)

    passed = worst >= PASS_FLOOR
    logger.debug(f"{b.family.value} certificate ({margin_kind}): worst margin {worst:.3e}")
    return Certificate(
        family = b.family.value, parameters = b.to_dict()["parameters"], region = region,
        kind = ("subsolution" if lower else "supersolution") + f"/{margin_kind}",
        samples = count, worst_margin = worst, witness = witness, passed = passed, margins = margins,
    )


def certify_supersolution(b: Barrier, prob: ProblemSpec, **kwargs) -> Certificate:
    if b.sense != Sense.ABOVE:
        raise ArgumentError("supersolution certificates need an upper barrier")
    return certify_subsolution(b, prob, **kwargs)


####
##      CONSTANT SEARCH
#####
@dataclass(frozen = True)
class ConstantSearch:
    """Result of a doubling/bisection search for a certificate-passing constant."""

    name: str
    value: Optional[float]
    found: bool
    certificate: Optional[Certificate]
    trace: List[Dict[str, Any]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "constant": self.name, "value": self.value, "found": self.found,
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "trace": self.trace,
        }


def search_constant(name: str, build: Callable[[float], Barrier], check: Callable[[Barrier], Certificate],
                    start: float = 1.0, increasing: bool = True, steps: int = 40,
                    bisections: int = 30) -> ConstantSearch:
    """
    Doubles (increasing=True) or halves the constant until the certificate
    passes, then bisects back toward the boundary of the passing range.
    When no value passes, the last failing certificate is returned.
    """

    trace: List[Dict[str, Any]] = []

    def attempt(value: float) -> Optional[Certificate]:
        try:
            cert = check(build(value))
        except RangeError as e:
            trace.append({"value": value, "passed": False, "error": e.condition})
            return None
        trace.append({"value": value, "passed": cert.passed, "worst_margin": cert.worst_margin})
        return cert

    value, failing = start, None
    passing_cert, failing_cert = None, None
    for _ in range(steps):
        cert = attempt(value)
        if cert is not None and cert.passed:
            passing_cert = cert
            break
        failing_cert = cert or failing_cert
        failing = value
        value = value * 2.0 if increasing else value * 0.5
    if passing_cert is None:
        logger.info(f"no passing value for {name} within {steps} steps")
        return ConstantSearch(name, None, False, failing_cert, trace)

    good = value
    if failing is not None:
        bad = failing
        for _ in range(bisections):
            mid = math.sqrt(good * bad)
            cert = attempt(mid)
            if cert is not None and cert.passed:
                good, passing_cert = mid, cert
            else:
                bad = mid
            if abs(good - bad) <= 1e-6 * good:
                break
    return ConstantSearch(name, good, True, passing_cert, trace)


def compare_to_solution(b, u, region: Optional[Dict[str, Any]] = None, sense: Sense = Sense.BELOW,
                        tolerance: Optional[float] = None, points: Optional[np.ndarray] = None) -> Certificate:
    """
    Node-wise ordering b <= u (below) or b >= u (above) with tolerance
    2 h^min(2, 2-alpha) max(1, max|u|).
    """

    sense = Sense(sense)
    if isinstance(u, GridFunction):
        nodes = u.grid.points
        values = u.values
        spacing = u.grid.spacing
        alpha = u.alpha if u.alpha is not None else 0.0
        base = u.grid.domain.base_point
    else:
        if points is None:
            raise ArgumentError("analytic comparisons need sample points")
        nodes = np.atleast_2d(points)
        values = np.asarray(u.eval(nodes))
        spacing, alpha, base = 0.0, 0.0, np.zeros(nodes.shape[1])
    region = dict(region or {})
    if "cap" in region:
        keep = nodes[:, -1] - base[-1] <= float(region["cap"])
        nodes, values = nodes[keep], values[keep]
    if tolerance is None:
        scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
        tolerance = 2.0 * spacing ** min(2.0, 2.0 - alpha) * scale
    bv = np.asarray(b.eval(nodes))
    margin = values - bv if sense == Sense.BELOW else bv - values
    k = int(np.argmin(margin)) if margin.size else 0
    worst = float(margin[k]) if margin.size else math.inf
    family = b.family.value if isinstance(b, Barrier) else type(b).__name__
    params = b.to_dict()["parameters"] if isinstance(b, Barrier) else {}
    return Certificate(
        family = family, parameters = params, region = region, kind = f"ordering/{sense.value}",
        samples = int(margin.size), worst_margin = worst,
        witness = nodes[k].tolist() if margin.size else [], passed = worst >= -tolerance,
        margins = {"tolerance": float(tolerance)},
    )
