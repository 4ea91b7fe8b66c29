"""
Experiment jobs.
One function per command; each takes a validated RunConfig and an alpha
and returns a JobOutcome holding the report, the plot-ready rows and the
pass flag. Jobs share no mutable state.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from malab.cli.config import Command, RunConfig
from malab.core.barriers import (
    Barrier, Certificate, certify_subsolution,
    compare_to_solution, det_hessian_crosscheck, search_constant
)
from malab.core.domain import DomainSpec
from malab.core.problem import ProblemSpec, RadialDiskSolution, solve_1d
from malab.core.scheme import GridFunction, discrete_convexity_defect
from malab.core.solver import solve
from malab.core.types import BarrierFamily, DomainKind, Sense, Weight
from malab.core.verify import (
    liouville_residual, localization_experiment, maximal_section_experiment,
    section_sweep, tangential_expansion_experiment
)
from malab.utils import get_logger
from malab.utils.exceptions import RangeError

logger = get_logger("MALab.Jobs")

CROSSCHECK_TOLERANCE = 1e-5
CROSSCHECK_SAMPLES = 100
# Starting downward shift of V0 when the cap margin is searched
V0_SHIFT = 1e-3


####
##      JOB OUTCOME
#####
@dataclass
class JobOutcome:
    """What one job hands back to the runner."""

    name: str
    command: Command
    alpha: float
    report: Dict[str, Any]
    rows: List[Dict[str, Any]]
    passed: bool
    summary: str
    solution: Optional[GridFunction] = field(default = None, repr = False)


def job_name(command: Command, alpha: float, matrix: bool) -> str:
    return f"{command.value}-alpha{alpha:g}" if matrix else command.value


def _verdict(passed: bool) -> str:
    return "PASS" if passed else "FAIL"


# -- shared pieces ---------------------------------------------------------

def _x0(config: RunConfig, domain: DomainSpec) -> np.ndarray:
    x0 = config.experiment.x0
    return domain.base_point if x0 is None else np.asarray(x0, dtype = float)


def _heights(config: RunConfig) -> Optional[List[float]]:
    h = config.experiment.h
    return None if h == "auto" else list(h)


def _solution(config: RunConfig, problem: ProblemSpec):
    """The function experiments measure: a solve, or the radial oracle."""

    if config.experiment.source == "radial":
        return RadialDiskSolution(problem.domain, problem.alpha, s = problem.scale.s0)
    return solve(problem, config.spacing(), config.stencil(), config.solver_options())


def _solve_rows(u: GridFunction) -> List[Dict[str, Any]]:
    return [dict(row) for row in u.history]


# -- solve -----------------------------------------------------------------

def _oracle(problem: ProblemSpec):
    """Closed-form solution of the same problem when one is known."""

    domain = problem.domain
    constant_scale = problem.scale.is_constant
    if domain.kind == DomainKind.INTERVAL and constant_scale and problem.scale.s0 == 1.0 \
            and problem.weight != Weight.DISTANCE:
        ends = np.array([[0.0], [domain.length]])
        values = problem.phi.eval(ends)
        return solve_1d(problem.alpha, (0.0, domain.length), (float(values[0]), float(values[1])))
    if domain.kind == DomainKind.DISK and domain.dim == 2 and problem.phi.tag == "zero" \
            and problem.weight == Weight.DISTANCE and constant_scale:
        return RadialDiskSolution(domain, problem.alpha, s = problem.scale.s0)
    return None


def solve_job(config: RunConfig, alpha: float, name: str) -> JobOutcome:
    problem = config.build_problem(alpha)
    u = solve(problem, config.spacing(), config.stencil(), config.solver_options())
    report: Dict[str, Any] = {
        "experiment": "solve",
        "alpha": alpha,
        "spacing": u.grid.spacing,
        "nodes": u.grid.size,
        "boundary_points": u.grid.boundary_size,
        "newton_steps": len(u.history),
        "final_residual": u.history[-1]["residual"] if u.history else None,
        "pointwise_residual": u.history[-1].get("pointwise_residual") if u.history else None,
        "convexity_defect": discrete_convexity_defect(u),
        "boundary_data_continuous": problem.check_boundary_data(),
    }
    passed = True
    oracle = _oracle(problem)
    if oracle is not None:
        error = float(np.max(np.abs(u.values - np.asarray(oracle.eval(u.grid.points)))))
        report["oracle"] = type(oracle).__name__
        report["oracle_error"] = error
        report["tolerance"] = config.experiment.tolerance
        passed = error <= config.experiment.tolerance
    report["pass"] = passed
    detail = f"residual {report['final_residual']:.2e}"
    if oracle is not None:
        detail += f", oracle error {report['oracle_error']:.2e}"
    return JobOutcome(name, Command.SOLVE, alpha, report, _solve_rows(u), passed,
                      f"{name}: {_verdict(passed)} ({u.grid.size} nodes, {detail})", solution = u)


# -- sections ----------------------------------------------------------------

def sections_job(config: RunConfig, alpha: float, name: str) -> JobOutcome:
    problem = config.build_problem(alpha)
    u = _solution(config, problem)
    sweep = section_sweep(u, _x0(config, problem.domain), _heights(config), alpha,
                          method = config.experiment.slope_method)
    report = sweep.to_dict()
    summary = (f"{name}: {_verdict(sweep.passed)} ({len(sweep.rows)} heights, "
               f"{len(sweep.violations)} b(h) violations, nested={sweep.nested})")
    return JobOutcome(name, Command.SECTIONS, alpha, report, sweep.rows, sweep.passed, summary)


# -- scaling -----------------------------------------------------------------

def scaling_job(config: RunConfig, alpha: float, name: str) -> JobOutcome:
    exp = config.experiment
    problem = config.build_problem(alpha)
    u = _solution(config, problem)
    x0 = _x0(config, problem.domain)
    result = localization_experiment(u, x0, _heights(config), alpha,
                                     method = exp.slope_method, tolerance = exp.tolerance)
    report = result.to_dict()
    passed = result.passed
    lines = [result.tangential.summary(), result.normal.summary()]

    if exp.expansion and alpha < 1 and isinstance(u, GridFunction):
        f0 = float(problem.scale(x0[None, :])[0])
        expansion = tangential_expansion_experiment(u, x0, _heights(config), alpha, f0 = f0,
                                                    matrix = problem.phi.tangential_matrix)
        report["expansion"] = expansion.to_dict()
        passed = passed and expansion.passed
        lines.append(f"a_hat {expansion.a_hat:.4f} predicted {expansion.predicted:.4f} "
                     f"eta monotone={expansion.monotone}")
    report["pass"] = passed
    summary = f"{name}: {_verdict(passed)} | " + " | ".join(lines)
    return JobOutcome(name, Command.SCALING, alpha, report, result.rows, passed, summary)


# -- maximal sections --------------------------------------------------------

def maxsection_job(config: RunConfig, alpha: float, name: str) -> JobOutcome:
    exp = config.experiment
    problem = config.build_problem(alpha)
    u = _solution(config, problem)
    result = maximal_section_experiment(
        u, alpha, _x0(config, problem.domain), problem.domain,
        y0_top = exp.y0_top, y0_bottom = exp.y0_bottom, y0_count = exp.y0_count,
        tolerance = exp.tolerance,
    )
    summary = f"{name}: {_verdict(result.passed)} | " + " | ".join(r.summary() for r in result.reports)
    return JobOutcome(name, Command.MAXSECTION, alpha, result.to_dict(), result.records,
                      result.passed, summary)


# -- liouville ---------------------------------------------------------------

def liouville_job(config: RunConfig, alpha: float, name: str) -> JobOutcome:
    exp = config.experiment
    spacing = config.spacing(default = 1.0 / 256)
    runs = [
        liouville_residual(alpha, spacing = s, box = exp.box, stencil_width = config.solver.stencil_width,
                           tolerance = exp.residual_tol)
        for s in (2.0 * spacing, spacing)
    ]
    coarse, fine = runs
    order = None
    if coarse.residual > 0 and fine.residual > 0:
        order = math.log(coarse.residual / fine.residual, 2.0)
    report = fine.to_dict()
    report["coarse"] = coarse.to_dict()
    report["observed_order"] = order
    rows = [{"spacing": r.spacing, "residual": r.residual, "nodes": r.nodes} for r in runs]
    order_text = "-" if order is None else f"{order:.2f}"
    summary = (f"{name}: {_verdict(fine.passed)} (residual {fine.residual:.3e} at h={spacing:g}, "
               f"order {order_text})")
    return JobOutcome(name, Command.LIOUVILLE, alpha, report, rows, fine.passed, summary)


# -- barriers ----------------------------------------------------------------

@dataclass(frozen = True)
class BarrierPlan:
    """How one family is certified: the searched constant and the margin kind."""

    family: BarrierFamily
    sense: Sense
    searched: Optional[str] = None
    together: Tuple[str, ...] = ()
    margin: Optional[str] = None


_PLANS = {
    BarrierFamily.V0: [BarrierPlan(BarrierFamily.V0, Sense.BELOW, "shift", margin = "full")],
    BarrierFamily.VSTAR: [BarrierPlan(BarrierFamily.VSTAR, Sense.BELOW, "C_star", margin = "full")],
    BarrierFamily.VMINUS: [BarrierPlan(BarrierFamily.VMINUS, Sense.BELOW, "C0", ("C1",), margin = "full")],
    BarrierFamily.VPLUS: [BarrierPlan(BarrierFamily.VPLUS, Sense.ABOVE, "C", margin = "full")],
    BarrierFamily.LOG_ALPHA1: [
        BarrierPlan(BarrierFamily.LOG_ALPHA1, Sense.BELOW, "C0", ("C1",), margin = "full"),
        BarrierPlan(BarrierFamily.LOG_ALPHA1, Sense.ABOVE, "C", margin = "full"),
    ],
    BarrierFamily.U0: [BarrierPlan(BarrierFamily.U0, Sense.BELOW)],
    BarrierFamily.POINTED_W: [BarrierPlan(BarrierFamily.POINTED_W, Sense.BELOW)],
    BarrierFamily.PLANE_SHIFT: [BarrierPlan(BarrierFamily.PLANE_SHIFT, Sense.BELOW)],
}


def default_families(alpha: float) -> List[BarrierFamily]:
    if alpha < 1:
        return [BarrierFamily.V0, BarrierFamily.VSTAR]
    if alpha > 1:
        return [BarrierFamily.VMINUS, BarrierFamily.VPLUS]
    return [BarrierFamily.LOG_ALPHA1]


def _curvature(problem: ProblemSpec, cap: float) -> float:
    trial = Barrier(family = BarrierFamily.VMINUS, alpha = 1.5, params = {"C0": 1.0, "C1": 1.0, "cap": cap},
                    domain = problem.domain, sense = Sense.BELOW)
    return trial.max_curvature()


def barrier_defaults(plan: BarrierPlan, problem: ProblemSpec, cap: float) -> Dict[str, Any]:
    """Starting constants of a family before config overrides."""

    n, alpha = problem.dim, problem.alpha
    lam, big_lam = problem.scale.lower, problem.scale.upper
    fam = plan.family
    if fam in (BarrierFamily.V0, BarrierFamily.VSTAR):
        lowest = float(np.min(np.linalg.eigvalsh(problem.phi.tangential_matrix)))
        mu = problem.mu if problem.mu is not None else (0.5 * lowest if lowest > 0 else 0.25)
        params = {"mu": mu, "Lambda": big_lam}
        if fam == BarrierFamily.VSTAR:
            params.update({"C_star": 1.0, "cap": cap})
        else:
            params["shift"] = V0_SHIFT
        return params
    if fam == BarrierFamily.POINTED_W:
        return {"h": 0.1, "C1": 1.0, "Lambda": big_lam, "epsilon": 0.0}
    if fam == BarrierFamily.PLANE_SHIFT:
        return {"c0": 0.0, "p": [0.0] * n}
    if fam == BarrierFamily.U0:
        return {}
    kappa = _curvature(problem, cap)
    if plan.sense == Sense.BELOW:
        return {"C0": 1.0, "C1": 1.0, "cap": cap}
    # det D^2 v+ ~ c1^n kappa^(n-1) w^(-alpha) up to a family constant; keep it below lambda
    if fam == BarrierFamily.VPLUS:
        beta = (n + alpha - 1.0) / n
        factor = (beta - 1.0) * kappa ** (n - 1)
    else:
        factor = kappa ** (n - 1) / n
    c1 = 0.5 * (lam / factor) ** (1.0 / n) if factor > 0 else 1.0
    return {"c1": c1, "C": 1.0, "cap": cap}


def _barrier_cap(config: RunConfig, problem: ProblemSpec, family: BarrierFamily) -> float:
    cap = config.experiment.cap or problem.domain.rho / 2.0
    if family == BarrierFamily.LOG_ALPHA1:
        cap = min(cap, 0.5 * math.exp(-1.0 / problem.dim))
    if family in (BarrierFamily.V0, BarrierFamily.VSTAR):
        defaults = barrier_defaults(BarrierPlan(BarrierFamily.V0, Sense.BELOW), problem, cap)
        limit = Barrier(family = BarrierFamily.V0, alpha = problem.alpha, params = defaults,
                        domain = problem.domain).height_limit()
        cap = min(cap, 0.9 * limit)
    return cap


def _crosscheck_samples(domain: DomainSpec, cap: float, count: int) -> np.ndarray:
    """Interior samples in the band cap/10 < x_n - g(x') and x_n <= cap."""

    pts = domain.sample_interior(32 * count)
    base = domain.base_point
    t = pts[:, -1] - domain.lower_graph(pts[:, :-1])
    # fixed-step differences of t^(2-beta) lose accuracy like (step / t)^2
    floor = max(1e-3 * domain.scale, 0.1 * cap)
    keep = (t > floor) & (pts[:, -1] - base[-1] <= cap)
    return pts[keep][:count]


@dataclass
class _Reference:
    """What certificates and ordering checks compare against."""

    solution: Any = None
    cap_floor: Optional[float] = None
    points: Optional[np.ndarray] = None

    @property
    def grid_solution(self) -> Optional[GridFunction]:
        return self.solution if isinstance(self.solution, GridFunction) else None


def _certify_plan(plan: BarrierPlan, problem: ProblemSpec, cap: float, constants: Dict[str, float],
                  search: bool, ref: _Reference) -> Tuple[Dict[str, Any], List[Dict[str, Any]]]:
    """Certificate (searched or fixed), det cross-check and ordering for one family and sense."""

    params = barrier_defaults(plan, problem, cap)
    params.update({k: v for k, v in constants.items() if k in params and k != "cap"})
    tag = {"family": plan.family.value, "sense": plan.sense.value}
    entry: Dict[str, Any] = {**tag, "cap": cap}
    rows: List[Dict[str, Any]] = []

    def build(value: Optional[float] = None) -> Barrier:
        chosen = dict(params)
        if value is not None:
            for key in (plan.searched, *plan.together):
                chosen[key] = value
        return Barrier(family = plan.family, alpha = problem.alpha, params = chosen,
                       domain = problem.domain, sense = plan.sense)

    def check(b: Barrier) -> Certificate:
        return certify_subsolution(b, problem, region = {"cap": cap}, margin_kind = plan.margin,
                                   solution = ref.grid_solution, cap_floor = ref.cap_floor)

    barrier: Optional[Barrier] = None
    certificate: Optional[Certificate] = None
    passed = True
    if plan.margin is not None and search and plan.searched is not None:
        result = search_constant(plan.searched, build, check, start = float(params[plan.searched]))
        entry["search"] = result.to_dict()
        rows.extend({**tag, **step} for step in result.trace)
        certificate, passed = result.certificate, result.found
        barrier = build(result.value) if result.found else None
    else:
        try:
            barrier = build()
            if plan.margin is not None:
                certificate = check(barrier)
                passed = certificate.passed
                rows.append({**tag, "value": float("nan"), "passed": certificate.passed,
                             "worst_margin": certificate.worst_margin})
        except RangeError as e:
            entry["error"] = e.condition
            passed = False
    entry["certificate"] = certificate.to_dict() if certificate is not None else None

    if barrier is None and "error" not in entry:
        barrier = build()
    if barrier is not None:
        samples = _crosscheck_samples(problem.domain, cap, CROSSCHECK_SAMPLES)
        deviation = det_hessian_crosscheck(barrier, samples)
        entry["crosscheck"] = {"samples": int(samples.shape[0]), "deviation": deviation,
                               "tolerance": CROSSCHECK_TOLERANCE}
        passed = passed and deviation <= CROSSCHECK_TOLERANCE
        if certificate is not None and certificate.passed and plan.margin == "full" and ref.solution is not None:
            if ref.grid_solution is not None:
                order = compare_to_solution(barrier, ref.solution, region = {"cap": cap}, sense = plan.sense)
            else:
                base = problem.domain.base_point[-1]
                inside = ref.points[ref.points[:, -1] - base <= cap]
                order = compare_to_solution(barrier, ref.solution, sense = plan.sense, points = inside)
            entry["ordering"] = order.to_dict()
            passed = passed and order.passed

    entry["pass"] = passed
    return entry, rows


def barriers_job(config: RunConfig, alpha: float, name: str) -> JobOutcome:
    exp = config.experiment
    problem = config.build_problem(alpha)
    families = list(exp.families) or default_families(alpha)
    plans = [plan for family in families for plan in _PLANS[family]]

    ref = _Reference(cap_floor = exp.constants.get("cap_floor"))
    if ref.cap_floor is None and any(p.margin == "full" and p.sense == Sense.BELOW for p in plans):
        ref.solution = _solution(config, problem)
        if ref.grid_solution is None:
            ref.points = problem.domain.sample_interior(4096)
            ref.cap_floor = float(np.min(ref.solution.eval(ref.points)))

    entries, rows, failures = [], [], []
    for plan in plans:
        cap = _barrier_cap(config, problem, plan.family)
        entry, plan_rows = _certify_plan(plan, problem, cap, exp.constants, exp.search, ref)
        entries.append(entry)
        rows.extend(plan_rows)
        if not entry["pass"]:
            witness = (entry.get("certificate") or {}).get("witness")
            failures.append(f"{plan.family.value}/{plan.sense.value}"
                            + (f" witness {witness}" if witness else ""))

    passed = not failures
    report = {"experiment": "barriers", "alpha": alpha, "families": entries, "pass": passed}
    summary = f"{name}: {_verdict(passed)} ({len(entries)} barrier checks"
    summary += f"; failed {', '.join(failures)})" if failures else ")"
    return JobOutcome(name, Command.BARRIERS, alpha, report, rows, passed, summary)


JOBS: Dict[Command, Callable[[RunConfig, float, str], JobOutcome]] = {
    Command.SOLVE: solve_job,
    Command.SECTIONS: sections_job,
    Command.SCALING: scaling_job,
    Command.BARRIERS: barriers_job,
    Command.LIOUVILLE: liouville_job,
    Command.MAXSECTION: maxsection_job,
}
