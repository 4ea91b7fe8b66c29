from malab.core.types import (
    DomainKind, Weight, RhsQuadrature,
    SlopeMethod, BarrierFamily, Sense
)
from malab.core.domain import (
    DomainSpec, BoundaryGraph, BoundaryFrame,
    boundary_frame, distance_to_boundary
)
from malab.core.stencil import Stencil
from malab.core.grid import Grid, make_grid
from malab.core.problem import (
    AnalyticFunction, BoundaryData, ScaleFunction, ProblemSpec,
    make_boundary_data, solve_1d, RadialDiskSolution
)
from malab.core.scheme import (
    GridFunction, ma_monotone, discrete_convexity_defect
)
from malab.core.solver import SolverOptions, solve
from malab.core.sections import (
    Section, Ellipsoid, section, b_of_h,
    john_ellipsoid, maximal_interior_section
)
from malab.core.barriers import (
    Barrier, make_barrier, certify_subsolution, certify_supersolution,
    search_constant, compare_to_solution
)
from malab.core.verify import (
    localization_experiment, liouville_residual,
    tangential_expansion_experiment, maximal_section_experiment,
    section_sweep
)

__all__ = [
    'DomainKind',
    'Weight',
    'RhsQuadrature',
    'SlopeMethod',
    'BarrierFamily',
    'Sense',
    'DomainSpec',
    'BoundaryGraph',
    'BoundaryFrame',
    'boundary_frame',
    'distance_to_boundary',
    'Stencil',
    'Grid',
    'make_grid',
    'AnalyticFunction',
    'BoundaryData',
    'ScaleFunction',
    'ProblemSpec',
    'make_boundary_data',
    'solve_1d',
    'RadialDiskSolution',
    'GridFunction',
    'ma_monotone',
    'discrete_convexity_defect',
    'SolverOptions',
    'solve',
    'Section',
    'Ellipsoid',
    'section',
    'b_of_h',
    'john_ellipsoid',
    'maximal_interior_section',
    'Barrier',
    'make_barrier',
    'certify_subsolution',
    'certify_supersolution',
    'search_constant',
    'compare_to_solution',
    'localization_experiment',
    'liouville_residual',
    'tangential_expansion_experiment',
    'maximal_section_experiment',
    'section_sweep',
]
