"""
Tests for the verification experiments.
"""

import math

import numpy as np
import pytest

from malab.core.domain import DomainSpec
from malab.core.problem import BoundaryData, ProblemSpec, liouville
from malab.core.solver import solve
from malab.core.types import DomainKind, Weight
from malab.core.verify import (
    MIN_R_SQUARED, b_pair_bounds, fit_power_law, liouville_residual,
    localization_experiment, maximal_section_experiment, normalization_factors, scaling_report,
    section_sweep
)
from malab.utils.exceptions import ArgumentError, ExperimentError


class TestPowerLaw:
    """Test cases for log-log fits."""

    def test_exact_power_law(self):
        """An exact power law has its exponent as slope and R^2 = 1."""
        pairs = [(h, 3.0 * h ** 0.5) for h in (1.0, 0.5, 0.25, 0.125)]
        slope, intercept, r2 = fit_power_law(pairs)
        assert slope == pytest.approx(0.5)
        assert math.exp(intercept) == pytest.approx(3.0)
        assert r2 == pytest.approx(1.0)

    @pytest.mark.parametrize("pairs", [
        [(1.0, 1.0), (0.5, 0.5), (0.25, 0.25)],
        [(1.0, 1.0), (0.5, 0.0), (0.25, 0.25), (0.125, 0.1)],
        [(1.0, 1.0), (1.0, 0.5), (1.0, 0.25), (1.0, 0.1)],
    ])
    def test_rejected_pairs(self, pairs):
        """Too few, nonpositive or degenerate pairs are rejected."""
        with pytest.raises(ArgumentError):
            fit_power_law(pairs)

    def test_report_verdict(self):
        """A report passes within the slope tolerance and fails outside it."""
        pairs = [(h, h ** 0.55) for h in (1.0, 0.5, 0.25, 0.125)]
        assert scaling_report("normal", pairs, 0.5, tolerance = 0.08).passed
        assert not scaling_report("normal", pairs, 0.5, tolerance = 0.01).passed
        assert scaling_report("normal", pairs, 0.5, tolerance = 0.01, report_only = True).passed
        assert MIN_R_SQUARED < 1.0


class TestLocalization:
    """Test cases for the localization experiment on closed forms."""

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
    def test_half_space_solution_has_exact_exponents(self, alpha):
        """U0 sections scale with exponents 1/2 and 1/(2 - alpha)."""
        result = localization_experiment(liouville(alpha), h = [1.0, 0.5, 0.25, 0.125, 0.0625], alpha = alpha)
        assert result.tangential.slope == pytest.approx(0.5, abs = 1e-4)
        assert result.normal.slope == pytest.approx(1.0 / (2.0 - alpha), abs = 1e-4)
        assert result.passed
        assert len(result.rows) == 5
        assert result.to_dict()["pass"] is True

    def test_alpha_required(self):
        """Without alpha the predicted exponent is unknown."""
        class Plain:
            dim = 2
        with pytest.raises(ArgumentError):
            localization_experiment(Plain(), h = [1.0])


class TestSectionSweep:
    """Test cases for the section sweep."""

    def test_pair_bounds(self):
        """b(h1)/b(h2) lies between (h1/h2)^((1-a)/(2-a)) and (h2/h1)^(1/(2-a))."""
        lo, hi = b_pair_bounds(0.25, 1.0, 0.5)
        assert lo == pytest.approx(0.25 ** (1.0 / 3.0))
        assert hi == pytest.approx(4.0 ** (2.0 / 3.0))
        assert lo < 1.0 < hi

    def test_half_space_solution_sweep(self):
        """U0 has constant b(h), so no pair violates the bounds."""
        sweep = section_sweep(liouville(0.5), h = [0.5, 0.25, 0.125, 0.0625], alpha = 0.5)
        assert sweep.passed
        assert [row["h"] for row in sweep.rows] == [0.5, 0.25, 0.125, 0.0625]
        b = [row["b_h"] for row in sweep.rows]
        assert max(b) == pytest.approx(min(b), rel = 1e-5)


class TestLiouvilleResidual:
    """Test cases for the half-space residual check."""

    def test_residual_is_small(self):
        """The scheme is consistent on U0 away from x_n = 0."""
        result = liouville_residual(0.5, spacing = 1.0 / 64)
        assert result.passed
        assert result.residual < 0.02
        assert result.nodes > 0

    def test_residual_decreases_with_spacing(self):
        """Halving the spacing reduces the residual."""
        coarse = liouville_residual(0.5, spacing = 1.0 / 32)
        fine = liouville_residual(0.5, spacing = 1.0 / 64)
        assert fine.residual < coarse.residual

    def test_trace_defects_vanish(self):
        """U0(x', t) approaches |x'|^2 / 2 as t goes to 0."""
        result = liouville_residual(0.5, spacing = 1.0 / 32)
        defects = [d for _, d in result.trace_defects]
        assert all(a > b for a, b in zip(defects, defects[1:]))
        assert defects[-1] < 1e-8

    def test_box_must_be_above_boundary(self):
        """The residual box lies strictly above x_n = 0."""
        with pytest.raises(ArgumentError):
            liouville_residual(0.5, spacing = 1.0 / 32, box = (0.5, 0.0, 1.0))


class TestNormalization:
    """Test cases for the tangential expansion factors."""

    def test_factors(self):
        """D = diag(M^(-1/2), (det M / f0)^(1/(2 - alpha)))."""
        factors = normalization_factors(np.diag([4.0]), 2.0, 0.5)
        assert np.allclose(factors, [0.5, 2.0 ** (1.0 / 1.5)])

    def test_non_diagonal_matrix(self):
        """Only diagonal boundary Hessians are normalized."""
        with pytest.raises(ArgumentError):
            normalization_factors(np.array([[1.0, 0.5], [0.5, 1.0]]), 1.0, 0.5)


class TestMaximalSectionsOnGrid:
    """Test cases for maximal sections measured on a solved grid."""

    def setup_method(self):
        domain = DomainSpec(kind = DomainKind.DISK, dim = 2)
        problem = ProblemSpec(domain = domain, alpha = 1.5, weight = Weight.DISTANCE,
                              phi = BoundaryData(tag = "zero", dim = 2))
        self.u = solve(problem, 1.0 / 32)

    def test_ray_keeps_distinct_nodes(self):
        """Every y0 on the ray snaps to its own node and enough of them survive."""
        result = maximal_section_experiment(self.u, y0_top = 0.4, y0_bottom = 0.05, y0_count = 6)
        nodes = {(r["y1"], r["y2"]) for r in result.records}
        assert len(nodes) == len(result.records)
        assert len(result.records) >= 4
        assert len(result.reports) == 2

    def test_crowded_ray_is_rejected(self):
        """A ray shorter than a few cells collapses onto too few nodes."""
        with pytest.raises(ExperimentError):
            maximal_section_experiment(self.u, y0_top = 0.03, y0_bottom = 0.01, y0_count = 6)
