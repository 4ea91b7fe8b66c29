"""
Tests for the explicit barrier catalog and its certificates.
"""

import math

import numpy as np
import pytest

from malab.core.barriers import (
    Barrier, Certificate, certify_subsolution, certify_supersolution,
    compare_to_solution, det_hessian_crosscheck, make_barrier, search_constant
)
from malab.core.domain import DomainSpec
from malab.core.problem import ProblemSpec, liouville
from malab.core.types import BarrierFamily, Sense
from malab.utils.exceptions import ArgumentError, RangeError, SingularEvaluationError


def _certificate(passed: bool, margin: float = 0.0) -> Certificate:
    return Certificate(family = "test", parameters = {}, region = {}, kind = "test",
                       samples = 1, worst_margin = margin, witness = [], passed = passed)


class TestBarrierConstruction:
    """Test cases for barrier parameter checks."""

    @pytest.mark.parametrize("family, alpha", [
        (BarrierFamily.V0, 1.5),
        (BarrierFamily.VMINUS, 0.5),
        (BarrierFamily.VPLUS, 1.0),
        (BarrierFamily.LOG_ALPHA1, 0.5),
    ])
    def test_alpha_range(self, family, alpha):
        """Each family lives on its own alpha range."""
        with pytest.raises(RangeError):
            Barrier(family = family, alpha = alpha, params = {"mu": 1, "Lambda": 1, "C0": 1, "C1": 1,
                                                              "c1": 1, "C": 1})

    def test_missing_parameters(self):
        """Required constants are checked."""
        with pytest.raises(RangeError) as info:
            Barrier(family = BarrierFamily.VMINUS, alpha = 1.5, params = {"C0": 1.0})
        assert "C1" in str(info.value)

    def test_positive_parameters(self):
        """mu and Lambda must be positive."""
        with pytest.raises(RangeError):
            Barrier(family = BarrierFamily.V0, alpha = 0.5, params = {"mu": 0.0, "Lambda": 1.0})

    def test_negative_shift_rejected(self):
        """V0 can only be lowered."""
        with pytest.raises(RangeError) as info:
            Barrier(family = BarrierFamily.V0, alpha = 0.5, params = {"mu": 1.0, "Lambda": 1.0, "shift": -0.1})
        assert info.value.condition == "shift >= 0"

    def test_shift_lowers_v0_only(self):
        """A shift moves V0 down by a constant and keeps its Hessian."""
        pts = np.array([[0.1, 0.2], [-0.3, 0.05], [0.0, 0.4]])
        plain = Barrier(family = BarrierFamily.V0, alpha = 0.5, params = {"mu": 1.0, "Lambda": 1.0})
        shifted = Barrier(family = BarrierFamily.V0, alpha = 0.5,
                          params = {"mu": 1.0, "Lambda": 1.0, "shift": 0.25})
        np.testing.assert_allclose(plain.eval(pts) - shifted.eval(pts), 0.25)
        np.testing.assert_allclose(plain.det_hessian(pts), shifted.det_hessian(pts))

    def test_log_barrier_cap(self):
        """The alpha = 1 barrier needs cap < exp(-1/n)."""
        with pytest.raises(RangeError):
            Barrier(family = BarrierFamily.LOG_ALPHA1, alpha = 1.0, params = {"C0": 1, "C1": 1, "cap": 0.9})

    def test_one_dimensional_barriers_rejected(self):
        """Barriers need dim >= 2."""
        with pytest.raises(ArgumentError):
            Barrier(family = BarrierFamily.U0, alpha = 0.5, dim = 1)

    def test_beta(self):
        """beta = (n + alpha - 1) / n."""
        b = Barrier(family = BarrierFamily.VMINUS, alpha = 1.5, params = {"C0": 1.0, "C1": 1.0})
        assert b.beta == pytest.approx(1.25)

    def test_to_dict(self):
        """Serialized barriers list family, sense and parameters."""
        b = Barrier(family = BarrierFamily.V0, alpha = 0.5, params = {"mu": 1.0, "Lambda": 2.0})
        data = b.to_dict()
        assert data["family"] == "V0"
        assert data["sense"] == "below"
        assert data["parameters"] == {"Lambda": 2.0, "mu": 1.0}


class TestClosedForms:
    """Test cases for barrier values and determinants."""

    def test_u0_matches_half_space_solution(self):
        """U0 in the flat half space is the half-space solution."""
        b = Barrier(family = BarrierFamily.U0, alpha = 0.5)
        pts = np.array([[0.1, 0.2], [-0.3, 0.5], [0.0, 0.9]])
        assert np.allclose(b.eval(pts), liouville(0.5).eval(pts))
        assert np.allclose(b.det_hessian(pts), pts[:, 1] ** -0.5)

    def test_det_hessian_crosscheck(self):
        """Closed-form determinants agree with finite differences."""
        b = Barrier(family = BarrierFamily.U0, alpha = 0.5)
        pts = np.array([[0.1, 0.3], [-0.2, 0.5], [0.3, 0.7]])
        assert det_hessian_crosscheck(b, pts) < 1e-4

    def test_det_hessian_crosscheck_vminus(self):
        """The alpha > 1 lower barrier on a curved domain passes the cross-check."""
        disk = DomainSpec(kind = "disk", dim = 2)
        b = Barrier(family = BarrierFamily.VMINUS, alpha = 1.5, params = {"C0": 1.0, "C1": 1.0},
                    domain = disk)
        pts = np.array([[0.0, -0.8], [0.2, -0.7], [-0.1, -0.6]])
        assert det_hessian_crosscheck(b, pts) < 1e-4

    def test_singular_set(self):
        """Barriers are not evaluated below the boundary graph."""
        b = Barrier(family = BarrierFamily.U0, alpha = 0.5)
        with pytest.raises(SingularEvaluationError):
            b.eval([[0.0, -0.1]])

    def test_flat_height_limit(self):
        """A flat boundary puts no limit on the cap."""
        flat = DomainSpec(kind = "graph", dim = 2)
        b = Barrier(family = BarrierFamily.V0, alpha = 0.5, params = {"mu": 1.0, "Lambda": 1.0},
                    domain = flat)
        assert b.max_curvature() == 0.0
        assert math.isinf(b.height_limit())

    def test_curved_height_limit(self):
        """On the unit disk the cap is bounded."""
        disk = DomainSpec(kind = "disk", dim = 2)
        b = Barrier(family = BarrierFamily.V0, alpha = 0.5, params = {"mu": 1.0, "Lambda": 1.0},
                    domain = disk)
        assert b.max_curvature() >= 1.0
        assert 0 < b.height_limit() < math.inf

    def test_make_barrier_reads_boundary_data(self):
        """v- takes phi and grad phi at the base point from the problem."""
        disk = DomainSpec(kind = "disk", dim = 2)
        prob = ProblemSpec(domain = disk, alpha = 1.5)
        b = make_barrier(BarrierFamily.VMINUS, prob, C0 = 1.0, C1 = 1.0)
        assert b.sense == Sense.BELOW
        assert "phi0" in b.params and "grad0" in b.params
        assert make_barrier(BarrierFamily.VPLUS, prob, c1 = 1.0, C = 1.0).sense == Sense.ABOVE


class TestCertificates:
    """Test cases for sampled certificates."""

    def setup_method(self):
        self.flat = DomainSpec(kind = "graph", dim = 2, height = 1.0, base_radius = 1.0)
        self.problem = ProblemSpec(domain = self.flat, alpha = 0.5)

    def test_v0_equation_margin(self):
        """det D^2 v0 = 2 Lambda t^(-alpha) on a flat boundary, so Lambda = 1 has margin one."""
        b = Barrier(family = BarrierFamily.V0, alpha = 0.5, params = {"mu": 1.0, "Lambda": 1.0},
                    domain = self.flat)
        cert = certify_subsolution(b, self.problem, region = {"cap": 0.25}, margin_kind = "equation",
                                   samples = 512)
        assert cert.passed
        assert cert.margins["equation"] == pytest.approx(1.0, rel = 1e-9)
        assert cert.kind == "subsolution/equation"

    def test_v0_equation_failure(self):
        """Too small a Lambda fails with a witness."""
        b = Barrier(family = BarrierFamily.V0, alpha = 0.5, params = {"mu": 1.0, "Lambda": 0.25},
                    domain = self.flat)
        cert = certify_subsolution(b, self.problem, region = {"cap": 0.25}, margin_kind = "equation",
                                   samples = 512)
        assert not cert.passed
        assert cert.worst_margin == pytest.approx(-0.5, rel = 1e-9)
        assert len(cert.witness) == 2

    def test_unknown_margin_kind(self):
        """Margin kinds are checked."""
        b = Barrier(family = BarrierFamily.V0, alpha = 0.5, params = {"mu": 1.0, "Lambda": 1.0},
                    domain = self.flat)
        with pytest.raises(ArgumentError):
            certify_subsolution(b, self.problem, margin_kind = "everything")

    def test_lower_barrier_needs_floor(self):
        """Full lower certificates need a solution or an explicit floor."""
        b = Barrier(family = BarrierFamily.V0, alpha = 0.5, params = {"mu": 1.0, "Lambda": 1.0},
                    domain = self.flat)
        with pytest.raises(RangeError):
            certify_subsolution(b, self.problem, region = {"cap": 0.25}, margin_kind = "full", samples = 256)

    def test_supersolution_needs_upper_barrier(self):
        """certify_supersolution only takes upper barriers."""
        b = Barrier(family = BarrierFamily.V0, alpha = 0.5, params = {"mu": 1.0, "Lambda": 1.0},
                    domain = self.flat)
        with pytest.raises(ArgumentError):
            certify_supersolution(b, self.problem)

    def test_compare_to_analytic_solution(self):
        """A barrier equal to the solution is ordered with zero margin."""
        b = Barrier(family = BarrierFamily.U0, alpha = 0.5)
        pts = np.array([[0.1, 0.2], [0.0, 0.4]])
        cert = compare_to_solution(b, liouville(0.5), points = pts, tolerance = 1e-12)
        assert cert.passed
        assert cert.worst_margin == pytest.approx(0.0, abs = 1e-12)

    def test_compare_needs_points(self):
        """Analytic comparisons need sample points."""
        b = Barrier(family = BarrierFamily.U0, alpha = 0.5)
        with pytest.raises(ArgumentError):
            compare_to_solution(b, liouville(0.5))


class TestConstantSearch:
    """Test cases for the doubling/bisection search."""

    def test_finds_threshold(self):
        """The search brackets and bisects to the passing threshold."""
        result = search_constant("C", build = lambda value: value,
                                 check = lambda value: _certificate(value >= 3.0, value - 3.0))
        assert result.found
        assert result.value == pytest.approx(3.0, rel = 1e-5)
        assert result.value >= 3.0
        assert result.certificate.passed

    def test_passing_start(self):
        """A passing start value is kept."""
        result = search_constant("C", build = lambda value: value,
                                 check = lambda value: _certificate(True))
        assert result.value == 1.0
        assert len(result.trace) == 1

    def test_range_errors_are_traced(self):
        """Out-of-range constants are recorded, not raised."""
        def build(value):
            if value < 2.0:
                raise RangeError("too small", "C >= 2")
            return value

        result = search_constant("C", build = build, check = lambda value: _certificate(True))
        assert result.found
        assert result.trace[0]["error"] == "C >= 2"

    def test_not_found(self):
        """A constant that never passes is reported as not found."""
        result = search_constant("C", build = lambda value: value,
                                 check = lambda value: _certificate(False, -1.0), steps = 5)
        assert not result.found
        assert result.value is None
        assert len(result.trace) == 5
        assert not result.certificate.passed
        assert result.certificate.worst_margin == -1.0

    def test_not_found_without_certificates(self):
        """Only range errors leave the search without a certificate."""
        def build(value):
            raise RangeError("never valid", "C < 0")

        result = search_constant("C", build = build, check = lambda value: _certificate(True), steps = 3)
        assert not result.found
        assert result.certificate is None
