"""
Tests for sections, John ellipsoids and normalizations.
"""

import math

import numpy as np
import pytest

from malab.core.domain import DomainSpec
from malab.core.grid import make_grid
from malab.core.problem import BoundaryData, liouville, make_boundary_data
from malab.core.scheme import GridFunction
from malab.core.sections import (
    DiagonalScaling, Ellipsoid, SlidingTransform, b_of_h, john_containment,
    john_ellipsoid, liouville_gauge, maximal_interior_section, section
)
from malab.utils.exceptions import ArgumentError, GeometryError, RankError


class TestAnalyticSections:
    """Test cases for sections of closed-form functions."""

    def test_half_space_solution_extents(self):
        """S_h(U0) at the origin has extents sqrt(2h) and ((2-a)(1-a)h)^(1/(2-a))."""
        alpha, h = 0.5, 0.25
        sec = section(liouville(alpha), np.zeros(2), h)
        assert sec.tangential_extent == pytest.approx(math.sqrt(2 * h), rel = 1e-6)
        expected = ((2 - alpha) * (1 - alpha) * h) ** (1 / (2 - alpha))
        assert sec.normal_extent == pytest.approx(expected, rel = 1e-6)
        assert not sec.truncated

    def test_b_of_h_is_constant_for_half_space_solution(self):
        """b(h) does not depend on h for U0."""
        u = liouville(0.5)
        values = [float(b_of_h(u, h, alpha = 0.5)) for h in (1.0, 0.1, 0.01)]
        assert max(values) == pytest.approx(min(values), rel = 1e-5)

    def test_nonpositive_height(self):
        """Heights must be positive."""
        with pytest.raises(ArgumentError):
            section(liouville(0.5), np.zeros(2), 0.0)


class TestGridSections:
    """Test cases for sections of grid functions."""

    def setup_method(self):
        self.disk = DomainSpec(kind = "disk", dim = 2)
        self.grid = make_grid(self.disk, 1.0 / 32)
        self.u = GridFunction.sample(self.grid, make_boundary_data("full_quadratic", self.disk), alpha = 0.5)

    def test_interior_section_is_a_disk(self):
        """At a node the section of |x|^2 / 2 is a disk of radius sqrt(2h)."""
        node = self.grid.points[self.grid.nearest([0.0, 0.0])]
        sec = section(self.u, node, 0.02)
        assert sec.size > 0
        assert sec.tangential_extent == pytest.approx(0.2, abs = 2 / 32)

    def test_sections_are_nested(self):
        """Smaller heights give subsets."""
        node = self.grid.points[self.grid.nearest([0.0, 0.0])]
        big = set(section(self.u, node, 0.05).members.tolist())
        small = set(section(self.u, node, 0.01).members.tolist())
        assert small <= big

    @pytest.mark.parametrize("h", [0.02, 0.05, 0.1])
    def test_b_of_h_uses_interpolated_extent(self, h):
        """b(h) lies between the member nodes' normal extent and one step beyond it."""
        node = self.grid.points[self.grid.nearest([0.0, 0.0])]
        sec = section(self.u, node, h)
        _, nor = sec.frame.coordinates(sec.points)
        nodes_only = float(np.max(np.abs(nor)))
        scale = h ** (-1.0 / 1.5)
        b = float(b_of_h(self.u, h, x0 = node, alpha = 0.5))
        assert nodes_only * scale <= b <= (nodes_only + 1.05 * sec.normal_step) * scale
        assert b / scale == pytest.approx(math.sqrt(2 * h), abs = 1.0 / 32)

    def test_boundary_section_uses_supporting_plane(self):
        """At the base point the section has members and positive extents."""
        sec = section(self.u, self.disk.base_point, 0.05)
        assert sec.size > 0
        assert sec.normal_extent > 0
        assert sec.tangential_extent > 0


class TestJohnEllipsoid:
    """Test cases for the minimum-volume enclosing ellipsoid."""

    def test_square(self):
        """The square [-1, 1]^2 has the circle of radius sqrt(2)."""
        pts = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [0.0, 0.0]])
        ell = john_ellipsoid(pts)
        assert np.allclose(ell.center, 0.0, atol = 1e-9)
        assert np.allclose(ell.axes, math.sqrt(2.0), rtol = 1e-6)
        assert np.all(ell.contains(pts))

    def test_containment(self):
        """The n-fold shrink lies inside the hull."""
        pts = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
        assert john_containment(john_ellipsoid(pts), pts)

    def test_degenerate_points(self):
        """Collinear points have no ellipsoid."""
        with pytest.raises(RankError):
            john_ellipsoid(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))

    def test_shape_must_be_definite(self):
        """Ellipsoids need a positive definite shape."""
        with pytest.raises(GeometryError):
            Ellipsoid(center = np.zeros(2), shape = np.diag([1.0, -1.0]))


class TestNormalizations:
    """Test cases for sliding and diagonal rescaling."""

    def test_sliding_roundtrip(self):
        """inverse undoes apply and the determinant is one."""
        transform = SlidingTransform(np.array([0.3, 0.0]))
        pts = np.array([[0.1, 0.5], [-0.2, 0.25]])
        assert np.allclose(transform.inverse(transform.apply(pts)), pts)
        assert transform.determinant == pytest.approx(1.0)

    def test_sliding_vector_is_tangential(self):
        """nu must have a zero normal component."""
        with pytest.raises(ArgumentError):
            SlidingTransform(np.array([0.3, 0.1]))

    def test_diagonal_factors(self):
        """F_h = diag(h^(1/2), h^(1/(2 - alpha)))."""
        scaling = DiagonalScaling(0.04, 0.5, 2)
        assert np.allclose(scaling.factors, [0.2, 0.04 ** (1 / 1.5)])

    def test_liouville_gauge_on_boundary_of_section(self):
        """Points on the boundary of S_h(U0) have gauge one."""
        h, alpha = 0.3, 0.5
        tangential = math.sqrt(2 * h)
        normal = ((2 - alpha) * (1 - alpha) * h) ** (1 / (2 - alpha))
        gauge = liouville_gauge(np.array([[tangential, 0.0], [0.0, normal]]), h, alpha)
        assert np.allclose(gauge, 1.0, rtol = 1e-8)


class TestMaximalSection:
    """Test cases for maximal interior sections."""

    def test_quadratic_on_disk(self):
        """For |x|^2 / 2 on the unit disk the maximal section at y0 touches the nearest point."""
        disk = DomainSpec(kind = "disk", dim = 2)
        u = BoundaryData(tag = "full_quadratic", dim = 2)
        y0 = np.array([0.0, -0.8])
        result = maximal_interior_section(u, y0, domain = disk)
        # phi(z) - u(y0) - y0.(z - y0) = |z - y0|^2 / 2, minimized at distance 0.2
        assert result.height == pytest.approx(0.02, rel = 1e-4)
        assert np.allclose(result.tangency, [0.0, -1.0], atol = 1e-4)
