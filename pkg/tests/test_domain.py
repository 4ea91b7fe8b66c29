"""
Tests for the convex domain catalog, stencils and grids.
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from malab.core.domain import (
    DomainSpec, boundary_frame, distance_to_boundary
)
from malab.core.grid import make_grid
from malab.core.stencil import Stencil
from malab.core.types import DomainKind
from malab.utils.exceptions import (
    ArgumentError, DomainMembershipError, GeometryError,
    ResolutionError, ToleranceError
)


class TestDomainSpec:
    """Test cases for DomainSpec geometry."""

    def setup_method(self):
        self.disk = DomainSpec(kind = DomainKind.DISK, dim = 2, radius = 1.0)

    def test_disk_base_point_is_lowest(self):
        """The base point of the unit disk is (0, -1)."""
        assert np.allclose(self.disk.base_point, [0.0, -1.0])

    def test_disk_distance_at_center(self):
        """Distance from the center equals the radius."""
        assert distance_to_boundary(self.disk, [0.0, 0.0]) == pytest.approx(1.0)

    def test_distance_outside_raises(self):
        """Points outside the closed domain have no distance."""
        with pytest.raises(DomainMembershipError):
            self.disk.distance([[2.0, 0.0]])

    def test_interval_distance(self):
        """Interval distance is min(x, L - x)."""
        interval = DomainSpec(kind = "interval", dim = 1, length = 2.0)
        d = interval.distance([[0.5], [1.5], [1.0]])
        assert np.allclose(d, [0.5, 0.5, 1.0])

    def test_flat_graph_distance_is_height(self):
        """Over a flat lower graph the distance near the base is x_n."""
        graph = DomainSpec(kind = "graph", dim = 2, height = 1.0, base_radius = 1.0)
        assert distance_to_boundary(graph, [0.0, 0.1]) == pytest.approx(0.1)

    def test_samples_are_interior(self):
        """Deterministic interior samples lie inside the domain."""
        pts = self.disk.sample_interior(200)
        assert pts.shape == (200, 2)
        assert np.all(self.disk.contains(pts))

    def test_samples_are_deterministic(self):
        """Two calls return the same samples."""
        assert np.array_equal(self.disk.sample_interior(50), self.disk.sample_interior(50))

    def test_convexity_check(self):
        """The catalog domains are convex."""
        assert self.disk.check_convexity(pairs = 500)
        ellipse = DomainSpec(kind = "ellipse", axes = (2.0, 1.0))
        assert ellipse.check_convexity(pairs = 500)

    def test_interior_ball(self):
        """A disk of radius 1 admits interior balls of radius 0.5."""
        assert self.disk.check_interior_ball(count = 64) == pytest.approx(1.0, rel = 1e-6)

    @pytest.mark.parametrize("kwargs, error", [
        ({"kind": "disk", "rho": 0.0}, ArgumentError),
        ({"kind": "ellipse", "dim": 3}, ArgumentError),
        ({"kind": "interval", "dim": 2}, ArgumentError),
        ({"kind": "disk", "radius": -1.0}, ArgumentError),
        ({"kind": "graph", "coefficients": (-1.0,)}, GeometryError),
    ])
    def test_invalid_domains(self, kwargs, error):
        """Inadmissible parameters are rejected."""
        with pytest.raises(error):
            DomainSpec(**kwargs)


class TestBoundaryFrame:
    """Test cases for boundary frames."""

    def test_normal_at_base_point(self):
        """The inner normal at the base point of a disk is e_n."""
        disk = DomainSpec(kind = "disk", dim = 2)
        frame = boundary_frame(disk, disk.base_point)
        assert np.allclose(frame.normal, [0.0, 1.0])
        assert frame.tangents.shape == (1, 2)
        assert abs(float(frame.tangents[0] @ frame.normal)) < 1e-12

    def test_normal_on_side(self):
        """On the right side of the disk the inner normal points left."""
        disk = DomainSpec(kind = "disk", dim = 2)
        frame = boundary_frame(disk, [1.0, 0.0])
        assert np.allclose(frame.normal, [-1.0, 0.0])

    def test_interior_point_rejected(self):
        """Frames only exist at boundary points."""
        disk = DomainSpec(kind = "disk", dim = 2)
        with pytest.raises(ToleranceError):
            boundary_frame(disk, [0.0, 0.0])


class TestStencil:
    """Test cases for wide stencils."""

    def test_width_one_in_2d(self):
        """Width one has the two axes and the two diagonals."""
        stencil = Stencil(2, 1)
        assert stencil.size == 4
        assert stencil.directions[:2].tolist() == [[1, 0], [0, 1]]
        assert stencil.reach == 1

    def test_width_two_in_2d(self):
        """Width two adds the four knight moves."""
        assert Stencil(2, 2).size == 8

    def test_frames_are_orthogonal(self):
        """Every frame lists mutually orthogonal directions, axes first."""
        stencil = Stencil(2, 2)
        assert tuple(stencil.frames[0]) == (0, 1)
        for frame in stencil.frames:
            a, b = stencil.directions[frame]
            assert int(a @ b) == 0

    def test_one_dimension(self):
        """The 1D stencil is the single axis direction."""
        assert Stencil(1, 1).size == 1

    def test_invalid_stencils(self):
        """Unsupported dimension and width are rejected."""
        with pytest.raises(ArgumentError):
            Stencil(4, 1)
        with pytest.raises(ArgumentError):
            Stencil(2, 0)


class TestGrid:
    """Test cases for grid construction."""

    def setup_method(self):
        self.disk = DomainSpec(kind = "disk", dim = 2)
        self.grid = make_grid(self.disk, 1.0 / 16)

    def test_nodes_inside(self):
        """All nodes are strictly interior."""
        assert np.all(self.disk.contains(self.grid.points))

    def test_boundary_points_on_boundary(self):
        """Boundary intersection points lie on the circle."""
        r = np.linalg.norm(self.grid.boundary_points, axis = -1)
        assert np.allclose(r, 1.0, atol = 1e-9)

    def test_arm_fractions(self):
        """Axis arms end at a node or slightly past a node dropped by the clearance rule."""
        grid = make_grid(self.disk, 1.0 / 16, Stencil(2, 1))
        assert np.all(grid.plus_t > 0) and np.all(grid.plus_t <= 1.05)
        assert np.all(grid.minus_t > 0) and np.all(grid.minus_t <= 1.05)

    def test_default_stencil(self):
        """Grids default to the width-3 stencil."""
        assert self.grid.stencil.width == 3
        assert self.grid.stencil.reach == 3

    def test_span_counts_the_diameter(self):
        """Eight cells across the diameter is the coarsest accepted grid."""
        assert make_grid(self.disk, 0.25).size > 0
        with pytest.raises(ResolutionError) as info:
            make_grid(self.disk, 0.3)
        assert "diameter" in str(info.value)

    def test_lattice_offset_from_base_point(self):
        """The lattice sits half a cell above the base point."""
        lowest = np.min(self.grid.points[:, 1])
        offset = (lowest - self.disk.base_point[1]) / self.grid.spacing
        assert math.isclose(offset % 1.0, 0.5, abs_tol = 1e-9)

    def test_locate(self):
        """locate finds the node at its own coordinates."""
        p = self.grid.points[7]
        assert self.grid.locate(p) == 7

    @pytest.mark.parametrize("spacing, clearance, error", [
        (0.0, 0.01, ArgumentError),
        (1.0, 0.01, ResolutionError),
        (0.3, 0.01, ResolutionError),
        (0.1, 0.5, ArgumentError),
    ])
    def test_invalid_grids(self, spacing, clearance, error):
        """Bad spacing or clearance is rejected."""
        with pytest.raises(error):
            make_grid(self.disk, spacing, clearance = clearance)

    def test_stencil_dimension_mismatch(self):
        """The stencil must match the domain dimension."""
        with pytest.raises(ArgumentError):
            make_grid(self.disk, 0.1, Stencil(3, 1))


class TestDistanceProperties:
    """Property checks of closed-form distances."""

    @given(r = st.floats(0.0, 0.99), theta = st.floats(0.0, 2 * math.pi))
    def test_disk_distance(self, r, theta):
        """Inside the unit disk the distance is 1 - |x|."""
        disk = DomainSpec(kind = "disk", dim = 2)
        p = [r * math.cos(theta), r * math.sin(theta)]
        assert distance_to_boundary(disk, p) == pytest.approx(1.0 - r, abs = 1e-12)

    @given(x = st.floats(0.0, 2.0))
    def test_interval_distance(self, x):
        """On (0, L) the distance is min(x, L - x)."""
        interval = DomainSpec(kind = "interval", dim = 1, length = 2.0)
        assert distance_to_boundary(interval, [x]) == pytest.approx(min(x, 2.0 - x), abs = 1e-12)
