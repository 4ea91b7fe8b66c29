"""
Tests for the per-command experiment jobs.
"""

import pytest

from malab.cli.config import Command, parse_config
from malab.cli.jobs import (
    BarrierPlan, JOBS, _PLANS, barrier_defaults, barriers_job, default_families, solve_job
)
from malab.core.types import BarrierFamily, Sense


class TestJobTable:
    """Test cases for the command to job table."""

    def test_every_command_has_a_job(self):
        """Each experiment command is runnable."""
        assert set(JOBS) == set(Command)

    @pytest.mark.parametrize("alpha, families", [
        (0.5, [BarrierFamily.V0, BarrierFamily.VSTAR]),
        (1.0, [BarrierFamily.LOG_ALPHA1]),
        (1.5, [BarrierFamily.VMINUS, BarrierFamily.VPLUS]),
    ])
    def test_default_families(self, alpha, families):
        """The barrier catalog depends on the side of alpha = 1."""
        assert default_families(alpha) == families


class TestBarrierDefaults:
    """Test cases for starting barrier constants."""

    def test_v0_defaults_from_boundary_data(self):
        """mu is half the smallest tangential eigenvalue of phi; Lambda is the upper scale bound."""
        config = parse_config("command = barriers\n[domain]\nkind = disk\n[problem]\nalpha = 0.5\n"
                              "scale = 2\nscale_amplitude = 0.5\n")
        problem = config.build_problem()
        params = barrier_defaults(BarrierPlan(BarrierFamily.V0, Sense.BELOW), problem, 0.25)
        assert params == {"mu": 0.5, "Lambda": 3.0, "shift": 0.001}

    def test_vstar_has_no_shift(self):
        """Only V0 is lowered by a searched shift."""
        config = parse_config("command = barriers\n[domain]\nkind = disk\n[problem]\nalpha = 0.5\n")
        params = barrier_defaults(BarrierPlan(BarrierFamily.VSTAR, Sense.BELOW), config.build_problem(), 0.2)
        assert "shift" not in params

    def test_configured_mu(self):
        """An explicit mu wins."""
        config = parse_config("command = barriers\n[domain]\nkind = disk\n[problem]\nalpha = 0.5\nmu = 0.1\n")
        params = barrier_defaults(BarrierPlan(BarrierFamily.VSTAR, Sense.BELOW), config.build_problem(), 0.2)
        assert params["mu"] == 0.1
        assert params["cap"] == 0.2

    def test_lower_alpha_large_defaults(self):
        """The alpha > 1 lower barrier starts from unit constants."""
        config = parse_config("command = barriers\n[domain]\nkind = disk\n[problem]\nalpha = 1.5\n")
        params = barrier_defaults(BarrierPlan(BarrierFamily.VMINUS, Sense.BELOW), config.build_problem(), 0.2)
        assert params == {"C0": 1.0, "C1": 1.0, "cap": 0.2}


class TestSolveJob:
    """Test cases for the solve job."""

    def test_one_dimensional_oracle(self):
        """The interval problem is checked against its closed form."""
        config = parse_config("command = solve\n[domain]\nkind = interval\n[problem]\nalpha = 0.5\n"
                              "phi = zero\n[solver]\nspacing = 1/32\nrhs_quadrature = hat\n")
        outcome = solve_job(config, 0.5, "solve")
        assert outcome.passed
        assert outcome.report["oracle"] == "OneDimensionalSolution"
        assert outcome.report["oracle_error"] < 1e-5
        assert outcome.report["boundary_data_continuous"]
        assert outcome.report["pointwise_residual"] is not None
        assert outcome.solution is not None
        assert outcome.rows
        assert outcome.summary.startswith("solve: PASS")


class TestBarriersJob:
    """Test cases for the barriers job."""

    def test_v0_on_flat_boundary(self):
        """v0 certifies with its cap below the solution and lies below it."""
        config = parse_config("command = barriers\n[domain]\nkind = graph\n[problem]\nalpha = 0.5\n"
                              "[solver]\nspacing = 1/16\n[experiment]\nfamilies = V0\n")
        outcome = barriers_job(config, 0.5, "barriers")
        assert outcome.passed
        entry, = outcome.report["families"]
        assert entry["family"] == "V0"
        assert entry["search"]["constant"] == "shift"
        assert entry["search"]["found"]
        assert entry["certificate"]["pass"]
        assert entry["certificate"]["kind"] == "subsolution/full"
        assert set(entry["certificate"]["margins"]) == {"equation", "boundary", "cap"}
        assert entry["certificate"]["margins"]["equation"] == pytest.approx(1.0, rel = 1e-9)
        assert entry["ordering"]["pass"]
        assert entry["crosscheck"]["samples"] > 0
        assert entry["crosscheck"]["deviation"] <= entry["crosscheck"]["tolerance"]

    def test_small_lambda_fails(self):
        """A configured Lambda below the threshold fails with a witness."""
        config = parse_config("command = barriers\n[domain]\nkind = graph\n[problem]\nalpha = 0.5\n"
                              "[solver]\nspacing = 1/16\n"
                              "[experiment]\nfamilies = V0\nconstants = Lambda:0.25\n")
        outcome = barriers_job(config, 0.5, "barriers")
        assert not outcome.passed
        entry, = outcome.report["families"]
        assert not entry["search"]["found"]
        assert entry["certificate"]["margins"]["equation"] < 0
        assert "witness" in outcome.summary

    def test_log_plans_count_toward_the_verdict(self):
        """Both alpha = 1 plans search a constant under the full margin and can fail the run."""
        for plan in _PLANS[BarrierFamily.LOG_ALPHA1]:
            assert plan.margin == "full"
            assert plan.searched is not None
        config = parse_config("command = barriers\n[domain]\nkind = graph\n[problem]\nalpha = 1\n"
                              "[solver]\nspacing = 1/16\n"
                              "[experiment]\nfamilies = LOG_ALPHA1\nconstants = cap_floor:-1000\n")
        outcome = barriers_job(config, 1.0, "barriers")
        entries = outcome.report["families"]
        assert [e["sense"] for e in entries] == ["below", "above"]
        assert all("report_only" not in e for e in entries)
        assert outcome.passed == all(e["pass"] for e in entries)
