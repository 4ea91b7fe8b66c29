"""
Solve the degenerate Monge-Ampere Dirichlet problem on a grid.
"""

from malab.cli.commands.base import ExperimentCommand


class SolveCommand(ExperimentCommand):
    """Solve det D2u = |u|^alpha f(x, u) g(Du) on a convex domain and compare with a known solution when one exists."""

    command_name = "solve"
