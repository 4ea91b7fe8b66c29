"""
Check the half-space polynomial solutions.
"""

from malab.cli.commands.base import ExperimentCommand


class LiouvilleCommand(ExperimentCommand):
    """Evaluate the discrete residual of the half-space polynomial solutions for alpha < 1."""

    command_name = "liouville"
