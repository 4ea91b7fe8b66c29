"""
Certify the explicit sub/supersolution barriers.
"""

from malab.cli.commands.base import ExperimentCommand


class BarriersCommand(ExperimentCommand):
    """Certify barrier families on a boundary cap and search their admissible constants."""

    command_name = "barriers"
