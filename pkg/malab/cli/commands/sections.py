"""
Measure boundary sections of a solution.
"""

from malab.cli.commands.base import ExperimentCommand


class SectionsCommand(ExperimentCommand):
    """Sweep section heights at a boundary point and record width, height and shape."""

    command_name = "sections"
