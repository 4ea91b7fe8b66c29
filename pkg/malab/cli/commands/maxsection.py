"""
Track the maximal interior section of a boundary-near point.
"""

from malab.cli.commands.base import ExperimentCommand


class MaxSectionCommand(ExperimentCommand):
    """Follow maximal interior sections as the point approaches the boundary and fit their shape."""

    command_name = "maxsection"
