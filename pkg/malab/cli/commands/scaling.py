"""
Fit the localization exponents of sections at a boundary point.
"""

from malab.cli.commands.base import ExperimentCommand


class ScalingCommand(ExperimentCommand):
    """Fit tangential and normal scaling exponents of boundary sections against the alpha laws."""

    command_name = "scaling"
