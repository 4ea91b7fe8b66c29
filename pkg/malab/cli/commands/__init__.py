from malab.cli.commands.base import (
    CommandRegistry, CommandParser,
    BaseCommand, ExperimentCommand
)
from malab.cli.commands.solve import (
    SolveCommand
)
from malab.cli.commands.sections import (
    SectionsCommand
)
from malab.cli.commands.scaling import (
    ScalingCommand
)
from malab.cli.commands.barriers import (
    BarriersCommand
)
from malab.cli.commands.liouville import (
    LiouvilleCommand
)
from malab.cli.commands.maxsection import (
    MaxSectionCommand
)
from malab.cli.commands.check import (
    CheckCommand
)

__all__ = [
    'CommandRegistry',
    'CommandParser',
    'BaseCommand',
    'ExperimentCommand',
    'SolveCommand',
    'SectionsCommand',
    'ScalingCommand',
    'BarriersCommand',
    'LiouvilleCommand',
    'MaxSectionCommand',
    'CheckCommand',
]
