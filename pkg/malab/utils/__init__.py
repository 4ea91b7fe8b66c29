import logging
from pathlib import Path
from types import ModuleType
from typing import Union
from importlib import import_module

from malab.utils.logger import SharedLogger


# MALab Logger Utility
def get_logger(name: str) -> logging.Logger:
    """Gets a child of the shared MALab logger"""

    try:
        base_logger = SharedLogger.get_logger()
    except Exception:
        base_logger = None

    if base_logger is None:

        # Fallback if the shared logger could not be built
        logger = logging.getLogger(name)
        logger.addHandler(logging.NullHandler())
        return logger

    # "MALab.Solver" -> child "Solver" of the "MALab" logger
    prefix = f"{base_logger.name}."
    child = name[len(prefix):] if name.startswith(prefix) else name
    return base_logger.getChild(child)


# IMPORT MODULE
def import_module_from(path: Union[str, Path]) -> 'ModuleType':
    """Import module using importlib"""

    return import_module(str(path))
