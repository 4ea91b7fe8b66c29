"""
Logging system for MALab
"""

import os
import logging
import sys
import threading
from typing import Optional


_LEVELS = {'CRITICAL', 'ERROR', 'WARNING', 'INFO', 'DEBUG', 'NOTSET'}


####
##      MALAB SHARED LOGGER CLASS
#####
class SharedLogger:
    """MALab Shared Logger.

    One process-wide logger; every module logs through a child of it
    (see `malab.utils.get_logger`).
    """

    _logger: Optional[logging.Logger] = None
    _lock = threading.Lock()
    debug_mode = os.getenv('MALAB_DEBUG', '0') == '1'
    _env_log_level = os.getenv('MALAB_LOG_LEVEL', 'WARNING').upper()

    @classmethod
    def get_logger(cls, name: str = "MALab") -> logging.Logger:
        """Gets the static logger (initialized only once)"""

        if cls._logger is None:
            with cls._lock:
                if cls._logger is None:
                    cls._initialize_logger(name, debug = cls.debug_mode)
        return cls._logger

    @classmethod
    def _initialize_logger(cls, name: str, debug: bool = False):
        """One-time logger configuration"""

        logger = logging.getLogger(name)

        # Env level wins unless debug mode is forced
        level_name = cls._env_log_level if cls._env_log_level in _LEVELS else 'WARNING'
        level = getattr(logging, level_name, logging.WARNING)
        if debug:
            level = logging.DEBUG
        logger.setLevel(level)
        logger.propagate = False

        if not logger.handlers:
            handler = logging.StreamHandler(sys.stdout)
            formatter = logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            )
            handler.setFormatter(formatter)
            handler.setLevel(level)
            logger.addHandler(handler)

        cls._logger = logger

    @classmethod
    def reset(cls):
        """Drops the cached logger so the next call re-reads the environment."""

        with cls._lock:
            if cls._logger is not None:
                for handler in list(cls._logger.handlers):
                    cls._logger.removeHandler(handler)
            cls._logger = None
            cls.debug_mode = os.getenv('MALAB_DEBUG', '0') == '1'
            cls._env_log_level = os.getenv('MALAB_LOG_LEVEL', 'WARNING').upper()
