import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from typing import Optional, Union

LOGGER_NAME = 'spryfed'
LEVEL_ENV = 'SPRYFED_LOG_LEVEL'
DIR_ENV = 'SPRYFED_LOG_DIR'
LOG_FILE = 'spryfed.log'
MAX_LOG_BYTES = 10 * 1024 * 1024
LOG_BACKUPS = 5


def parse_level(level: Union[str, int, None], default: int = logging.INFO) -> int:
    """Level number for a name such as ``"debug"``; unknown names give ``default``."""
    if level is None:
        return default
    if isinstance(level, int):
        return level
    value = logging.getLevelName(level.strip().upper())
    return value if isinstance(value, int) else default


class SpryFedLogger:
    """Process-wide ``spryfed`` logger.

    Progress and diagnostics go to stderr so that commands writing CSV or JSON
    to stdout stay machine-readable. Setting ``SPRYFED_LOG_DIR`` also writes a
    rotating ``spryfed.log`` there.
    """
    _instance: Optional['SpryFedLogger'] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(SpryFedLogger, cls).__new__(cls)
            cls._instance._initialize_logger()
        return cls._instance

    def _initialize_logger(self):
        self.logger = logging.getLogger(LOGGER_NAME)
        self.logger.propagate = False

        requested = os.getenv(LEVEL_ENV)
        self.logger.setLevel(parse_level(requested))

        stderr_handler = logging.StreamHandler(sys.stderr)
        stderr_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
        self.logger.addHandler(stderr_handler)

        log_dir = os.getenv(DIR_ENV)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
            file_handler = RotatingFileHandler(os.path.join(log_dir, LOG_FILE),
                                               maxBytes=MAX_LOG_BYTES, backupCount=LOG_BACKUPS)
            file_handler.setFormatter(logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s'))
            self.logger.addHandler(file_handler)

        if requested and not isinstance(logging.getLevelName(requested.strip().upper()), int):
            self.logger.warning("Unknown %s=%r, logging at INFO", LEVEL_ENV, requested)

    @classmethod
    def get_logger(cls) -> logging.Logger:
        return cls().logger


def get_logger() -> logging.Logger:
    return SpryFedLogger.get_logger()


def set_level(level: Union[str, int]) -> None:
    """Override the level chosen from the environment (``--log-level``)."""
    get_logger().setLevel(parse_level(level, get_logger().level))


def debug(msg: str, *args, **kwargs):
    get_logger().debug(msg, *args, **kwargs)

def info(msg: str, *args, **kwargs):
    get_logger().info(msg, *args, **kwargs)

def warning(msg: str, *args, **kwargs):
    get_logger().warning(msg, *args, **kwargs)

def error(msg: str, *args, **kwargs):
    get_logger().error(msg, *args, **kwargs)

def critical(msg: str, *args, **kwargs):
    get_logger().critical(msg, *args, **kwargs)
