import logging
import logging.config
from logging import getLogger
from .logger import dictLogConfig

logging.config.dictConfig(dictLogConfig)


def set_console_level(level: str | int):
    """Меняет уровень консольного хэндлера (--quiet, --log-level)"""
    numeric = logging.getLevelName(level.upper()) if isinstance(level, str) else level
    root = logging.getLogger()
    if numeric < root.level:
        root.setLevel(numeric)
    for handler in root.handlers:
        if isinstance(handler, logging.StreamHandler) and not isinstance(handler, logging.FileHandler):
            handler.setLevel(numeric)
