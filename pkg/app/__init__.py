"""BoundRelax: SMT and Max-SMT for non-linear integer arithmetic by bounded linearization."""
import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path

from pythonjsonlogger import jsonlogger

__version__ = "1.0.0"

_configured = False


def setup_logging(config, json_logs=None, level=None):
    """
    Configure the ``app`` logger once per process.

    Args:
        config: Config class supplying LOG_LEVEL, LOG_FORMAT, LOG_JSON, LOG_FILE
        json_logs: Overrides ``config.LOG_JSON`` when not None
        level: Overrides ``config.LOG_LEVEL`` when not None
    """
    global _configured
    logger = logging.getLogger('app')
    if _configured:
        return logger

    use_json = config.LOG_JSON if json_logs is None else json_logs
    if use_json:
        formatter = jsonlogger.JsonFormatter('%(asctime)s %(name)s %(levelname)s %(message)s')
    else:
        formatter = logging.Formatter(config.LOG_FORMAT)
    log_level = getattr(logging, (level or config.LOG_LEVEL).upper(), logging.WARNING)

    # Console handler; stdout is reserved for results
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if config.LOG_FILE:
        Path(config.LOG_FILE).parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            config.LOG_FILE,
            maxBytes=10240000,
            backupCount=10
        )
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    logger.setLevel(log_level)
    logger.propagate = False
    _configured = True
    return logger
