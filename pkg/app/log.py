import logging
import sys
import time

import coloredlogs

from app.config import (
    COLOR_LOG,
    LOG_LEVEL,
)

# this format allows clickable link to code source in PyCharm
_log_format = '%(asctime)s - %(name)s - %(levelname)s - "%(pathname)s:%(lineno)d" - %(funcName)s() - %(run_id)s - %(message)s'
_log_formatter = logging.Formatter(_log_format)

# used to keep track of one CLI run
_RUN_ID = ""


def set_run_id(run_id):
    global _RUN_ID
    _RUN_ID = run_id


def get_run_id() -> str:
    return _RUN_ID


class RunIdFilter(logging.Filter):
    """automatically add run-id to keep track of a pipeline run"""

    def filter(self, record):
        run_id = get_run_id()
        record.run_id = run_id if run_id else ""
        return True


def _get_console_handler():
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(_log_formatter)
    console_handler.formatter.converter = time.gmtime

    return console_handler


def _get_logger(name):
    logger = logging.getLogger(name)

    logger.setLevel(LOG_LEVEL)

    # leave the handlers level at NOTSET so the level checking is only handled by the logger
    logger.addHandler(_get_console_handler())

    logger.addFilter(RunIdFilter())

    # no propagation to avoid propagating to root logger
    logger.propagate = False

    if COLOR_LOG:
        coloredlogs.install(level=LOG_LEVEL, logger=logger, fmt=_log_format)

    return logger


# Set some shortcuts
logging.Logger.d = logging.Logger.debug
logging.Logger.i = logging.Logger.info
logging.Logger.w = logging.Logger.warning
logging.Logger.e = logging.Logger.exception

LOG = _get_logger("ABT")
