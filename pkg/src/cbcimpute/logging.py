from __future__ import annotations

import logging

cbcimpute_logger = logging.getLogger("cbcimpute")
# Don’t pass log messages on to logging.root and its handler
cbcimpute_logger.propagate = False
cbcimpute_logger.addHandler(logging.StreamHandler())  # Logs go to stderr
cbcimpute_logger.handlers[-1].setFormatter(logging.Formatter("%(message)s"))
cbcimpute_logger.handlers[-1].setLevel("INFO")
cbcimpute_logger.setLevel("WARNING")


def get_logger(name: str) -> logging.Logger:
    """\
    Creates a child logger that delegates to cbcimpute_logger
    instead to logging.root
    """
    return cbcimpute_logger.manager.getLogger(name)


def set_verbosity(verbosity: int) -> None:
    """\
    Set the package log level from a verbosity count.

    `-1` shows errors only, `0` warnings, `1` progress and `2` or more debug output.
    """
    level = {-1: "ERROR", 0: "WARNING", 1: "INFO"}.get(
        max(verbosity, -1), "DEBUG"
    )
    cbcimpute_logger.setLevel(level)
    cbcimpute_logger.handlers[-1].setLevel(level)
