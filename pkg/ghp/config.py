# ghp/config.py
"""The module loads environment configuration and holds numerical defaults.

Environment variables are read once from the process environment after a
`.env` file (if any) has been loaded.
"""

import logging
import os
import sys

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

GHP_LOG_LEVEL = os.getenv("GHP_LOG_LEVEL", "INFO")

# --- Numerical defaults ---

DEFAULT_KERNEL_RATE = 1.0
DEFAULT_ORDER = 5
DEFAULT_LIPSCHITZ_GRID = 512
DEFAULT_FGW_GRID = 100
DEFAULT_FGW_ALPHA = 0.01
DEFAULT_FGW_ITERS = 300
DEFAULT_FGW_INNER_ITERS = 200
DEFAULT_GRAPHON_RESOLUTION = 200
DEFAULT_BANDWIDTH = 0.1
DEFAULT_KDE_GRID = 1000
DEFAULT_MAX_EVENTS = 1_000_000

SINKHORN_MAX_ITER = 2000
SINKHORN_TOL = 1e-6
# Sinkhorn switches to the log domain when beta < LOG_DOMAIN_RATIO * max(D)
LOG_DOMAIN_RATIO = 1e-2
# "auto" beta = DEFAULT_BETA_RATIO * median of the positive costs
DEFAULT_BETA_RATIO = 1e-2

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def resolve_threads(requested: int | None = None) -> int:
    """Resolve the worker thread count.

    Args:
        requested (int | None): Value of the --threads flag, if given.

    Returns:
        int: GHP_THREADS when set and positive, else `requested` when
            positive, else the number of available cores.

    """
    env_value = os.getenv("GHP_THREADS")
    if env_value:
        try:
            from_env = int(env_value)
        except ValueError:
            from_env = 0
        if from_env > 0:
            return from_env
    if requested is not None and requested > 0:
        return requested
    return os.cpu_count() or 1


def configure_logging(level: str | None = None, quiet: bool = False) -> None:
    """Install a single stderr handler on the package logger.

    Args:
        level (str | None): Logging level name; defaults to GHP_LOG_LEVEL.
        quiet (bool): Raise the threshold to WARNING.

    """
    logger = logging.getLogger("ghp")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(handler)
    name = (level or GHP_LOG_LEVEL).upper()
    logger.setLevel(logging.WARNING if quiet else getattr(logging, name, logging.INFO))
    logger.propagate = False
