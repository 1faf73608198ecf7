import os
from ast import literal_eval
from typing import Callable

from dotenv import load_dotenv

ROOT_DIR = os.path.abspath(os.path.dirname(os.path.dirname(__file__)))


def get_abs_path(file_path: str):
    """append ROOT_DIR for relative path"""
    # Already absolute path
    if file_path.startswith("/"):
        return file_path
    else:
        return os.path.join(ROOT_DIR, file_path)


def getenv_literal(env_var: str, default_factory: Callable = None):
    """
    Get env value, convert into Python object
    Args:
        env_var (str): env var, example: SCORE_BOUNDS
        default_factory: returns value if this env var is not set.

    """
    value = os.getenv(env_var)
    if value is None:
        return default_factory()

    return literal_eval(value)


def _getenv_number(env_var: str, cast: Callable, default):
    try:
        return cast(os.environ[env_var])
    except KeyError:
        return default
    except ValueError:
        print(f"{env_var} is not a valid number, use {default} as default value")
        return default


config_file = os.environ.get("CONFIG")
if config_file:
    config_file = get_abs_path(config_file)
    print("load config file", config_file)
    load_dotenv(get_abs_path(config_file))
else:
    load_dotenv()

COLOR_LOG = "COLOR_LOG" in os.environ
LOG_LEVEL = os.environ.get("LOG_LEVEL", "DEBUG").upper()

SENTRY_DSN = os.environ.get("SENTRY_DSN")

# seed used when neither the CLI nor the scenario file gives one
DEFAULT_SEED = _getenv_number("DEFAULT_SEED", int, 20250)

# EM fitting
FIT_N_STARTS = _getenv_number("FIT_N_STARTS", int, 10)
FIT_MAX_ITERATIONS = _getenv_number("FIT_MAX_ITERATIONS", int, 500)
FIT_REL_TOL = _getenv_number("FIT_REL_TOL", float, 1e-8)
SIGMA_FLOOR = _getenv_number("SIGMA_FLOOR", float, 1e-6)
# number of threads running EM starts; results never depend on it
FIT_WORKERS = _getenv_number("FIT_WORKERS", int, 1)

# model scan
SCAN_MIN_GROUPS = _getenv_number("SCAN_MIN_GROUPS", int, 2)
SCAN_MAX_GROUPS = _getenv_number("SCAN_MAX_GROUPS", int, 10)
# smallest modal group must hold at least this share of the sample
MIN_GROUP_PCT = _getenv_number("MIN_GROUP_PCT", float, 5.0)

# area between trajectories: segments per grid interval
ABT_SEGMENTS = _getenv_number("ABT_SEGMENTS", int, 1000)

# number of evenly spaced times used to sample trajectory curves for plotting
CURVE_SAMPLES = _getenv_number("CURVE_SAMPLES", int, 200)

# (y_min, y_max), PSQI total score range by default
SCORE_BOUNDS = tuple(getenv_literal("SCORE_BOUNDS", lambda: (0, 21)))

OUT_DIR = os.environ.get("OUT_DIR", "out")
