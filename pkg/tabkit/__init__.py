# flake8: noqa
__version__ = "0.1.0"

from .benchmark import benchmark
from .engine import EvalConfig, Program, solve
from .utils import set_log_level, setup_seed
