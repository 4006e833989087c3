from .builtins import BUILTINS, evaluate
from .config import EvalConfig
from .modes import ModeOutcome, SubstitutionArray, invalidate_answer, mode_directed_insert
from .parser import parse_clauses, parse_term
from .program import Clause, Program
from .solver import Engine, EvalStats, SolveResult, Worker, run_fixpoint, solve
