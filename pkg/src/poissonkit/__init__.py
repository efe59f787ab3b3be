"""Exact Poisson brackets, commutators and Lie-algebra closure checks."""

__version__ = "1.0.0"

from .brackets import BracketResult, commutator, poisson_bracket
from .calculus import gradient, partial
from .closure import ClosureReport, GeneratorSet, bracket_table, closure_report, match_combination
from .core import GaussianRational, NormalForm, PhaseSpace, normalize, render, render_human, render_machine
from .oracle import CheckResult, PhasePoint, cross_check, evaluate
from .parser import parse_expression, parse_session
