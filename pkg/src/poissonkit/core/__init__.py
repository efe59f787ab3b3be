"""Exact symbolic core: phase spaces, expressions and canonical normal forms."""

from .expr import (
    AtomRef,
    Constant,
    Expr,
    Func,
    NameRef,
    Power,
    Product,
    Resolver,
    Sum,
    normalize,
)
from .normal_form import (
    NormalForm,
    add,
    equivalent,
    exp,
    hbar,
    imaginary_unit,
    inverse,
    is_zero,
    mul,
    neg,
    pow,
    sqrt,
    sub,
)
from .numbers import GaussianRational
from .render import from_machine, render, render_human, render_machine
from .space import PhaseSpace
