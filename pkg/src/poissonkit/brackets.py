"""Poisson brackets and the commutator obtained from them.

``{A, B} = sum_i (dA/dq_i dB/dp_i - dA/dp_i dB/dq_i)`` over all ``n`` degrees
of freedom, and ``[A, B] = I*hbar*{A, B}``. Inputs are treated as commuting
phase-space functions; any hbar-dependent terms must be written into the
operands explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from . import calculus
from .core import normal_form as nf
from .core import atoms as _atoms
from .core.normal_form import NormalForm
from .core.numbers import GaussianRational
from .core.space import PhaseSpace
from .errors import SpaceMismatchError


@dataclass(frozen=True)
class BracketResult:
    value: NormalForm
    kind: Literal["poisson", "commutator"]
    space: PhaseSpace
    lhs_name: str | None = None
    rhs_name: str | None = None


def _check_space(a: NormalForm, b: NormalForm, space: PhaseSpace | None) -> PhaseSpace:
    space = space or a.space
    if a.space != space or b.space != space:
        raise SpaceMismatchError("bracket operands must live in the same phase space")
    return space


def poisson_value(a: NormalForm, b: NormalForm, space: PhaseSpace | None = None) -> NormalForm:
    space = _check_space(a, b, space)
    va, vb = a.variables(), b.variables()
    total = NormalForm.zero(space)
    for i in range(space.dimension):
        q, p = _atoms.coord(i), _atoms.mom(i)
        if q in va and p in vb:
            total = nf.add(total, nf.mul(calculus.partial(a, q, space), calculus.partial(b, p, space)))
        if p in va and q in vb:
            total = nf.sub(total, nf.mul(calculus.partial(a, p, space), calculus.partial(b, q, space)))
    return total


def i_hbar(space: PhaseSpace) -> NormalForm:
    return nf.mul(NormalForm.constant(space, GaussianRational(0, 1)), nf.hbar(space))


def poisson_bracket(a, b, space=None, lhs_name=None, rhs_name=None) -> BracketResult:
    space = _check_space(a, b, space)
    return BracketResult(poisson_value(a, b, space), "poisson", space, lhs_name, rhs_name)


def commutator(a, b, space=None, lhs_name=None, rhs_name=None) -> BracketResult:
    space = _check_space(a, b, space)
    value = nf.mul(i_hbar(space), poisson_value(a, b, space))
    return BracketResult(value, "commutator", space, lhs_name, rhs_name)
