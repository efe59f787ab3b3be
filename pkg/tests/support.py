"""Shared fixtures and random expression builders for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

from hypothesis import strategies as st

from poissonkit.core import normal_form as nf
from poissonkit.core.expr import Resolver
from poissonkit.core.normal_form import NormalForm
from poissonkit.core.numbers import GaussianRational
from poissonkit.core.space import PhaseSpace
from poissonkit.parser import parse_session

SESSIONS = Path(__file__).resolve().parent.parent / "sessions"

COULOMB_DEFS = """\
dimension 3
define r  = sqrt(q1^2+q2^2+q3^2)
define ham = (p1^2+p2^2+p3^2)/2 - 1/r
define l1 = q2*p3 - q3*p2
define l2 = q3*p1 - q1*p3
define l3 = q1*p2 - q2*p1
define r1 = l3*p2 - l2*p3 - I*hbar*p1 - q1/r
define r2 = l1*p3 - l3*p1 - I*hbar*p2 - q2/r
define r3 = l2*p1 - l1*p2 - I*hbar*p3 - q3/r
"""

NAMES = ("r", "ham", "l1", "l2", "l3", "r1", "r2", "r3")


def coulomb(hbar_terms: bool = True) -> tuple[PhaseSpace, dict[str, NormalForm]]:
    """Coulomb Hamiltonian, angular momentum and Runge-Lenz components."""
    text = COULOMB_DEFS
    if not hbar_terms:
        for i in (1, 2, 3):
            text = text.replace(f" - I*hbar*p{i}", "")
    script = parse_session(text)
    resolver = Resolver(script.space, script.definition_map())
    return script.space, {n: resolver.lookup(n) for n in NAMES}


def symbols(space: PhaseSpace) -> list[NormalForm]:
    return [NormalForm.symbol(space, n) for n in space.coord_names + space.momentum_names]


def random_poly(rng: random.Random, space: PhaseSpace, degree: int = 3, terms: int = 4,
                gaussian: bool = False, with_hbar: bool = False) -> NormalForm:
    """Sum of a few random monomials with small integer coefficients."""
    syms = symbols(space)
    if with_hbar:
        syms.append(nf.hbar(space))
    total = NormalForm.zero(space)
    for _ in range(terms):
        c = GaussianRational(rng.randint(-3, 3), rng.randint(-2, 2) if gaussian else 0)
        if c == 0:
            continue
        term = NormalForm.constant(space, c)
        for _ in range(rng.randint(0, degree)):
            term = term * rng.choice(syms)
        total = total + term
    return total


def inverse_radius(space: PhaseSpace) -> NormalForm:
    u = sum((s * s for s in symbols(space)[: space.dimension]), NormalForm.zero(space))
    return nf.inverse(nf.sqrt(u))


def random_phase_function(rng: random.Random, space: PhaseSpace, degree: int = 3, gaussian: bool = False) -> NormalForm:
    """A random polynomial, optionally times 1/r; total polynomial degree <= ``degree``."""
    f = random_poly(rng, space, degree, rng.randint(1, 3), gaussian=gaussian)
    if rng.random() < 0.5:
        f = f * inverse_radius(space)
    return f


def seeds():
    return st.integers(min_value=0, max_value=2**32 - 1)
