"""Numeric cross-checks for the symbolic engine.

Normal forms are evaluated at concrete phase-space points and brackets are
recomputed with central differences, independently of the symbolic
derivative code. Sampling is seeded per trial (``seed + trial``) so results do
not depend on evaluation order.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .core.atoms import COORD, EXP, HBAR, IMAG, MOM, PARAM, RADICAL
from .core.expr import AtomRef, Constant, Func, NameRef, Power, Product, Sum
from .core.normal_form import NormalForm
from .core.numbers import GaussianRational, format_rational, to_fraction
from .core.space import PhaseSpace
from .errors import PoleAtPointError, UnknownNameError

DEFAULT_STEP = 1e-5
SAMPLE_RANGE = 2
SAMPLE_DENOMINATOR = 1000
RADICAND_GUARD = 1e-3
MAX_RESAMPLES = 100


@dataclass(frozen=True)
class PhasePoint:
    q: tuple
    p: tuple
    params: Mapping[str, object] = field(default_factory=dict)

    def shifted(self, kind: str, i: int, delta: float) -> PhasePoint:
        if kind == "q":
            q = list(self.q)
            q[i] = q[i] + delta
            return PhasePoint(tuple(q), self.p, self.params)
        p = list(self.p)
        p[i] = p[i] + delta
        return PhasePoint(self.q, tuple(p), self.params)

    def as_float(self) -> PhasePoint:
        return PhasePoint(
            tuple(float(x) for x in self.q),
            tuple(float(x) for x in self.p),
            {k: float(v) for k, v in self.params.items()},
        )

    def describe(self, space: PhaseSpace) -> dict:
        """Exact rational strings keyed by declared names."""

        def text(x):
            return format_rational(x) if isinstance(x, (int, Fraction)) else repr(x)

        out = {name: text(v) for name, v in zip(space.coord_names, self.q)}
        out.update({name: text(v) for name, v in zip(space.momentum_names, self.p)})
        out.update({name: text(self.params[name]) for name in space.parameters})
        return out


class _Inexact(Exception):
    pass


def _special_atoms(f: NormalForm, found: dict):
    for a in f.atoms():
        if (a.kind == RADICAL or a.kind == EXP) and a not in found:
            _special_atoms(a.arg, found)
            found[a] = None


class _Evaluator:
    def __init__(self, pt: PhasePoint, hbar, exact: bool):
        self.pt = pt
        self.exact = exact
        self.hbar = to_fraction(hbar) if exact else complex(hbar)
        self.memo: dict = {}

    def atom(self, a):
        v = self.memo.get(a)
        if v is not None:
            return v
        k = a.kind
        if k == COORD:
            v = self.pt.q[a.index]
        elif k == MOM:
            v = self.pt.p[a.index]
        elif k == HBAR:
            v = self.hbar
        elif k == PARAM:
            v = self.pt.params[a.name]
        elif k == IMAG:
            v = GaussianRational(0, 1) if self.exact else 1j
        elif k == RADICAL:
            v = self._sqrt(self.value(a.arg))
        else:
            if self.exact:
                raise _Inexact
            v = cmath.exp(self.value(a.arg))
        if self.exact and not isinstance(v, GaussianRational):
            v = to_fraction(v)
        elif not self.exact:
            v = complex(v)
        self.memo[a] = v
        return v

    def _sqrt(self, x):
        if not self.exact:
            return cmath.sqrt(x)
        x = GaussianRational.coerce(x)
        if x.im != 0 or x.re < 0:
            raise _Inexact
        n, d = x.re.numerator, x.re.denominator
        rn, rd = math.isqrt(n), math.isqrt(d)
        if rn * rn != n or rd * rd != d:
            raise _Inexact
        return Fraction(rn, rd)

    def poly(self, P):
        total = 0
        for m, c in P.items():
            term = to_fraction(c) if self.exact else float(c)
            for a, e in m:
                term = term * self.atom(a) ** e
            total = total + term
        return total

    def value(self, f: NormalForm):
        den = self.poly(f.den)
        if den == 0 or (not self.exact and abs(den) < 1e-300):
            raise PoleAtPointError("denominator vanishes at the sample point")
        return self.poly(f.num) / den


def evaluate(f: NormalForm, pt: PhasePoint, mode: str = "float", hbar=1):
    """Value of ``f`` at ``pt``.

    ``mode="exact"`` returns a :class:`GaussianRational` whenever every radical
    at the point is a rational square and no exponential is involved; otherwise
    (and always in ``"float"`` mode) a Python complex is returned.
    """
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exact":
        try:
            return GaussianRational.coerce(_Evaluator(pt, hbar, True).value(f))
        except _Inexact:
            pass
    return complex(_Evaluator(pt.as_float(), hbar, False).value(f))


def numeric_bracket(a: NormalForm, b: NormalForm, pt: PhasePoint, h: float = DEFAULT_STEP, hbar=1) -> complex:
    """Poisson bracket at ``pt`` from central differences of ``a`` and ``b``."""
    space = a.space
    base = pt.as_float()

    def d(f, kind, i):
        hi = evaluate(f, base.shifted(kind, i, h), hbar=hbar)
        lo = evaluate(f, base.shifted(kind, i, -h), hbar=hbar)
        return (hi - lo) / (2 * h)

    total = 0j
    for i in range(space.dimension):
        total += d(a, "q", i) * d(b, "p", i) - d(a, "p", i) * d(b, "q", i)
    return total


def _guard(forms, pt: PhasePoint, hbar) -> bool:
    special: dict = {}
    for f in forms:
        _special_atoms(f, special)
    fpt = pt.as_float()
    ev = _Evaluator(fpt, hbar, False)
    try:
        for a in special:
            if a.kind == RADICAL:
                v = ev.value(a.arg)
                if abs(v.imag) > 1e-12 or v.real <= RADICAND_GUARD:
                    return False
        for f in forms:
            if abs(ev.poly(f.den)) <= 1e-9:
                return False
    except (PoleAtPointError, OverflowError, ZeroDivisionError):
        return False
    return True


def sample_point(space: PhaseSpace, rng: random.Random, guard=None, hbar=1) -> PhasePoint:
    """Uniform rational point in [-2, 2]^(2n); parameters in [1/2, 2]."""
    lim = SAMPLE_RANGE * SAMPLE_DENOMINATOR
    for _ in range(MAX_RESAMPLES):
        q = tuple(Fraction(rng.randint(-lim, lim), SAMPLE_DENOMINATOR) for _ in range(space.dimension))
        p = tuple(Fraction(rng.randint(-lim, lim), SAMPLE_DENOMINATOR) for _ in range(space.dimension))
        params = {
            name: Fraction(rng.randint(SAMPLE_DENOMINATOR // 2, lim), SAMPLE_DENOMINATOR)
            for name in space.parameters
        }
        pt = PhasePoint(q, p, params)
        if guard is None or _guard(guard, pt, hbar):
            return pt
    raise PoleAtPointError(f"no admissible sample point after {MAX_RESAMPLES} attempts")


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    trials: int
    tolerance: float
    seed: int
    worst_point: PhasePoint | None
    worst_numeric: complex
    worst_symbolic: complex
    discrepancy: float

    def to_record(self, space: PhaseSpace) -> dict:
        return {
            "passed": self.passed,
            "trials": self.trials,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "discrepancy": self.discrepancy,
            "worst_point": self.worst_point.describe(space) if self.worst_point else None,
            "worst_numeric": [self.worst_numeric.real, self.worst_numeric.imag],
            "worst_symbolic": [self.worst_symbolic.real, self.worst_symbolic.imag],
        }


def cross_check(
    a: NormalForm,
    b: NormalForm,
    symbolic: NormalForm,
    trials: int = 100,
    tol: float = 1e-6,
    *,
    seed: int = 42,
    hbar=1,
    kind: str = "poisson",
    h: float = DEFAULT_STEP,
) -> CheckResult:
    """Compare ``symbolic`` with the finite-difference bracket of ``a`` and ``b``.

    Passes iff ``|numeric - symbolic| <= tol * (1 + |symbolic|)`` at every
    sampled point. With ``kind="commutator"`` the numeric bracket is multiplied
    by ``I*hbar`` first.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    space = a.space
    factor = 1j * complex(hbar) if kind == "commutator" else 1
    worst = (-1.0, None, 0j, 0j, 0.0)
    passed = True
    for t in range(trials):
        rng = random.Random(seed + t)
        pt = sample_point(space, rng, guard=(a, b, symbolic), hbar=hbar)
        num = numeric_bracket(a, b, pt, h, hbar) * factor
        sym = evaluate(symbolic, pt, hbar=hbar)
        diff = abs(num - sym)
        score = diff / (1 + abs(sym))
        if diff > tol * (1 + abs(sym)):
            passed = False
        if score > worst[0]:
            worst = (score, pt, num, sym, diff)
    _, pt, num, sym, diff = worst
    return CheckResult(passed, trials, tol, seed, pt, num, sym, diff)


def evaluate_expr(e, pt: PhasePoint, space: PhaseSpace, definitions=None, hbar=1) -> complex:
    """Float value of a parse tree, computed straight from the tree.

    Shares nothing with normalization, so it can be used to test it.
    """
    definitions = definitions or {}
    fpt = pt.as_float()

    def ev(node):
        if isinstance(node, Constant):
            return complex(node.value)
        if isinstance(node, AtomRef):
            a = node.atom
            if a.kind == COORD:
                return complex(fpt.q[a.index])
            if a.kind == MOM:
                return complex(fpt.p[a.index])
            if a.kind == HBAR:
                return complex(hbar)
            if a.kind == PARAM:
                return complex(fpt.params[a.name])
            if a.kind == RADICAL:
                return cmath.sqrt(evaluate(a.arg, pt, hbar=hbar))
            return cmath.exp(evaluate(a.arg, pt, hbar=hbar))
        if isinstance(node, NameRef):
            if node.name in definitions:
                return ev(definitions[node.name])
            raise UnknownNameError(f"unknown name {node.name!r}")
        if isinstance(node, Sum):
            return sum((ev(t) for t in node.terms), 0j)
        if isinstance(node, Product):
            out = 1 + 0j
            for f in node.factors:
                out *= ev(f)
            return out
        if isinstance(node, Power):
            base = ev(node.base)
            if base == 0 and node.exponent < 0:
                raise PoleAtPointError("division by zero at the sample point")
            return base ** node.exponent
        if isinstance(node, Func):
            arg = ev(node.arg)
            return cmath.sqrt(arg) if node.name == "sqrt" else cmath.exp(arg)
        raise TypeError(f"not an expression: {node!r}")

    return ev(e)

