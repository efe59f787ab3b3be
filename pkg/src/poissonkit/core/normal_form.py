"""Canonical normal forms: reduced fractions of atom polynomials.

A :class:`NormalForm` is ``num / den`` where

* every radical (and the internal imaginary unit) has exponent 0 or 1 in
  each numerator monomial and does not occur in the denominator at all
  (denominators are rationalized with conjugates);
* each monomial carries at most one exponential, ``exp(f)*exp(g)`` having
  been merged to ``exp(f+g)``;
* numerator and denominator are divided by their polynomial GCD and the
  leading coefficient of the denominator is 1.

Equal inputs built through any sequence of field operations therefore end up
as identical dicts, which makes ``==`` an exact equivalence test.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

from sympy import factorint

from ..errors import DivisionByZeroError, NonPolynomialRadicandError, SpaceMismatchError
from . import atoms as _atoms
from . import poly as _poly
from .atoms import EXP, HBAR_ATOM, IMAG, IMAG_ATOM, RADICAL, Atom
from .numbers import GaussianRational, Q, to_fraction
from .poly import (
    ONE,
    cancel_gcd,
    is_constant,
    leading_monomial,
    p_add,
    p_mul,
    p_mul_mono,
    p_neg,
    p_scale,
    p_sub,
    poly_gcd,
    split_atom,
)
from .space import PhaseSpace


class NormalForm:
    __slots__ = ("space", "num", "den", "_hash")

    def __init__(self, space: PhaseSpace, num, den=ONE):
        # callers guarantee (num, den) is already canonical; use from_fraction otherwise
        self.space = space
        self.num = num
        self.den = den
        self._hash = None

    # --- construction -------------------------------------------------------

    @classmethod
    def from_fraction(cls, space, num, den=ONE) -> NormalForm:
        num, den = canonicalize(num, den)
        return cls(space, num, den)

    @classmethod
    def zero(cls, space) -> NormalForm:
        return cls(space, {})

    @classmethod
    def constant(cls, space, value) -> NormalForm:
        g = GaussianRational.coerce(value)
        num = {}
        if g.re:
            num[()] = Q(g.re.numerator, g.re.denominator)
        if g.im:
            num[((IMAG_ATOM, 1),)] = Q(g.im.numerator, g.im.denominator)
        return cls(space, num)

    @classmethod
    def from_atom(cls, space, atom: Atom) -> NormalForm:
        return cls(space, {((atom, 1),): Q(1)})

    @classmethod
    def symbol(cls, space, name: str) -> NormalForm:
        """Coordinate, momentum, parameter or ``hbar`` by name."""
        from .expr import atom_for_name

        atom = atom_for_name(space, name)
        if atom is None:
            from ..errors import UnknownNameError

            raise UnknownNameError(f"unknown name {name!r}")
        return cls.from_atom(space, atom)

    # --- inspection ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def is_polynomial(self) -> bool:
        return is_constant(self.den)

    def is_constant(self) -> bool:
        return self.is_polynomial() and all(
            a is IMAG_ATOM for m in self.num for a, _ in m
        )

    def constant_value(self) -> GaussianRational:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.terms().get((), GaussianRational(0))

    def atoms(self) -> list[Atom]:
        """Atoms used by numerator or denominator (imaginary unit excluded)."""
        return [a for a in _poly.p_atoms({**self.num, **self.den}) if a is not IMAG_ATOM]

    def variables(self) -> frozenset:
        """Coordinate/momentum atoms this value depends on, radicands included."""
        deps = set()
        for a in self.atoms():
            deps |= a.deps
        return frozenset(deps)

    def terms(self, which: str = "num") -> dict:
        """Numerator (or denominator) as ``{monomial: GaussianRational}``."""
        P = self.num if which == "num" else self.den
        out: dict = {}
        for m, c in P.items():
            c = to_fraction(c)
            for i, (a, _) in enumerate(m):
                if a is IMAG_ATOM:
                    key = m[:i] + m[i + 1:]
                    out[key] = out.get(key, GaussianRational(0)) + GaussianRational(0, c)
                    break
            else:
                out[m] = out.get(m, GaussianRational(0)) + GaussianRational(c)
        return {m: c for m, c in out.items() if c}

    def key(self):
        return (frozenset(self.num.items()), frozenset(self.den.items()))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.space, self.key()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = NormalForm.constant(self.space, other)
        if not isinstance(other, NormalForm):
            return NotImplemented
        return self.space == other.space and self.num == other.num and self.den == other.den

    def __repr__(self):
        from .render import render_human

        return f"NormalForm({render_human(self)!r})"

    def __str__(self):
        from .render import render_human

        return render_human(self)

    # --- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> NormalForm:
        if isinstance(other, NormalForm):
            if other.space is not self.space and other.space != self.space:
                raise SpaceMismatchError("operands belong to different phase spaces")
            return other
        if isinstance(other, (int, Fraction, GaussianRational, complex)) or hasattr(other, "denominator"):
            return NormalForm.constant(self.space, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return neg(self)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(self, neg(other))

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(other, neg(self))

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mul(self, inverse(other))

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mul(other, inverse(self))

    def __pow__(self, k):
        return pow(self, k)


# --- canonicalization -------------------------------------------------------

def canonicalize(num, den):
    if not den:
        raise DivisionByZeroError("denominator is identically zero")
    if not num:
        return {}, ONE
    # rationalize: eliminate radicals, then the imaginary unit, from den
    while True:
        alg = [a for a in _poly.p_atoms(den) if a.kind == RADICAL or a.kind == IMAG]
        if not alg:
            break
        atom = alg[0]
        d0, d1 = split_atom(den, atom)
        conj = p_sub(d0, p_mul_mono(d1, ((atom, 1),)))
        num = p_mul(num, conj)
        den = p_mul(den, conj)
        if not den:
            raise DivisionByZeroError("denominator vanishes after radical reduction")
    if any(a.kind == EXP for m in den for a, _ in m):
        lead = leading_monomial(den)
        for a, _ in lead:
            if a.kind == EXP:
                inv = exp_atom(neg(a.arg))
                num = p_mul_mono(num, ((inv, 1),))
                den = p_mul_mono(den, ((inv, 1),))
                break
    if is_constant(den):
        return p_scale(num, 1 / den[()]), ONE
    num, den = cancel_gcd(num, den)
    if is_constant(den):
        return p_scale(num, 1 / den[()]), ONE
    lc = den[leading_monomial(den)]
    if lc != 1:
        inv = 1 / lc
        num, den = p_scale(num, inv), p_scale(den, inv)
    return num, den


# --- field operations -------------------------------------------------------

def _check(a: NormalForm, b: NormalForm):
    if a.space is not b.space and a.space != b.space:
        raise SpaceMismatchError("operands belong to different phase spaces")


def add(a: NormalForm, b: NormalForm) -> NormalForm:
    _check(a, b)
    if not a.num:
        return b
    if not b.num:
        return a
    if is_constant(a.den) and is_constant(b.den):
        return NormalForm(a.space, p_add(a.num, b.num))
    if is_constant(b.den):
        # (n + m*d)/d stays reduced when n/d is
        return NormalForm(a.space, p_add(a.num, p_mul(b.num, a.den)), a.den)
    if is_constant(a.den):
        return NormalForm(a.space, p_add(b.num, p_mul(a.num, b.den)), b.den)
    if a.den == b.den:
        return NormalForm.from_fraction(a.space, p_add(a.num, b.num), a.den)
    g = poly_gcd(a.den, b.den)
    if is_constant(g):
        da, db = a.den, b.den
    else:
        da = _poly.poly_exquo(a.den, g)
        db = _poly.poly_exquo(b.den, g)
    num = p_add(p_mul(a.num, db), p_mul(b.num, da))
    return NormalForm.from_fraction(a.space, num, p_mul(a.den, db))


def neg(a: NormalForm) -> NormalForm:
    return NormalForm(a.space, p_neg(a.num), a.den)


def sub(a: NormalForm, b: NormalForm) -> NormalForm:
    return add(a, neg(b))


def mul(a: NormalForm, b: NormalForm) -> NormalForm:
    _check(a, b)
    if not a.num or not b.num:
        return NormalForm.zero(a.space)
    if is_constant(a.den) and is_constant(b.den):
        return NormalForm(a.space, p_mul(a.num, b.num))
    return NormalForm.from_fraction(a.space, p_mul(a.num, b.num), p_mul(a.den, b.den))


def scale(a: NormalForm, c) -> NormalForm:
    return mul(a, NormalForm.constant(a.space, c))


def inverse(a: NormalForm) -> NormalForm:
    if not a.num:
        raise DivisionByZeroError("division by zero")
    return NormalForm.from_fraction(a.space, a.den, a.num)


def pow(a: NormalForm, k: int) -> NormalForm:
    if not isinstance(k, int):
        raise TypeError("exponent must be an integer")
    if k < 0:
        if not a.num:
            raise DivisionByZeroError("zero raised to a negative power")
        return pow(inverse(a), -k)
    result = NormalForm.constant(a.space, 1)
    base = a
    while k:
        if k & 1:
            result = mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)
    return result


def is_zero(a: NormalForm) -> bool:
    return not a.num


def equivalent(a: NormalForm, b: NormalForm) -> bool:
    return is_zero(sub(a, b))


# --- radicals and exponentials ----------------------------------------------

def _squarefree_split(n: int) -> tuple[int, int]:
    """n = s^2 * t with t squarefree; returns (s, t)."""
    if n < 2:
        return 1, n
    s, t = 1, 1
    for p, k in factorint(n).items():
        s *= p ** (k // 2)
        if k % 2:
            t *= p
    return s, t


def sqrt(radicand: NormalForm) -> NormalForm:
    """Principal square root of a real polynomial normal form."""
    space = radicand.space
    if not radicand.num:
        return NormalForm.zero(space)
    if not radicand.is_polynomial():
        raise NonPolynomialRadicandError("radicand must be a polynomial")
    for a in radicand.atoms():
        if a.kind == RADICAL or a.kind == EXP:
            raise NonPolynomialRadicandError("radicand may not contain sqrt or exp")
    if any(a is IMAG_ATOM for m in radicand.num for a, _ in m):
        raise NonPolynomialRadicandError("radicand must have real coefficients")
    P = radicand.num
    coeffs = [to_fraction(c) for c in P.values()]
    num_g = 0
    den_l = 1
    from math import gcd

    for c in coeffs:
        num_g = gcd(num_g, abs(c.numerator))
        den_l = den_l * c.denominator // gcd(den_l, c.denominator)
    content = Fraction(num_g, den_l)
    primitive = p_scale(P, Q(content.denominator, content.numerator))
    # sqrt(a/b * P') = sqrt(a*b)/b * sqrt(P') with the square part of a*b pulled out
    s, t = _squarefree_split(content.numerator * content.denominator)
    outside = Fraction(s, content.denominator)
    inner = p_scale(primitive, Q(t))
    if is_constant(inner):
        value = to_fraction(inner[()])
        root = isqrt(abs(value.numerator))
        if root * root == abs(value.numerator) and value.denominator == 1:
            result = NormalForm.constant(space, root * outside)
            return result if value > 0 else mul(result, NormalForm.constant(space, GaussianRational(0, 1)))
        if value < 0:
            pos = sqrt(NormalForm.constant(space, -value))
            return mul(pos, NormalForm.constant(space, GaussianRational(0, outside)))
    atom = radical_atom(NormalForm(space, inner))
    return NormalForm(space, {((atom, 1),): Q(outside.numerator, outside.denominator)})


def radical_atom(radicand: NormalForm) -> Atom:
    key = ("sqrt", radicand.space, radicand.key())

    def factory(serial):
        deps = radicand.variables()
        return Atom(RADICAL, arg=radicand, serial=serial, square=radicand.num, deps=deps)

    return _atoms.intern_radical(key, factory)


def exp_atom(argument: NormalForm):
    """Interned ``exp(argument)``; None when the argument is zero (exp(0) = 1)."""
    if not argument.num:
        return None
    if any(a.kind == EXP for a in argument.atoms()):
        raise NonPolynomialRadicandError("nested exponentials are not supported")
    key = ("exp", argument.space, argument.key())

    def factory(serial):
        return Atom(EXP, arg=argument, serial=serial, deps=argument.variables())

    return _atoms.intern_exp(key, factory)


def exp(argument: NormalForm) -> NormalForm:
    atom = exp_atom(argument)
    if atom is None:
        return NormalForm.constant(argument.space, 1)
    return NormalForm.from_atom(argument.space, atom)


_merge_cache: dict = {}


def _exp_merge(a: Atom, b: Atom):
    key = (a, b)
    hit = _merge_cache.get(key, False)
    if hit is False:
        hit = exp_atom(add(a.arg, b.arg))
        _merge_cache[key] = hit
        _merge_cache[(b, a)] = hit
    return hit


_poly.exp_merge = _exp_merge


def hbar(space: PhaseSpace) -> NormalForm:
    return NormalForm.from_atom(space, HBAR_ATOM)


def imaginary_unit(space: PhaseSpace) -> NormalForm:
    return NormalForm.constant(space, GaussianRational(0, 1))
