"""Exact scalars: the internal rational type and public Gaussian rationals."""

from __future__ import annotations

from fractions import Fraction

try:  # gmpy2 is an order of magnitude faster than Fraction for the hot loops
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    Q = Fraction


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str, float)):
        return Fraction(x)
    return Fraction(int(x.numerator), int(x.denominator))


def parse_rational(text: str) -> Fraction:
    """Parse ``"3"``, ``"-3/2"`` or a decimal like ``"0.25"`` exactly."""
    return Fraction(text.strip())


def format_rational(x) -> str:
    x = to_fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class GaussianRational:
    """An exact complex number ``re + im*I`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            re, im = re.re, re.im + to_fraction(im)
        self.re = to_fraction(re)
        self.im = to_fraction(im)

    @classmethod
    def coerce(cls, x) -> GaussianRational:
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(x)

    def is_real(self) -> bool:
        return self.im == 0

    def conjugate(self) -> GaussianRational:
        return GaussianRational(self.re, -self.im)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        try:
            other = GaussianRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __neg__(self) -> GaussianRational:
        return GaussianRational(-self.re, -self.im)

    def __add__(self, other) -> GaussianRational:
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other) -> GaussianRational:
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other) -> GaussianRational:
        return GaussianRational.coerce(other) - self

    def __mul__(self, other) -> GaussianRational:
        other = GaussianRational.coerce(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> GaussianRational:
        other = GaussianRational.coerce(other)
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * other.conjugate()
        return GaussianRational(num.re / norm, num.im / norm)

    def __rtruediv__(self, other) -> GaussianRational:
        return GaussianRational.coerce(other) / self

    def __pow__(self, k: int) -> GaussianRational:
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return GaussianRational(1) / self ** (-k)
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            base = base * base
        return out

    def __repr__(self) -> str:
        return f"GaussianRational({format_rational(self.re)!r}, {format_rational(self.im)!r})"

    def __str__(self) -> str:
        return format_gaussian(self)


def format_gaussian(g: GaussianRational) -> str:
    """Render using the expression language (``I`` is the imaginary unit)."""
    if g.im == 0:
        return format_rational(g.re)
    if g.im == 1:
        im = "I"
    elif g.im == -1:
        im = "-I"
    else:
        im = f"{format_rational(g.im)}*I"
    if g.re == 0:
        return im
    sign = "-" if im.startswith("-") else "+"
    return f"({format_rational(g.re)} {sign} {im.lstrip('-')})"
