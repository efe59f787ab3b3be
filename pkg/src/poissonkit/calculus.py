"""Exact partial derivatives of normal forms."""

from __future__ import annotations

from .core import atoms as _atoms
from .core import normal_form as nf
from .core.atoms import COORD, EXP, MOM, RADICAL, Atom
from .core.normal_form import NormalForm
from .core.numbers import Q
from .core.poly import is_constant
from .core.space import PhaseSpace
from .errors import SpaceMismatchError, UnknownVariableError


def variable_atom(space: PhaseSpace, v) -> Atom:
    """Resolve a coordinate/momentum name (or atom) to its atom."""
    if isinstance(v, Atom):
        if v.kind in (COORD, MOM) and v.index < space.dimension:
            return v
        raise UnknownVariableError(f"{v!r} is not a canonical variable")
    var = space.variable(v)
    if var is None:
        raise UnknownVariableError(f"{v!r} is not a coordinate or momentum of this phase space")
    kind, i = var
    return _atoms.coord(i) if kind == "q" else _atoms.mom(i)


_atom_derivatives: dict = {}


def _atom_derivative(space, atom: Atom, v: Atom) -> NormalForm:
    """d(atom)/dv for a radical or exponential atom."""
    key = (atom, v)
    hit = _atom_derivatives.get(key)
    if hit is None:
        inner = partial(atom.arg, v, space)
        this = NormalForm.from_atom(space, atom)
        if atom.kind == RADICAL:
            # d sqrt(u) = sqrt(u) * u' / (2u)
            hit = nf.mul(this, nf.mul(inner, nf.inverse(nf.scale(atom.arg, 2))))
        else:
            hit = nf.mul(this, inner)
        _atom_derivatives[key] = hit
    return hit


def _poly_partial(space, P, v: Atom) -> NormalForm:
    direct = {}
    chained: dict = {}
    for m, c in P.items():
        for i, (a, e) in enumerate(m):
            if a is v:
                target = direct
            elif (a.kind == RADICAL or a.kind == EXP) and v in a.deps:
                target = chained.setdefault(a, {})
            else:
                continue
            rest = m[:i] + ((a, e - 1),) + m[i + 1:] if e > 1 else m[:i] + m[i + 1:]
            target[rest] = target.get(rest, 0) + c * e
    result = NormalForm(space, {m: c for m, c in direct.items() if c})
    for a in sorted(chained, key=_atoms.atom_key):
        coeff = NormalForm(space, {m: c for m, c in chained[a].items() if c})
        result = nf.add(result, nf.mul(coeff, _atom_derivative(space, a, v)))
    return result


def partial(f: NormalForm, v, space: PhaseSpace | None = None) -> NormalForm:
    """Exact partial derivative of ``f`` with respect to the canonical variable ``v``.

    Parameters and ``hbar`` are constants. Radicals differentiate as
    ``u'/(2 sqrt(u))`` and exponentials as ``exp(u) u'``.
    """
    space = space or f.space
    if f.space != space:
        raise SpaceMismatchError("expression belongs to a different phase space")
    v = variable_atom(space, v)
    if v not in f.variables():
        return NormalForm.zero(space)
    dnum = _poly_partial(space, f.num, v)
    if is_constant(f.den):
        return nf.scale(dnum, 1 / f.den[()]) if f.den[()] != 1 else dnum
    dden = _poly_partial(space, f.den, v)
    den_inv = NormalForm.from_fraction(space, {(): Q(1)}, f.den)
    # (N/D)' = (N' - (N/D) D') / D
    return nf.mul(nf.sub(dnum, nf.mul(f, dden)), den_inv)


def gradient(f: NormalForm, space: PhaseSpace | None = None) -> dict[str, NormalForm]:
    space = space or f.space
    names = space.coord_names + space.momentum_names
    return {name: partial(f, name, space) for name in names}
