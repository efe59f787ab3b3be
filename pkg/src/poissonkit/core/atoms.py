"""Interned atoms: the indeterminates normal forms are polynomials in.

Atoms are compared by identity. Their ``key`` gives the fixed total order used
for monomials: coordinates by index, momenta by index, hbar, parameters
alphabetically, radicals and exponentials by interning order.

The imaginary unit is handled internally as one more algebraic atom with
``I^2 = -1`` so that every coefficient stays a plain rational; it is folded
back into Gaussian-rational coefficients whenever a normal form is shown or
exported.

Interning is guarded by a lock; the tables only ever grow.
"""

from __future__ import annotations

import threading
from itertools import count

COORD, MOM, HBAR, PARAM, RADICAL, EXP, IMAG = range(7)


class Atom:
    __slots__ = ("kind", "index", "name", "arg", "serial", "key", "square", "deps")

    def __init__(self, kind, index=0, name="", arg=None, serial=0, square=None, deps=frozenset()):
        self.kind = kind
        self.index = index
        self.name = name
        # radicand (RADICAL) or argument (EXP) as a NormalForm
        self.arg = arg
        self.serial = serial
        self.key = (kind, index, name, serial)
        # polynomial that atom**2 rewrites to (RADICAL, IMAG)
        self.square = square
        # coordinate/momentum atoms this atom depends on
        self.deps = deps

    @property
    def algebraic(self) -> bool:
        return self.kind == RADICAL or self.kind == IMAG

    def __repr__(self):
        if self.kind == COORD:
            return f"<q{self.index + 1}>"
        if self.kind == MOM:
            return f"<p{self.index + 1}>"
        if self.kind == HBAR:
            return "<hbar>"
        if self.kind == PARAM:
            return f"<{self.name}>"
        if self.kind == IMAG:
            return "<I>"
        tag = "sqrt" if self.kind == RADICAL else "exp"
        return f"<{tag}#{self.serial}>"


_lock = threading.RLock()
_serials = count(1)
_coords: dict[int, Atom] = {}
_moms: dict[int, Atom] = {}
_params: dict[str, Atom] = {}
_radicals: dict[object, Atom] = {}
_exps: dict[object, Atom] = {}

HBAR_ATOM = Atom(HBAR)
IMAG_ATOM = Atom(IMAG)


def coord(i: int) -> Atom:
    a = _coords.get(i)
    if a is None:
        with _lock:
            a = _coords.get(i)
            if a is None:
                a = Atom(COORD, index=i)
                a.deps = frozenset((a,))
                _coords[i] = a
    return a


def mom(i: int) -> Atom:
    a = _moms.get(i)
    if a is None:
        with _lock:
            a = _moms.get(i)
            if a is None:
                a = Atom(MOM, index=i)
                a.deps = frozenset((a,))
                _moms[i] = a
    return a


def param(name: str) -> Atom:
    a = _params.get(name)
    if a is None:
        with _lock:
            a = _params.setdefault(name, Atom(PARAM, name=name))
    return a


def intern_radical(key, factory) -> Atom:
    """Return the radical atom for ``key``, creating it via ``factory(serial)``."""
    a = _radicals.get(key)
    if a is None:
        with _lock:
            a = _radicals.get(key)
            if a is None:
                a = factory(next(_serials))
                _radicals[key] = a
    return a


def intern_exp(key, factory) -> Atom:
    a = _exps.get(key)
    if a is None:
        with _lock:
            a = _exps.get(key)
            if a is None:
                a = factory(next(_serials))
                _exps[key] = a
    return a


def atom_key(a: Atom):
    return a.key
