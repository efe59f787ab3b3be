"""Parse-level expression trees and their reduction to normal forms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from ..errors import (
    CyclicDefinitionError,
    DivisionByZeroError,
    NonIntegerExponentError,
    UnknownNameError,
)
from . import atoms as _atoms
from . import normal_form as nf
from .atoms import Atom
from .normal_form import NormalForm
from .numbers import GaussianRational
from .space import PhaseSpace


@dataclass(frozen=True)
class Sum:
    terms: tuple


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class Power:
    base: "Expr"
    exponent: int


@dataclass(frozen=True, eq=False)
class AtomRef:
    atom: Atom

    def __eq__(self, other):
        return isinstance(other, AtomRef) and other.atom is self.atom

    def __hash__(self):
        return id(self.atom)


@dataclass(frozen=True)
class Constant:
    value: GaussianRational


@dataclass(frozen=True)
class NameRef:
    name: str


@dataclass(frozen=True)
class Func:
    """``sqrt(arg)`` or ``exp(arg)`` whose argument still references definitions."""

    name: str
    arg: "Expr"


Expr = Union[Sum, Product, Power, AtomRef, Constant, NameRef, Func]


def make_sum(terms) -> Expr:
    flat = []
    for t in terms:
        flat.extend(t.terms if isinstance(t, Sum) else (t,))
    return flat[0] if len(flat) == 1 else Sum(tuple(flat))


def make_product(factors) -> Expr:
    flat = []
    for f in factors:
        flat.extend(f.factors if isinstance(f, Product) else (f,))
    return flat[0] if len(flat) == 1 else Product(tuple(flat))


def atom_for_name(space: PhaseSpace, name: str):
    if name == "hbar":
        return _atoms.HBAR_ATOM
    var = space.variable(name)
    if var is not None:
        kind, i = var
        return _atoms.coord(i) if kind == "q" else _atoms.mom(i)
    if name in space.parameters:
        return _atoms.param(name)
    return None


def name_refs(e: Expr) -> set[str]:
    """Names still to be resolved through definitions."""
    if isinstance(e, NameRef):
        return {e.name}
    if isinstance(e, Sum):
        return set().union(*(name_refs(t) for t in e.terms))
    if isinstance(e, Product):
        return set().union(*(name_refs(f) for f in e.factors))
    if isinstance(e, Power):
        return name_refs(e.base)
    if isinstance(e, Func):
        return name_refs(e.arg)
    return set()


class Resolver:
    """Normalizes expressions against a fixed set of definitions, memoizing each name."""

    def __init__(self, space: PhaseSpace, definitions: Mapping[str, Expr] | None = None):
        self.space = space
        self.definitions = dict(definitions or {})
        self._cache: dict[str, NormalForm] = {}
        self._active: list[str] = []

    def lookup(self, name: str) -> NormalForm:
        if name in self._cache:
            return self._cache[name]
        if name in self._active:
            cycle = " -> ".join(self._active[self._active.index(name):] + [name])
            raise CyclicDefinitionError(f"cyclic definition: {cycle}")
        if name not in self.definitions:
            atom = atom_for_name(self.space, name)
            if atom is None:
                raise UnknownNameError(f"unknown name {name!r}")
            return NormalForm.from_atom(self.space, atom)
        self._active.append(name)
        try:
            value = self.normalize(self.definitions[name])
        finally:
            self._active.pop()
        self._cache[name] = value
        return value

    def normalize(self, e: Expr) -> NormalForm:
        space = self.space
        if isinstance(e, Constant):
            return NormalForm.constant(space, e.value)
        if isinstance(e, AtomRef):
            return NormalForm.from_atom(space, e.atom)
        if isinstance(e, NameRef):
            return self.lookup(e.name)
        if isinstance(e, Sum):
            acc = NormalForm.zero(space)
            for t in e.terms:
                acc = nf.add(acc, self.normalize(t))
            return acc
        if isinstance(e, Product):
            acc = NormalForm.constant(space, 1)
            for f in e.factors:
                acc = nf.mul(acc, self.normalize(f))
            return acc
        if isinstance(e, Power):
            if not isinstance(e.exponent, int):
                raise NonIntegerExponentError(f"exponent {e.exponent!r} is not an integer")
            base = self.normalize(e.base)
            if e.exponent < 0 and base.is_zero():
                raise DivisionByZeroError("division by an expression that is identically zero")
            return nf.pow(base, e.exponent)
        if isinstance(e, Func):
            arg = self.normalize(e.arg)
            if e.name == "sqrt":
                return nf.sqrt(arg)
            if e.name == "exp":
                return nf.exp(arg)
            raise UnknownNameError(f"unknown function {e.name!r}")
        raise TypeError(f"not an expression: {e!r}")


def normalize(e: Expr, space: PhaseSpace, definitions: Mapping[str, Expr] | None = None) -> NormalForm:
    return Resolver(space, definitions).normalize(e)
