"""Expression and session-script parsing.

Expression grammar (loosest to tightest)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := primary ("^" unary)?          # right associative
    primary := NUMBER | NAME | ("sqrt" | "exp") "(" expr ")" | "(" expr ")"

Exponents must reduce to integer constants. Implicit multiplication is not
accepted. ``I`` is the imaginary unit and ``hbar`` the reduced Planck constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .core import normal_form as nf
from .core.expr import (
    AtomRef,
    Constant,
    Expr,
    Func,
    NameRef,
    Power,
    Resolver,
    atom_for_name,
    make_product,
    make_sum,
    name_refs,
)
from .core.numbers import GaussianRational
from .core.space import RESERVED, PhaseSpace
from .errors import (
    DuplicateDefinitionError,
    KitError,
    MissingDimensionError,
    NonIntegerExponentError,
    ParseError,
    UnknownNameError,
)

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)

MINUS_ONE = Constant(GaussianRational(-1))


@dataclass
class Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    offset: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", offset=pos)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("end", "", n))
    return tokens


class _ExprParser:
    def __init__(self, text, space, known_names, allow_unresolved):
        self.text = text
        self.space = space
        self.known = known_names
        self.allow_unresolved = allow_unresolved
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, op: str) -> Token:
        t = self.tok
        if t.kind != "op" or t.text != op:
            found = repr(t.text) if t.kind != "end" else "end of input"
            raise ParseError(f"expected {op!r}, found {found}", offset=t.offset)
        return self.advance()

    def parse(self) -> Expr:
        if self.tok.kind == "end":
            raise ParseError("empty expression", offset=0)
        e = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self.tok.text!r}", offset=self.tok.offset)
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            t = self.term()
            terms.append(t if op == "+" else make_product([MINUS_ONE, t]))
        return make_sum(terms)

    def term(self) -> Expr:
        factors = [self.unary()]
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            f = self.unary()
            factors.append(f if op == "*" else Power(f, -1))
        return make_product(factors)

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            operand = self.unary()
            return operand if op == "+" else make_product([MINUS_ONE, operand])
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            start = self.tok.offset
            exponent = self.unary()
            return Power(base, self._integer_exponent(exponent, start))
        return base

    def _integer_exponent(self, e: Expr, offset: int) -> int:
        if name_refs(e):
            raise NonIntegerExponentError("exponent must be an integer constant", offset=offset)
        try:
            value = nf_of(e, self.space)
        except KitError as exc:
            exc.offset = offset
            raise
        if not value.is_constant():
            raise NonIntegerExponentError("exponent must be an integer constant", offset=offset)
        c = value.constant_value()
        if c.im != 0 or c.re.denominator != 1:
            raise NonIntegerExponentError(
                f"exponent {c} is not an integer; use sqrt() for square roots", offset=offset
            )
        return int(c.re)

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Constant(GaussianRational(Fraction(t.text)))
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "name":
            self.advance()
            if t.text in ("sqrt", "exp"):
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return self._function(t, arg)
            return self._name(t)
        found = repr(t.text) if t.kind != "end" else "end of input"
        raise ParseError(f"unexpected {found}", offset=t.offset)

    def _name(self, t: Token) -> Expr:
        name = t.text
        if name == "I":
            return Constant(GaussianRational(0, 1))
        atom = atom_for_name(self.space, name)
        if atom is not None:
            return AtomRef(atom)
        if self.allow_unresolved or (self.known is not None and name in self.known):
            return NameRef(name)
        raise UnknownNameError(f"unknown name {name!r}", offset=t.offset)

    def _function(self, t: Token, arg: Expr) -> Expr:
        if name_refs(arg):
            return Func(t.text, arg)
        # radicand fully known now: build the atom eagerly so errors surface here
        try:
            value = nf_of(Func(t.text, arg), self.space)
        except KitError as exc:
            exc.offset = t.offset
            raise
        if value.is_constant():
            return Constant(value.constant_value())
        if len(value.num) == 1 and nf.is_constant(value.den):
            ((m, c),) = value.num.items()
            if c == 1 and len(m) == 1 and m[0][1] == 1:
                return AtomRef(m[0][0])
        return Func(t.text, arg)


def nf_of(e: Expr, space: PhaseSpace):
    return Resolver(space).normalize(e)


def parse_expression(
    text: str,
    space: PhaseSpace,
    known_names: Iterable[str] | None = (),
    *,
    allow_unresolved: bool = False,
) -> Expr:
    """Parse ``text`` into an :class:`Expr`.

    Identifiers in ``known_names`` become :class:`NameRef` nodes to be resolved
    later against definitions; with ``allow_unresolved`` any unknown identifier
    does.
    """
    known = None if known_names is None else frozenset(known_names)
    return _ExprParser(text, space, known, allow_unresolved).parse()


# --- session scripts ----------------------------------------------------------

@dataclass(frozen=True)
class Arg:
    text: str
    expr: Expr


@dataclass(frozen=True)
class Bracket:
    lhs: Arg
    rhs: Arg
    line: int
    source: str


@dataclass(frozen=True)
class Commutator:
    lhs: Arg
    rhs: Arg
    line: int
    source: str


@dataclass(frozen=True)
class Diff:
    expr: Arg
    var: str
    line: int
    source: str


@dataclass(frozen=True)
class Simplify:
    expr: Arg
    line: int
    source: str


@dataclass(frozen=True)
class Closure:
    scalars: tuple[Arg, ...]
    generators: tuple[Arg, ...]
    degree: int
    hbar_max: int
    line: int
    source: str


@dataclass(frozen=True)
class Check:
    lhs: Arg
    rhs: Arg
    trials: int
    tolerance: float
    expected: Arg | None
    line: int
    source: str


Command = Bracket | Commutator | Diff | Simplify | Closure | Check


@dataclass
class Definition:
    name: str
    expr: Expr
    line: int
    source: str


@dataclass
class SessionScript:
    space: PhaseSpace
    definitions: list[Definition] = field(default_factory=list)
    commands: list = field(default_factory=list)

    def definition_map(self) -> dict[str, Expr]:
        return {d.name: d.expr for d in self.definitions}


DEFAULT_DEGREE = 2
DEFAULT_HBAR_MAX = 2
DEFAULT_TRIALS = 100
DEFAULT_TOLERANCE = 1e-6

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_DECLARATIONS = ("dimension", "coordinates", "momenta", "param")


def split_args(text: str, line: int) -> list[str]:
    """Split on top-level whitespace; parenthesized groups stay together."""
    out, cur, depth = [], [], 0
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced ')'", line=line)
        if ch.isspace() and depth == 0:
            if cur:
                out.append("".join(cur))
                cur = []
            continue
        cur.append(ch)
    if depth:
        raise ParseError("unbalanced '('", line=line)
    if cur:
        out.append("".join(cur))
    return out


def _strip_comment(raw: str) -> str:
    i = raw.find("#")
    return (raw if i < 0 else raw[:i]).strip()


def parse_session(text: str) -> SessionScript:
    """Parse a session script; errors carry the 1-based line number."""
    dimension = None
    coords = momenta = None
    params: list[str] = []
    script = None
    defined: set[str] = set()
    pending: list[tuple[int, str, str]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        word, *tail = line.split(None, 1)
        rest = tail[0].strip() if tail else ""
        try:
            if word in _DECLARATIONS:
                if script is not None:
                    raise ParseError(f"'{word}' must precede definitions and commands")
                if word == "dimension":
                    if dimension is not None:
                        raise ParseError("dimension declared twice")
                    if not rest.isdigit() or int(rest) < 1:
                        raise ParseError("dimension must be a positive integer")
                    dimension = int(rest)
                    continue
                if dimension is None:
                    raise MissingDimensionError("'dimension' must come first")
                names = rest.split()
                for name in names:
                    if not _NAME.match(name) or name in RESERVED:
                        raise ParseError(f"invalid identifier {name!r}")
                if word == "coordinates":
                    coords = tuple(names)
                elif word == "momenta":
                    momenta = tuple(names)
                else:
                    if not names:
                        raise ParseError("param needs at least one name")
                    params.extend(names)
                continue
            if dimension is None:
                raise MissingDimensionError("'dimension' must come first")
            if script is None:
                space = PhaseSpace(dimension, coords or (), momenta or (), tuple(params))
                script = SessionScript(space)
            if word == "define":
                name, eq, body = rest.partition("=")
                name = name.strip()
                if not eq or not _NAME.match(name):
                    raise ParseError("expected 'define NAME = EXPR'")
                if name in RESERVED or name in script.space.symbol_names():
                    raise ParseError(f"cannot redefine {name!r}")
                if name in defined:
                    raise DuplicateDefinitionError(f"{name!r} is already defined")
                expr = parse_expression(body, script.space, defined)
                script.definitions.append(Definition(name, expr, lineno, line))
                defined.add(name)
            else:
                script.commands.append(_parse_command(word, rest, script.space, lineno, line))
        except KitError as exc:
            if exc.line is None:
                exc.line = lineno
            raise
    if dimension is None:
        raise MissingDimensionError("script has no 'dimension' declaration", line=1)
    if script is None:
        script = SessionScript(PhaseSpace(dimension, coords or (), momenta or (), tuple(params)))
    return script


def _arg(text: str, space: PhaseSpace) -> Arg:
    return Arg(text, parse_expression(text, space, allow_unresolved=True))


def _options(words: list[str], allowed: dict, line: int) -> dict:
    if len(words) % 2:
        raise ParseError(f"expected key/value pairs, got {' '.join(words)!r}", line=line)
    out = {}
    for key, value in zip(words[::2], words[1::2]):
        if key not in allowed:
            raise ParseError(f"unknown option {key!r}", line=line)
        try:
            out[key] = allowed[key](value)
        except ValueError:
            raise ParseError(f"bad value {value!r} for {key!r}", line=line) from None
    return out


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise ValueError(text)
    return v


def _parse_command(word: str, rest: str, space: PhaseSpace, line: int, source: str):
    if word in ("bracket", "commutator"):
        args = split_args(rest, line)
        if len(args) != 2:
            raise ParseError(f"'{word}' takes two arguments")
        cls = Bracket if word == "bracket" else Commutator
        return cls(_arg(args[0], space), _arg(args[1], space), line, source)
    if word == "diff":
        args = split_args(rest, line)
        if len(args) != 2:
            raise ParseError("'diff' takes an expression and a variable")
        return Diff(_arg(args[0], space), args[1], line, source)
    if word == "simplify":
        if not rest:
            raise ParseError("'simplify' needs an expression")
        return Simplify(_arg(rest, space), line, source)
    if word == "closure":
        sections = rest.split("|")
        if len(sections) not in (2, 3):
            raise ParseError("expected 'closure SCALARS | GENERATORS [| OPTIONS]'")
        scalars = tuple(_arg(a, space) for a in split_args(sections[0], line))
        generators = tuple(_arg(a, space) for a in split_args(sections[1], line))
        if not generators:
            raise ParseError("closure needs at least one generator")
        opts = _options(
            sections[2].split() if len(sections) == 3 else [],
            {"degree": _nonneg_int, "hbar_max": _nonneg_int},
            line,
        )
        degree = opts.get("degree", DEFAULT_DEGREE)
        if degree < 1:
            raise ParseError("degree must be at least 1")
        return Closure(scalars, generators, degree, opts.get("hbar_max", DEFAULT_HBAR_MAX), line, source)
    if word == "check":
        args = split_args(rest, line)
        if len(args) < 2:
            raise ParseError("'check' takes two expressions")
        lhs, rhs, tail = args[0], args[1], args[2:]
        expected = None
        if "expect" in tail:
            k = tail.index("expect")
            if k + 1 >= len(tail):
                raise ParseError("'expect' needs an expression")
            expected = _arg(tail[k + 1], space)
            tail = tail[:k] + tail[k + 2:]
        opts = _options(tail, {"trials": int, "tol": float}, line)
        trials = opts.get("trials", DEFAULT_TRIALS)
        if trials < 1:
            raise ParseError("trials must be at least 1")
        return Check(_arg(lhs, space), _arg(rhs, space), trials, opts.get("tol", DEFAULT_TOLERANCE), expected, line, source)
    raise ParseError(f"unknown command {word!r}")
