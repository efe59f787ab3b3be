"""Closure of generator sets under the Poisson bracket.

Every pairwise bracket is rewritten, when possible, as an exact linear
combination of ``hbar^a * m`` where ``m`` is a monomial in the scalar
invariants and generators of total degree at most ``D``. Candidates and the
target are put over one common denominator, their numerators become sparse
vectors over atom monomials, and the target is solved for by exact
elimination. Candidates are eliminated in the fixed order (hbar power,
degree, names), so dependent candidates get coefficient zero and the answer
is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

from . import brackets
from .core import normal_form as nf
from .core import poly as _poly
from .core.atoms import IMAG_ATOM
from .core.normal_form import NormalForm
from .core.numbers import GaussianRational, Q, format_gaussian
from .core.render import render_human, render_machine
from .core.space import PhaseSpace
from .errors import SpaceMismatchError
from .linsolve import EchelonBasis

_I_MONO = ((IMAG_ATOM, 1),)


@dataclass
class GeneratorSet:
    """Named scalars (invariants such as ``H``) and named generators."""

    space: PhaseSpace
    scalars: dict[str, NormalForm] = field(default_factory=dict)
    generators: dict[str, NormalForm] = field(default_factory=dict)

    def __post_init__(self):
        self.scalars = dict(self.scalars)
        self.generators = dict(self.generators)
        names = list(self.scalars) + list(self.generators)
        if len(set(names)) != len(names):
            raise ValueError("scalar and generator names must be distinct")
        for name in names:
            value = self.value(name)
            if value.space != self.space:
                raise SpaceMismatchError(f"{name!r} belongs to a different phase space")
            if value.is_zero():
                raise ValueError(f"{name!r} is zero")

    def value(self, name: str) -> NormalForm:
        if name in self.generators:
            return self.generators[name]
        return self.scalars[name]

    def names(self) -> list[str]:
        return list(self.scalars) + list(self.generators)


@dataclass(frozen=True)
class Term:
    coefficient: GaussianRational
    hbar_power: int
    monomial: tuple[str, ...]

    def label(self) -> str:
        return candidate_label(self.hbar_power, self.monomial)


@dataclass(frozen=True)
class Combination:
    terms: tuple[Term, ...] = ()

    def expand(self, g: GeneratorSet) -> NormalForm:
        total = NormalForm.zero(g.space)
        for t in self.terms:
            value = nf.scale(_expand_candidate(g, t.hbar_power, t.monomial), t.coefficient)
            total = nf.add(total, value)
        return total

    def as_commutator(self) -> Combination:
        """Same combination multiplied by ``I*hbar``."""
        i = GaussianRational(0, 1)
        return Combination(tuple(Term(t.coefficient * i, t.hbar_power + 1, t.monomial) for t in self.terms))

    def negated(self) -> Combination:
        return Combination(tuple(Term(-t.coefficient, t.hbar_power, t.monomial) for t in self.terms))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for t in self.terms:
            c, label = t.coefficient, t.label()
            if c == 1:
                text = label
            elif c == -1:
                text = "-" + label
            else:
                text = f"{format_gaussian(c)}*{label}"
            parts.append(text)
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def to_record(self) -> list[dict]:
        return [
            {
                "coeff_re": str(t.coefficient.re),
                "coeff_im": str(t.coefficient.im),
                "hbar_power": t.hbar_power,
                "monomial": list(t.monomial),
            }
            for t in self.terms
        ]


@dataclass(frozen=True)
class MatchResult:
    combination: Combination | None
    residual: NormalForm | None = None

    @property
    def matched(self) -> bool:
        return self.combination is not None


def candidate_label(a: int, monomial: tuple[str, ...]) -> str:
    parts = []
    if a == 1:
        parts.append("hbar")
    elif a > 1:
        parts.append(f"hbar^{a}")
    i = 0
    while i < len(monomial):
        j = i
        while j < len(monomial) and monomial[j] == monomial[i]:
            j += 1
        parts.append(monomial[i] if j - i == 1 else f"{monomial[i]}^{j - i}")
        i = j
    return "*".join(parts) or "1"


def candidates(g: GeneratorSet, degree: int, hbar_max: int) -> list[tuple[int, tuple[str, ...]]]:
    """Candidate (hbar power, monomial) pairs in elimination order."""
    names = sorted(g.names())
    out = []
    for a in range(hbar_max + 1):
        for d in range(0 if a else 1, degree + 1):
            out.extend((a, m) for m in combinations_with_replacement(names, d))
    return out


def _expand_candidate(g: GeneratorSet, a: int, monomial) -> NormalForm:
    value = nf.pow(nf.hbar(g.space), a) if a else NormalForm.constant(g.space, 1)
    for name in monomial:
        value = nf.mul(value, g.value(name))
    return value


class _CandidateSystem:
    """Candidate columns over a shared denominator, eliminated once and reused."""

    def __init__(self, g: GeneratorSet, degree: int, hbar_max: int):
        if degree < 1 or hbar_max < 0:
            raise ValueError("need degree >= 1 and hbar_max >= 0")
        self.g = g
        self.candidates = candidates(g, degree, hbar_max)
        forms = []
        cache: dict = {}
        for a, m in self.candidates:
            # reuse the shorter prefix product
            if m and (a, m[:-1]) in cache:
                value = nf.mul(cache[(a, m[:-1])], g.value(m[-1]))
            else:
                value = _expand_candidate(g, a, m)
            cache[(a, m)] = value
            forms.append(value)
        dens: dict = {}
        for f in forms:
            dens.setdefault(frozenset(f.den.items()), f.den)
        common = dict(_poly.ONE)
        for d in dens.values():
            common = _poly.poly_lcm(common, d)
        self.common = common
        self.basis = EchelonBasis()
        for k, f in enumerate(forms):
            vec = self._vector(f)
            self.basis.add_column((k, 0), vec)
            self.basis.add_column((k, 1), _poly.p_mul(vec, {_I_MONO: Q(1)}))

    def _vector(self, f: NormalForm):
        factor = _poly.poly_exquo(self.common, f.den)
        if factor is None:
            return None
        return _poly.p_mul(f.num, factor)

    def match(self, target: NormalForm) -> MatchResult:
        if target.space != self.g.space:
            raise SpaceMismatchError("target belongs to a different phase space")
        if target.is_zero():
            return MatchResult(Combination())
        vec = self._vector(target)
        if vec is None:
            return MatchResult(None, target)
        combo, residual = self.basis.solve(vec)
        if residual:
            return MatchResult(None, target)
        coeffs: dict[int, list] = {}
        for (k, part), c in combo.items():
            coeffs.setdefault(k, [0, 0])[part] = c
        terms = []
        for k in sorted(coeffs):
            re, im = coeffs[k]
            a, m = self.candidates[k]
            terms.append(Term(GaussianRational(re, im), a, m))
        combination = Combination(tuple(terms))
        difference = nf.sub(combination.expand(self.g), target)
        if not difference.is_zero():
            # never emit an unverified combination
            return MatchResult(None, target)
        return MatchResult(combination)

    def basis_labels(self) -> list[str]:
        return [candidate_label(a, m) for a, m in self.candidates]


def match_combination(target: NormalForm, g: GeneratorSet, degree: int = 2, hbar_max: int = 2) -> MatchResult:
    """Express ``target`` through scalars and generators, or return it as residual."""
    return _CandidateSystem(g, degree, hbar_max).match(target)


def bracket_table(g: GeneratorSet) -> list[tuple[tuple[str, str], NormalForm]]:
    """Scalar-generator pairs first, then generator pairs ``i < j``."""
    if not g.generators:
        raise ValueError("a generator set needs at least one generator")
    out = []
    gens = list(g.generators)
    for s in g.scalars:
        for name in gens:
            out.append(((s, name), brackets.poisson_value(g.scalars[s], g.generators[name], g.space)))
    for i, a in enumerate(gens):
        for b in gens[i + 1:]:
            out.append(((a, b), brackets.poisson_value(g.generators[a], g.generators[b], g.space)))
    return out


@dataclass(frozen=True)
class ClosureEntry:
    lhs: str
    rhs: str
    value: NormalForm
    match: MatchResult


@dataclass(frozen=True)
class StructureConstant:
    lhs: str
    rhs: str
    generator: str
    coefficient: GaussianRational
    hbar_power: int


@dataclass(frozen=True)
class ClosureReport:
    generators: GeneratorSet
    degree: int
    hbar_max: int
    entries: tuple[ClosureEntry, ...]
    basis: tuple[str, ...]

    @property
    def closed(self) -> bool:
        return all(e.match.matched for e in self.entries)

    @property
    def verdict(self) -> str:
        return "closed" if self.closed else "not_closed_within_basis"

    def entry(self, lhs: str, rhs: str) -> tuple[NormalForm, MatchResult]:
        """Bracket ``{lhs, rhs}`` and its match, in either argument order."""
        for e in self.entries:
            if (e.lhs, e.rhs) == (lhs, rhs):
                return e.value, e.match
            if (e.lhs, e.rhs) == (rhs, lhs):
                m = e.match
                flipped = MatchResult(m.combination.negated() if m.matched else None,
                                      None if m.residual is None else nf.neg(m.residual))
                return nf.neg(e.value), flipped
        raise KeyError((lhs, rhs))

    @property
    def structure_constants(self) -> list[StructureConstant]:
        """Entries that are linear in the generators, split into c_ijk."""
        gens = self.generators.generators
        out = []
        for e in self.entries:
            if e.lhs not in gens or not e.match.matched:
                continue
            terms = e.match.combination.terms
            if all(len(t.monomial) == 1 and t.monomial[0] in gens for t in terms):
                out.extend(StructureConstant(e.lhs, e.rhs, t.monomial[0], t.coefficient, t.hbar_power) for t in terms)
        return out

    def to_record(self, aliases=None) -> dict:
        entries = []
        for e in self.entries:
            rec = {
                "pair": [e.lhs, e.rhs],
                "bracket": {"human": render_human(e.value, aliases), "machine": render_machine(e.value)},
                "matched": e.match.matched,
            }
            if e.match.matched:
                rec["combination"] = e.match.combination.to_record()
                rec["combination_text"] = str(e.match.combination)
            else:
                rec["residual"] = render_machine(e.match.residual)
            entries.append(rec)
        return {
            "degree": self.degree,
            "hbar_max": self.hbar_max,
            "scalars": list(self.generators.scalars),
            "generators": list(self.generators.generators),
            "basis": list(self.basis),
            "verdict": self.verdict,
            "entries": entries,
            "structure_constants": [
                {
                    "pair": [c.lhs, c.rhs],
                    "generator": c.generator,
                    "coeff_re": str(c.coefficient.re),
                    "coeff_im": str(c.coefficient.im),
                    "hbar_power": c.hbar_power,
                }
                for c in self.structure_constants
            ],
        }


def closure_report(g: GeneratorSet, degree: int = 2, hbar_max: int = 2) -> ClosureReport:
    system = _CandidateSystem(g, degree, hbar_max)
    entries = tuple(
        ClosureEntry(lhs, rhs, value, system.match(value)) for (lhs, rhs), value in bracket_table(g)
    )
    return ClosureReport(g, degree, hbar_max, entries, tuple(system.basis_labels()))
