import json
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from poissonkit.closure import (
    Combination,
    GeneratorSet,
    Term,
    bracket_table,
    candidates,
    closure_report,
    match_combination,
)
from poissonkit.core import normal_form as nf
from poissonkit.core.expr import normalize
from poissonkit.core.normal_form import NormalForm
from poissonkit.core.numbers import GaussianRational
from poissonkit.core.space import PhaseSpace
from poissonkit.linsolve import EchelonBasis
from poissonkit.parser import parse_expression

from support import coulomb, seeds

S3 = PhaseSpace(3)
GENS = ("l1", "l2", "l3", "r1", "r2", "r3")


def N(text, space=S3):
    return normalize(parse_expression(text, space), space)


def coulomb_set(hbar_terms=False, scalars=("ham",), gens=GENS):
    space, g = coulomb(hbar_terms)
    return GeneratorSet(space, {s: g[s] for s in scalars}, {k: g[k] for k in gens})


def oscillator_set(n=3):
    space = PhaseSpace(n)
    ham = nf.scale(sum((N(f"p{i}^2 + q{i}^2", space) for i in range(1, n + 1)), NormalForm.zero(space)), Fraction(1, 2))
    gens = {}
    for j in range(1, n + 1):
        for k in range(j, n + 1):
            gens[f"a{j}{k}"] = N(f"p{j}*p{k} + q{j}*q{k}", space)
    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            gens[f"l{j}{k}"] = N(f"q{j}*p{k} - q{k}*p{j}", space)
    return GeneratorSet(space, {"ham": ham}, gens)


# --- bracket table -------------------------------------------------------------

def test_table_layout():
    g = coulomb_set()
    table = bracket_table(g)
    assert len(table) == 6 + 15
    assert [pair for pair, _ in table[:6]] == [("ham", k) for k in GENS]
    assert all(v.is_zero() for _, v in table[:6])


def test_single_generator_has_no_pairs():
    assert bracket_table(GeneratorSet(S3, {}, {"l3": N("q1*p2 - q2*p1")})) == []


def test_canonical_pair_table():
    table = bracket_table(GeneratorSet(S3, {}, {"x": N("q1"), "k": N("p1")}))
    assert table == [(("x", "k"), NormalForm.constant(S3, 1))]


def test_generator_set_validation():
    with pytest.raises(ValueError):
        GeneratorSet(S3, {"a": N("q1")}, {"a": N("p1")})
    with pytest.raises(ValueError):
        GeneratorSet(S3, {}, {"z": NormalForm.zero(S3)})
    with pytest.raises(ValueError):
        bracket_table(GeneratorSet(S3, {"h": N("q1")}, {}))


# --- matching ----------------------------------------------------------------------

def test_runge_lenz_pair_matches_hamiltonian_times_angular_momentum():
    g = coulomb_set()
    target = nf.sub(N("0"), nf.scale(g.value("ham") * g.value("l3"), 2))
    res = match_combination(target, g, 2, 0)
    assert res.matched
    assert res.combination.terms == (Term(GaussianRational(-2), 0, ("ham", "l3")),)


def test_zero_target():
    res = match_combination(NormalForm.zero(S3), coulomb_set(), 2, 2)
    assert res.matched and res.combination.terms == ()


def test_independent_target_is_residual():
    g = GeneratorSet(S3, {}, {"l1": N("q2*p3 - q3*p2"), "l2": N("q3*p1 - q1*p3")})
    target = N("q1*p2 - q2*p1")
    res = match_combination(target, g, 1, 0)
    assert not res.matched and res.residual == target


def test_angular_runge_lenz_pair_with_hbar_terms():
    space, defs = coulomb(hbar_terms=True)
    g = coulomb_set(hbar_terms=True)
    from poissonkit.brackets import poisson_value

    res = match_combination(poisson_value(defs["l1"], defs["r2"]), g, 1, 1)
    assert res.combination.terms == (Term(GaussianRational(1), 0, ("r3",)),)


def test_gaussian_coefficients():
    g = GeneratorSet(S3, {}, {"x": N("q1"), "y": N("p1")})
    res = match_combination(N("(2 + 3*I)*q1 - I/2*hbar*p1 + 5*hbar^2"), g, 1, 2)
    assert res.matched
    assert {t.label(): t.coefficient for t in res.combination.terms} == {
        "x": GaussianRational(2, 3),
        "hbar*y": GaussianRational(0, Fraction(-1, 2)),
        "hbar^2": GaussianRational(5),
    }


def test_target_with_foreign_denominator_is_residual():
    g = GeneratorSet(S3, {}, {"x": N("q1"), "y": N("p1")})
    assert not match_combination(N("1/(q1 + p1)"), g, 2, 0).matched


def test_dependent_candidates_get_zero():
    # "h" sorts before "x" and "y", so it is eliminated first and owns the pivot
    g = GeneratorSet(S3, {}, {"x": N("q1"), "y": N("p1"), "h": N("q1 + p1")})
    res = match_combination(N("q1 + p1"), g, 1, 0)
    assert [t.monomial for t in res.combination.terms] == [("h",)]
    res = match_combination(N("q1"), g, 1, 0)
    assert [(t.monomial, t.coefficient) for t in res.combination.terms] == [(("x",), GaussianRational(1))]


def test_candidate_order():
    g = GeneratorSet(S3, {"h": N("q1")}, {"b": N("p1"), "a": N("q2")})
    labels = [c for c in candidates(g, 2, 1)]
    assert labels[:3] == [(0, ("a",)), (0, ("b",)), (0, ("h",))]
    assert labels[3] == (0, ("a", "a"))
    assert (1, ()) in labels and labels.index((1, ())) == 9
    assert len(labels) == 9 + 1 + 9


def test_combination_text_and_commutator_form():
    c = Combination((Term(GaussianRational(-2), 0, ("ham", "l3")), Term(GaussianRational(0, 1), 2, ("r1", "r1"))))
    assert str(c) == "-2*ham*l3 + I*hbar^2*r1^2"
    assert str(c.as_commutator()) == "-2*I*hbar*ham*l3 - hbar^3*r1^2"


# --- closure reports -------------------------------------------------------------------

def test_coulomb_closure_classical():
    report = closure_report(coulomb_set(), 2, 0)
    assert report.verdict == "closed"
    consts = {(c.lhs, c.rhs, c.generator): c.coefficient for c in report.structure_constants}
    assert consts[("l1", "l2", "l3")] == 1
    _, m = report.entry("r2", "r1")
    assert m.combination.terms == (Term(GaussianRational(2), 0, ("ham", "l3")),)


def test_entry_antisymmetry():
    report = closure_report(coulomb_set(), 2, 0)
    for e in report.entries:
        value, match = report.entry(e.rhs, e.lhs)
        assert nf.add(value, e.value).is_zero()
        assert nf.add(match.combination.expand(report.generators), e.match.combination.expand(report.generators)).is_zero()


def test_every_match_re_expands():
    report = closure_report(coulomb_set(hbar_terms=True), 2, 2)
    for e in report.entries:
        if e.match.matched:
            assert nf.sub(e.match.combination.expand(report.generators), e.value).is_zero()
        else:
            assert not e.match.residual.is_zero()


def test_oscillator_closure():
    report = closure_report(oscillator_set(), 1, 0)
    assert report.verdict == "closed"
    gens = report.generators
    for e in report.entries:
        assert all(len(t.monomial) == 1 for t in e.match.combination.terms)
        assert nf.sub(e.match.combination.expand(gens), e.value).is_zero()


def test_runge_lenz_alone_is_not_closed():
    g = coulomb_set(scalars=(), gens=("r1", "r2", "r3"))
    report = closure_report(g, 2, 0)
    assert report.verdict == "not_closed_within_basis"
    assert all(not e.match.matched and not e.match.residual.is_zero() for e in report.entries)


@pytest.mark.parametrize("setup, steps", [
    ("oscillator", [(1, 0), (1, 1), (2, 0)]),
    ("coulomb", [(2, 0), (2, 1), (3, 0)]),
])
def test_verdict_is_monotone(setup, steps):
    g = oscillator_set(2) if setup == "oscillator" else coulomb_set(gens=("l1", "l2", "l3"))
    verdicts = [closure_report(g, d, a).verdict for d, a in steps]
    assert verdicts == ["closed"] * len(steps)


def test_monotone_from_not_closed():
    g = GeneratorSet(S3, {}, {"x": N("q1^2"), "y": N("p1^2")})
    assert closure_report(g, 1, 0).verdict == "not_closed_within_basis"  # {x, y} = 4 q1 p1
    assert closure_report(g, 2, 0).verdict == "not_closed_within_basis"
    g = GeneratorSet(S3, {}, {"x": N("q1^2"), "y": N("p1^2"), "z": N("q1*p1")})
    for d, a in [(1, 0), (1, 1), (2, 0), (2, 2)]:
        assert closure_report(g, d, a).verdict == "closed"


def test_report_is_deterministic():
    a = json.dumps(closure_report(coulomb_set(True), 2, 1).to_record(), sort_keys=True)
    b = json.dumps(closure_report(coulomb_set(True), 2, 1).to_record(), sort_keys=True)
    assert a == b
    rec = json.loads(a)
    assert rec["verdict"] == "not_closed_within_basis" and len(rec["basis"]) == 71


@settings(max_examples=30, deadline=None)
@given(seeds())
def test_solver_recovers_planted_combinations(seed):
    rng = random.Random(seed)
    g = coulomb_set(gens=("l1", "l2", "l3", "r1", "r2", "r3"))
    pool = candidates(g, 2, 1)
    terms = tuple(
        Term(GaussianRational(rng.randint(-4, 4), rng.randint(-4, 4)) or GaussianRational(1), a, m)
        for a, m in rng.sample(pool, rng.randint(1, 4))
    )
    target = Combination(terms).expand(g)
    res = match_combination(target, g, 2, 1)
    assert res.matched
    assert nf.sub(res.combination.expand(g), target).is_zero()


# --- exact elimination -----------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), seeds())
def test_echelon_basis_against_sympy(rows, cols, seed):
    rng = random.Random(seed)
    mat = [[Fraction(rng.randint(-3, 3), rng.randint(1, 3)) if rng.random() < 0.6 else Fraction(0)
            for _ in range(cols)] for _ in range(rows)]
    if rng.random() < 0.5 and cols > 1:
        for r in range(rows):
            mat[r][-1] = mat[r][0] * 2 - mat[r][1 % cols]
    basis = EchelonBasis()
    for c in range(cols):
        basis.add_column(c, {r: mat[r][c] for r in range(rows) if mat[r][c]})
    M = sympy.Matrix(mat)
    assert basis.rank == M.rank()
    _, pivots = M.rref()
    assert basis.pivot_columns == list(pivots)
    target = [Fraction(rng.randint(-5, 5)) for _ in range(rows)]
    combo, residual = basis.solve({r: v for r, v in enumerate(target) if v})
    solvable = M.rank() == M.row_join(sympy.Matrix(target)).rank()
    assert (not residual) == solvable
    if solvable:
        rebuilt = [sum(combo.get(c, 0) * mat[r][c] for c in range(cols)) for r in range(rows)]
        assert rebuilt == target
        assert set(combo) <= set(pivots)
