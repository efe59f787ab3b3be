import random
import threading
from fractions import Fraction

import pytest
from hypothesis import given, settings

from poissonkit.core import normal_form as nf
from poissonkit.core.atoms import EXP, RADICAL
from poissonkit.core.expr import NameRef, Resolver, normalize
from poissonkit.core.normal_form import NormalForm
from poissonkit.core.numbers import GaussianRational
from poissonkit.core.poly import leading_monomial
from poissonkit.core.render import from_machine, render, render_human, render_machine
from poissonkit.core.space import PhaseSpace
from poissonkit.errors import (
    CyclicDefinitionError,
    DivisionByZeroError,
    KitError,
    NonPolynomialRadicandError,
    UnknownNameError,
)
from poissonkit.parser import parse_expression

from support import coulomb, random_phase_function, random_poly, seeds

S3 = PhaseSpace(3)


def P(text, space=S3, defs=None):
    defs = defs or {}
    return normalize(parse_expression(text, space, defs), space, defs)


def radius(space=S3):
    return P("sqrt(q1^2+q2^2+q3^2)", space)


# --- worked examples ---------------------------------------------------------

def test_radical_defining_relation():
    r = radius()
    assert nf.is_zero(r * r - P("q1^2+q2^2+q3^2"))


def test_binomial_identity():
    assert P("(q1+p1)^2 - q1^2 - 2*q1*p1 - p1^2").is_zero()


def test_exponentials_merge_and_cancel():
    assert P("exp(q1)*exp(-q1)") == NormalForm.constant(S3, 1)
    assert P("exp(q1)*exp(p2)") == P("exp(q1+p2)")
    assert P("exp(0)") == NormalForm.constant(S3, 1)


def test_coulomb_bracket_target_expanded_and_factored_agree():
    r = radius()
    factored = P("hbar*(p2*q1 - p1*q2)") * (P("p1^2+p2^2+p3^2") - nf.scale(nf.inverse(r), 2))
    expanded = P("hbar*p2*q1*p1^2 + hbar*p2*q1*p2^2 + hbar*p2*q1*p3^2 - hbar*p1*q2*p1^2"
                 " - hbar*p1*q2*p2^2 - hbar*p1*q2*p3^2") \
        - nf.scale(P("hbar*(p2*q1 - p1*q2)") * nf.inverse(r), 2)
    assert factored == expanded
    assert factored.key() == expanded.key()


def test_additive_inverse_and_radical_products():
    x = P("q1*p2 - 3*hbar + 1/(q3+p1)")
    assert nf.add(x, nf.neg(x)).is_zero()
    r = radius()
    rr = nf.mul(r, r)
    assert rr.is_polynomial() and rr == P("q1^2+q2^2+q3^2")
    inv2 = nf.pow(r, -2)
    assert not any(a.kind == RADICAL for a in inv2.atoms())
    assert inv2 == P("1/(q1^2+q2^2+q3^2)")


def test_zero_tests():
    assert nf.is_zero(P("0"))
    assert nf.equivalent(nf.inverse(radius()) * radius(), NormalForm.constant(S3, 1))
    space, g = coulomb(hbar_terms=False)
    from poissonkit.brackets import poisson_bracket

    assert nf.is_zero(poisson_bracket(g["ham"], g["r1"]).value)


def test_zero_is_unique():
    z = P("q1 - q1")
    assert z.num == {} and z.den == {(): 1}
    assert z == NormalForm.zero(S3)


def test_denominator_is_monic():
    f = P("3/(6*q1 + 4*p2)")
    assert f.den[leading_monomial(f.den)] == 1
    # 3/(6 q1 + 4 p2) = (3/6)/(q1 + (2/3) p2)
    assert nf.equivalent(f, P("1/2") * nf.inverse(P("q1 + 2/3*p2")))


def test_division_by_zero():
    with pytest.raises(DivisionByZeroError):
        P("1/(sqrt(q1^2+q2^2+q3^2)^2 - q1^2 - q2^2 - q3^2)")
    with pytest.raises(DivisionByZeroError):
        nf.pow(NormalForm.zero(S3), -1)
    with pytest.raises(ZeroDivisionError):
        nf.inverse(NormalForm.zero(S3))


def test_unknown_and_cyclic_names():
    with pytest.raises(UnknownNameError):
        normalize(NameRef("nothing"), S3, {})
    defs = {"a": NameRef("b"), "b": NameRef("a")}
    with pytest.raises(CyclicDefinitionError):
        Resolver(S3, defs).lookup("a")


def test_sqrt_pulls_out_square_content():
    assert P("sqrt(4*q1^2 + 4*q2^2)") == nf.scale(P("sqrt(q1^2+q2^2)"), 2)
    assert P("sqrt(9/4)") == NormalForm.constant(S3, Fraction(3, 2))
    assert P("sqrt(-4)") == NormalForm.constant(S3, GaussianRational(0, 2))


def test_radicand_restrictions():
    with pytest.raises(NonPolynomialRadicandError):
        P("sqrt(sqrt(q1))")
    with pytest.raises(NonPolynomialRadicandError):
        P("sqrt(exp(q1))")
    with pytest.raises(NonPolynomialRadicandError):
        nf.sqrt(P("1/q1"))


def test_radicals_are_interned():
    a, b = P("sqrt(q1^2+q2^2)"), P("sqrt(q2^2+q1^2)")
    atom_a = [x for x in a.atoms() if x.kind == RADICAL][0]
    atom_b = [x for x in b.atoms() if x.kind == RADICAL][0]
    assert atom_a is atom_b


def test_interning_is_thread_safe():
    u = P("q1^4 + 7*p3^2 + 11")
    found = []

    def work():
        found.append(nf.radical_atom(u))

    threads = [threading.Thread(target=work) for _ in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(a is found[0] for a in found)


def test_phase_space_validation():
    assert PhaseSpace(2).coord_names == ("q1", "q2")
    for bad in (dict(dimension=0), dict(dimension=1, coord_names=("hbar",)),
                dict(dimension=1, coord_names=("x",), momentum_names=("x",))):
        with pytest.raises(KitError):
            PhaseSpace(**bad)


# --- rendering ---------------------------------------------------------------

def test_render_zero():
    assert render(NormalForm.zero(S3)) == "0"


def test_render_shows_angular_factor():
    space, g = coulomb()
    from poissonkit.brackets import commutator

    text = render_human(commutator(g["r1"], g["r2"]).value)
    assert "(q1*p2 - q2*p1)" in text
    assert text.startswith("-I*hbar*")


def test_mixed_coefficients_factor_out_common_part():
    import sympy.core.random as sympy_random

    space, g = coulomb(hbar_terms=True)
    from poissonkit.brackets import commutator

    value = commutator(g["l1"], g["r2"]).value
    state = sympy_random.rng.getstate()
    texts = {render_human(value) for _ in range(3)}
    assert sympy_random.rng.getstate() == state
    assert len(texts) == 1
    text = texts.pop()
    assert text.startswith("hbar*(") and "I*" in text
    assert normalize(parse_expression(text, space), space) == value
    mixed = P("(q1 + p1)^2*(q2 + I*p2)")
    assert render_human(mixed) == "(q1 + p1)^2*(q2 + I*p2)"


def test_machine_record_layout():
    f = P("I/2*q1*sqrt(q1^2+q2^2) + exp(p1)")
    rec = render_machine(f)
    assert set(rec) == {"numerator", "denominator", "atoms"}
    names = set(rec["atoms"])
    assert any(n.startswith("sqrt#") for n in names) and any(n.startswith("exp#") for n in names)
    term = next(t for t in rec["numerator"] if "q1" in t["powers"])
    assert term["coeff_re"] == "0" and term["coeff_im"] == "1/2"
    assert render(f, "machine") == rec
    assert from_machine(rec, S3) == f


@settings(max_examples=60, deadline=None)
@given(seeds())
def test_human_round_trip(seed):
    rng = random.Random(seed)
    f = random_phase_function(rng, S3, gaussian=True)
    if rng.random() < 0.3:
        f = f + nf.exp(random_poly(rng, S3, 1, 2))
    assert P(render_human(f)) == f
    assert P(render_human(f, factor=False)) == f


@settings(max_examples=60, deadline=None)
@given(seeds())
def test_machine_round_trip(seed):
    rng = random.Random(seed)
    f = random_phase_function(rng, S3, gaussian=True)
    assert from_machine(render_machine(f), S3) == f


# --- algebraic laws ------------------------------------------------------------

def _triple(seed):
    rng = random.Random(seed)
    return [random_phase_function(rng, S3, degree=2, gaussian=True) for _ in range(3)]


@settings(max_examples=40, deadline=None)
@given(seeds())
def test_ring_laws(seed):
    a, b, c = _triple(seed)
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c


@settings(max_examples=40, deadline=None)
@given(seeds())
def test_radical_exponent_bound(seed):
    a, b, c = _triple(seed)
    for f in (a * b, a * b * c, nf.pow(a + c, 3), b - c):
        for poly in (f.num, f.den):
            for m in poly:
                assert all(e == 1 for atom, e in m if atom.kind == RADICAL)
        assert not any(atom.kind == RADICAL for m in f.den for atom, _ in m)


def test_exponential_exponents_merge():
    f = P("exp(q1)^3 * exp(p1)^-2 * q2")
    exps = [a for a in f.atoms() if a.kind == EXP]
    assert len(exps) == 1
    assert f == P("q2*exp(3*q1 - 2*p1)")


def test_canonical_uniqueness_1000_pairs():
    """Two different construction orders for the same value give identical forms."""
    rng = random.Random(1234)
    inv_r = nf.inverse(radius())
    for _ in range(1000):
        f, g, h = (random_poly(rng, S3, 2, 2, gaussian=True) for _ in range(3))
        if rng.random() < 0.5:
            g = g * inv_r
        factored = (f + g) * h
        parts = [f * h, g * h]
        rng.shuffle(parts)
        expanded = parts[0] + parts[1]
        assert factored.key() == expanded.key()
