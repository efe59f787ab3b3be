"""Sparse polynomials in atoms with exact rational coefficients.

A polynomial is a dict ``{monomial: coefficient}`` where a monomial is a tuple
of ``(atom, exponent)`` pairs sorted by ``atom.key`` and coefficients are
nonzero rationals. The empty tuple is the constant monomial and ``{}`` the
zero polynomial.

Multiplication applies the side relations on the fly: an algebraic atom
(radical or the imaginary unit) never survives with exponent >= 2, and two
exponentials in one monomial are merged into one.

Multivariate GCDs are delegated to sympy's sparse polynomial rings.
"""

from __future__ import annotations

from functools import lru_cache

import sympy.core.random as sympy_random
from sympy.polys.domains import QQ
from sympy.polys.rings import ring

from .atoms import EXP, IMAG_ATOM, atom_key
from .numbers import Q

ONE = {(): Q(1)}
IMAG_ATOM.square = {(): Q(-1)}

# set by normal_form: (exp_atom, exp_atom) -> exp_atom | None
exp_merge = None

FACTOR_SEED = 1


def mono_degree(m) -> int:
    return sum(e for _, e in m)


def mono_atoms(m):
    return [a for a, _ in m]


@lru_cache(maxsize=1 << 18)
def mono_mul(a, b):
    """Product of two monomials: a monomial, or a polynomial if a relation fired."""
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for atom, e in b:
        d[atom] = d.get(atom, 0) + e
    exps = None
    reduce = False
    for atom, e in d.items():
        if atom.kind == EXP:
            exps = (exps or []) + [atom] * e
        elif e >= 2 and atom.square is not None:
            reduce = True
    if exps is not None and len(exps) > 1:
        merged = exps[0]
        for other in exps[1:]:
            merged = exp_merge(merged, other) if merged is not None else other
        for atom in exps:
            d.pop(atom, None)
        if merged is not None:
            d[merged] = 1
    if not reduce:
        return tuple(sorted(d.items(), key=_pair_key))
    factors = []
    for atom, e in list(d.items()):
        if e >= 2 and atom.square is not None:
            factors.append(p_pow(atom.square, e // 2))
            if e % 2:
                d[atom] = 1
            else:
                del d[atom]
    out = {tuple(sorted(d.items(), key=_pair_key)): Q(1)}
    for f in factors:
        out = p_mul(out, f)
    return out


def _pair_key(pair):
    return pair[0].key


def p_mul(P, R):
    if not P or not R:
        return {}
    out = {}
    get = out.get
    for m1, c1 in P.items():
        for m2, c2 in R.items():
            m = mono_mul(m1, m2)
            if m.__class__ is tuple:
                out[m] = get(m, 0) + c1 * c2
            else:
                c = c1 * c2
                for mm, cc in m.items():
                    out[mm] = get(mm, 0) + c * cc
    return {m: c for m, c in out.items() if c}


def p_add(P, R):
    if not P:
        return R
    if not R:
        return P
    out = dict(P)
    for m, c in R.items():
        s = out.get(m, 0) + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return out


def p_neg(P):
    return {m: -c for m, c in P.items()}


def p_sub(P, R):
    return p_add(P, p_neg(R))


def p_scale(P, c):
    if not c:
        return {}
    if c == 1:
        return P
    return {m: v * c for m, v in P.items()}


def p_mul_mono(P, m):
    return p_mul(P, {m: Q(1)})


def p_pow(P, k: int):
    if k < 0:
        raise ValueError("negative power of a polynomial")
    result = ONE
    base = P
    while k:
        if k & 1:
            result = p_mul(result, base)
        k >>= 1
        if k:
            base = p_mul(base, base)
    return result


def p_atoms(P):
    """All atoms occurring in P, in canonical order."""
    seen = {}
    for m in P:
        for a, _ in m:
            seen[a] = None
    return sorted(seen, key=atom_key)


def is_constant(P) -> bool:
    return not P or (len(P) == 1 and () in P)


def split_atom(P, atom):
    """Write P = P0 + atom*P1 (atom has exponent <= 1 everywhere)."""
    p0, p1 = {}, {}
    for m, c in P.items():
        for i, (a, e) in enumerate(m):
            if a is atom:
                p1[m[:i] + m[i + 1:]] = c
                break
        else:
            p0[m] = c
    return p0, p1


def dense_vectors(P, atoms):
    index = {a: i for i, a in enumerate(atoms)}
    out = {}
    for m in P:
        v = [0] * len(atoms)
        for a, e in m:
            v[index[a]] = e
        out[m] = tuple(v)
    return out


def mono_sort_key_factory(atoms):
    """Key for graded-lex order; larger key = higher monomial."""
    index = {a: i for i, a in enumerate(atoms)}
    n = len(atoms)

    def key(m):
        v = [0] * n
        for a, e in m:
            v[index[a]] = e
        return (sum(v), v)

    return key


def leading_monomial(P):
    key = mono_sort_key_factory(p_atoms(P))
    return max(P, key=key)


def sorted_terms(P, atoms=None):
    """Terms of P from the highest monomial down."""
    key = mono_sort_key_factory(atoms if atoms is not None else p_atoms(P))
    return sorted(P.items(), key=lambda t: key(t[0]), reverse=True)


# --- sympy bridge ------------------------------------------------------------

@lru_cache(maxsize=None)
def _ring(k: int):
    return ring(",".join(f"x{i}" for i in range(k)), QQ, "grlex")[0]


def _to_sympy(R, P, index):
    n = len(index)
    terms = {}
    for m, c in P.items():
        v = [0] * n
        for a, e in m:
            v[index[a]] = e
        terms[tuple(v)] = c
    return R.from_dict(terms)


def _from_sympy(F, atoms):
    out = {}
    for v, c in F.terms():
        m = tuple((atoms[i], e) for i, e in enumerate(v) if e)
        out[m] = Q(c)
    return out


def _bridge(*polys):
    atoms = p_atoms({m: 1 for P in polys for m in P})
    R = _ring(max(len(atoms), 1))
    index = {a: i for i, a in enumerate(atoms)}
    return R, atoms, [_to_sympy(R, P, index) for P in polys]


def cancel_gcd(N, D):
    """Divide N and D by their polynomial GCD (atoms treated as indeterminates)."""
    if is_constant(D):
        return N, D
    if len(D) == 1:
        return _cancel_monomial(N, D)
    R, atoms, (n, d) = _bridge(N, D)
    g, nq, dq = n.cofactors(d)
    if g.is_ground:
        return N, D
    return _from_sympy(nq, atoms), _from_sympy(dq, atoms)


def _cancel_monomial(N, D):
    (dm,) = D
    common = dict(dm)
    for m in N:
        if not common:
            break
        have = dict(m)
        for a in list(common):
            e = min(common[a], have.get(a, 0))
            if e:
                common[a] = e
            else:
                del common[a]
    if not common:
        return N, D

    def divide(m):
        out = []
        for a, e in m:
            e -= common.get(a, 0)
            if e:
                out.append((a, e))
        return tuple(out)

    return {divide(m): c for m, c in N.items()}, {divide(m): c for m, c in D.items()}


def poly_gcd(A, B):
    if is_constant(A) or is_constant(B):
        return dict(ONE)
    R, atoms, (a, b) = _bridge(A, B)
    return _from_sympy(a.gcd(b), atoms)


def poly_exquo(A, B):
    """A / B if B divides A exactly, else None."""
    if is_constant(B):
        return p_scale(A, 1 / B[()])
    R, atoms, (a, b) = _bridge(A, B)
    q, r = a.div(b)
    if r:
        return None
    return _from_sympy(q, atoms)


def poly_lcm(A, B):
    if is_constant(A):
        return B
    if is_constant(B):
        return A
    R, atoms, (a, b) = _bridge(A, B)
    return _from_sympy(a.lcm(b), atoms)


def poly_factor_list(P):
    """(content, [(factor, multiplicity), ...]) over the rationals."""
    R, atoms, (p,) = _bridge(P)
    # sympy's factoriser draws random evaluation points; pin them so the
    # running time (not just the result) is the same on every run
    state = sympy_random.rng.getstate()
    sympy_random.seed(FACTOR_SEED)
    try:
        content, factors = p.factor_list()
    finally:
        sympy_random.rng.setstate(state)
    return Q(content), [(_from_sympy(f, atoms), k) for f, k in factors]
