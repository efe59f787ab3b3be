"""Text renderings of normal forms.

``human`` output is valid input for the expression parser, so rendering and
re-parsing reproduces the same normal form. ``machine`` output is a JSON-ready
record of exact monomial maps plus a side table for radicals/exponentials.
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import KitError
from . import normal_form as nf
from .atoms import COORD, EXP, HBAR, MOM, PARAM, RADICAL
from .normal_form import NormalForm
from .numbers import GaussianRational, Q, format_rational, parse_rational
from .poly import is_constant, p_atoms, poly_exquo, poly_factor_list, poly_gcd, sorted_terms

FACTOR_TERM_LIMIT = 80


def atom_text(atom, space, aliases=None) -> str:
    if aliases and atom in aliases:
        return aliases[atom]
    if atom.kind == COORD:
        return space.coord_names[atom.index]
    if atom.kind == MOM:
        return space.momentum_names[atom.index]
    if atom.kind == HBAR:
        return "hbar"
    if atom.kind == PARAM:
        return atom.name
    if atom.kind == RADICAL:
        return f"sqrt({render_human(atom.arg, aliases=aliases, factor=False)})"
    if atom.kind == EXP:
        return f"exp({render_human(atom.arg, aliases=aliases, factor=False)})"
    return "I"


def _mono_text(m, space, aliases) -> str:
    parts = []
    for a, e in m:
        t = atom_text(a, space, aliases)
        parts.append(t if e == 1 else f"{t}^{e}")
    return "*".join(parts)


def _term_text(coeff: GaussianRational, mono_text: str) -> str:
    if not mono_text:
        return str(coeff)
    if coeff == 1:
        return mono_text
    if coeff == -1:
        return "-" + mono_text
    return f"{coeff}*{mono_text}"


def _join_terms(texts) -> str:
    out = texts[0]
    for t in texts[1:]:
        out += " - " + t[1:] if t.startswith("-") else " + " + t
    return out


def _gaussian_terms(P):
    """Fold the internal imaginary atom of P into Gaussian coefficients."""
    return NormalForm(None, P).terms()


def _poly_text(P, space, aliases) -> str:
    terms = _gaussian_terms(P)
    atoms = p_atoms(terms) if terms else []
    ordered = sorted_terms(terms, atoms)
    return _join_terms([_term_text(c, _mono_text(m, space, aliases)) for m, c in ordered])


def _factored(P, space, aliases):
    """(coefficient, [factor text]) for P, or None when it cannot be factored cleanly."""
    terms = _gaussian_terms(P)
    if len(terms) > FACTOR_TERM_LIMIT:
        return None
    if all(c.im == 0 for c in terms.values()):
        unit = GaussianRational(1)
        real = {m: Q(c.re.numerator, c.re.denominator) for m, c in terms.items()}
    elif all(c.re == 0 for c in terms.values()):
        unit = GaussianRational(0, 1)
        real = {m: Q(c.im.numerator, c.im.denominator) for m, c in terms.items()}
    else:
        return _factored_mixed(terms, P, space, aliases)
    if is_constant(real):
        return unit * GaussianRational(real[()]), []
    content, factors = poly_factor_list(real)
    return unit * GaussianRational(Fraction(int(content.numerator), int(content.denominator))), \
        _factor_texts(factors, space, aliases)


def _factored_mixed(terms, P, space, aliases):
    # only the common factor of the real and imaginary parts is factored;
    # the Gaussian cofactor is printed as one expanded factor
    re = {m: Q(c.re.numerator, c.re.denominator) for m, c in terms.items() if c.re}
    im = {m: Q(c.im.numerator, c.im.denominator) for m, c in terms.items() if c.im}
    common = poly_gcd(re, im)
    if is_constant(common):
        return None
    content, factors = poly_factor_list(common)
    cofactor = poly_exquo(P, common)
    texts = _factor_texts(factors, space, aliases)
    if is_constant(cofactor):
        coeff = NormalForm(None, cofactor).terms()[()]
    else:
        coeff = GaussianRational(1)
        texts.append(f"({_poly_text(cofactor, space, aliases)})")
    return coeff * GaussianRational(Fraction(int(content.numerator), int(content.denominator))), texts


def _factor_texts(factors, space, aliases):
    texts = []
    for f, k in factors:
        t = _poly_text(f, space, aliases)
        if len(f) > 1:
            t = f"({t})"
        texts.append((len(f) > 1, t if k == 1 else f"{t}^{k}"))
    # single-term factors first, then the longer ones, each group ordered by text
    texts.sort(key=lambda x: (x[0], x[1]))
    return [t for _, t in texts]


def render_human(a: NormalForm, aliases=None, factor: bool = True) -> str:
    if a.is_zero():
        return "0"
    space = a.space
    den_text = ""
    num = fac = None
    if factor:
        fac = _factored(a.num, space, aliases)
    if fac is not None:
        coeff, factors = fac
        if not is_constant(a.den):
            dfac = _factored(a.den, space, aliases)
            if dfac is None or not dfac[1]:
                fac = None
            else:
                dcoeff, dfactors = dfac
                coeff = coeff / dcoeff
                inner = "*".join(dfactors)
                den_text = f"/{inner}" if len(dfactors) == 1 and inner.startswith("(") else f"/({inner})"
        if fac is not None:
            if len(factors) == 1 and not den_text and coeff == 1 and factors[0].startswith("(") and factors[0].endswith(")"):
                factors = [factors[0][1:-1]]
            num = _term_text(coeff, "*".join(factors))
    if num is None:
        num = _poly_text(a.num, space, aliases)
        den_text = ""
        if not is_constant(a.den):
            if len(a.num) > 1 and len(_gaussian_terms(a.num)) > 1:
                num = f"({num})"
            den_text = f"/({_poly_text(a.den, space, aliases)})"
    return num + den_text


def render(a: NormalForm, style: str = "human", **kwargs):
    if style == "human":
        return render_human(a, **kwargs)
    if style == "machine":
        return render_machine(a)
    raise ValueError(f"unknown style {style!r}")


# --- machine format -----------------------------------------------------------

def _collect_special(a: NormalForm, found: dict):
    for atom in a.atoms():
        if atom.kind in (RADICAL, EXP) and atom not in found:
            _collect_special(atom.arg, found)
            found[atom] = None


def _machine_name(atom, names) -> str:
    if atom.kind == COORD:
        return f"q{atom.index + 1}"
    if atom.kind == MOM:
        return f"p{atom.index + 1}"
    if atom.kind == HBAR:
        return "hbar"
    if atom.kind == PARAM:
        return atom.name
    return names[atom]


def _machine_poly(terms, names):
    atoms = p_atoms(terms) if terms else []
    out = []
    for m, c in sorted_terms(terms, atoms):
        out.append({
            "coeff_re": format_rational(c.re),
            "coeff_im": format_rational(c.im),
            "powers": {_machine_name(x, names): e for x, e in m},
        })
    return out


def render_machine(a: NormalForm) -> dict:
    found: dict = {}
    _collect_special(a, found)
    names = {}
    table = {}
    counts = {RADICAL: 0, EXP: 0}
    for atom in sorted(found, key=lambda x: x.serial):
        counts[atom.kind] += 1
        names[atom] = f"{'sqrt' if atom.kind == RADICAL else 'exp'}#{counts[atom.kind]}"
    for atom in sorted(found, key=lambda x: x.serial):
        body = {
            "numerator": _machine_poly(atom.arg.terms("num"), names),
            "denominator": _machine_poly(atom.arg.terms("den"), names),
        }
        table[names[atom]] = {"radicand" if atom.kind == RADICAL else "argument": body}
    return {
        "numerator": _machine_poly(a.terms("num"), names),
        "denominator": _machine_poly(a.terms("den"), names),
        "atoms": table,
    }


def from_machine(record: dict, space) -> NormalForm:
    """Inverse of :func:`render_machine`."""
    env: dict = {}
    for name, body in record.get("atoms", {}).items():
        if "radicand" in body:
            env[name] = nf.radical_atom(_machine_fraction(body["radicand"], space, env))
        elif "argument" in body:
            env[name] = nf.exp_atom(_machine_fraction(body["argument"], space, env))
        else:
            raise KitError(f"malformed atom entry {name!r}")
    return _machine_fraction(record, space, env)


def _machine_atom(name, space, env):
    from .expr import atom_for_name

    if name in env:
        return env[name]
    atom = None
    if name[:1] in ("q", "p") and name[1:].isdigit():
        i = int(name[1:]) - 1
        names = space.coord_names if name[0] == "q" else space.momentum_names
        if 0 <= i < space.dimension:
            atom = atom_for_name(space, names[i])
    else:
        atom = atom_for_name(space, name)
    if atom is None:
        raise KitError(f"unknown atom {name!r} in machine record")
    return atom


def _machine_fraction(record, space, env) -> NormalForm:
    def poly(terms):
        acc = NormalForm.zero(space)
        for t in terms:
            c = GaussianRational(parse_rational(t["coeff_re"]), parse_rational(t["coeff_im"]))
            value = NormalForm.constant(space, c)
            for name, e in t["powers"].items():
                atom = NormalForm.from_atom(space, _machine_atom(name, space, env))
                value = nf.mul(value, nf.pow(atom, int(e)))
            acc = nf.add(acc, value)
        return acc

    return nf.mul(poly(record["numerator"]), nf.inverse(poly(record["denominator"])))


def aliases_for(definitions: dict) -> dict:
    """Map radical/exponential atoms to definition names that are exactly that atom."""
    out = {}
    for name, value in definitions.items():
        if is_constant(value.den) and len(value.num) == 1:
            ((m, c),) = value.num.items()
            if c == 1 and len(m) == 1 and m[0][1] == 1 and m[0][0].kind in (RADICAL, EXP):
                out.setdefault(m[0][0], name)
    return out

