"""Sparse Laurent polynomials over a registry of atoms.

A monomial is a tuple of ``(atom_key, exponent)`` pairs sorted by key.  A
polynomial is a plain dict ``{monomial: coefficient}`` with exact rational
coefficients and no zero entries.  Polynomial dicts are never mutated after
they leave the function that built them.

Atom kinds:

``sym``     a coordinate or parameter, integer exponents
``root``    ``sqrtN``, integer exponents reduced by ``sqrtN^2 -> N``
``exp``     ``exp(M)`` for a monomial ``M``; rational exponents, so that
            ``exp(c*M)`` is the atom raised to ``c``
``opaque``  ``exp(A)`` for an argument that is not a Laurent polynomial
"""

from __future__ import annotations

import math
import re
from functools import lru_cache

try:
    from gmpy2 import is_square, isqrt
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    from fractions import Fraction as Q

    def is_square(n):
        return n >= 0 and math.isqrt(n) ** 2 == n

    isqrt = math.isqrt

_ROOT_NAME = re.compile(r"sqrt(\d+)$")

# key -> (kind, payload)
_ATOMS: dict[str, tuple] = {}
_ROOTS: dict[str, int] = {}

ONE_MONO: tuple = ()
P_ONE = {(): Q(1)}


def q(value) -> Q:
    return value if isinstance(value, type(Q(1))) else Q(value)


def norm_exp(e):
    """Integers stay ints; rationals with unit denominator become ints."""
    if isinstance(e, int):
        return e
    if e.denominator == 1:
        return int(e.numerator)
    return e


# -- atoms -------------------------------------------------------------------


def sym_atom(name: str) -> str:
    if name not in _ATOMS:
        m = _ROOT_NAME.match(name)
        if m and not is_square(int(m.group(1))):
            _ATOMS[name] = ("root", int(m.group(1)))
            _ROOTS[name] = int(m.group(1))
        else:
            _ATOMS[name] = ("sym", name)
    return name


def exp_atom(mono: tuple) -> str:
    key = "exp(" + mono_key_text(mono) + ")"
    if key not in _ATOMS:
        _ATOMS[key] = ("exp", mono)
    return key


def opaque_atom(key: str, arg) -> str:
    if key not in _ATOMS:
        _ATOMS[key] = ("opaque", arg)
    return key


def atom_kind(key: str) -> tuple:
    return _ATOMS[key]


def mono_key_text(mono: tuple) -> str:
    if not mono:
        return "1"
    parts = []
    for a, e in mono:
        parts.append(a if e == 1 else f"{a}^{e}")
    return "*".join(parts)


# -- monomials ---------------------------------------------------------------


def _reduce_roots(d: dict):
    coef = Q(1)
    for k in [k for k in d if k in _ROOTS]:
        quo, rem = divmod(d[k], 2)
        if quo:
            coef *= Q(_ROOTS[k]) ** quo
        if rem:
            d[k] = 1
        else:
            del d[k]
    return coef


@lru_cache(maxsize=1 << 18)
def mono_mul(m1: tuple, m2: tuple):
    """Return ``(coef, mono)`` with ``coef * mono == m1 * m2``."""
    if not m1:
        return 1, m2
    if not m2:
        return 1, m1
    d = dict(m1)
    for k, e in m2:
        v = d.get(k, 0) + e
        if v:
            d[k] = norm_exp(v) if not isinstance(v, int) else v
        else:
            del d[k]
    coef = 1
    if _ROOTS and any(k in _ROOTS for k in d):
        coef = _reduce_roots(d)
    return coef, tuple(sorted(d.items()))


@lru_cache(maxsize=1 << 16)
def mono_pow(m: tuple, k: int):
    if k == 0 or not m:
        return 1, ()
    d = {a: norm_exp(e * k) for a, e in m}
    coef = 1
    if _ROOTS and any(a in _ROOTS for a in d):
        coef = _reduce_roots(d)
    return coef, tuple(sorted(d.items()))


# -- polynomials -------------------------------------------------------------


def p_const(c) -> dict:
    c = q(c)
    return {(): c} if c else {}


def p_add(p: dict, r: dict) -> dict:
    if not p:
        return r
    if not r:
        return p
    out = dict(p)
    for m, c in r.items():
        v = out.get(m)
        if v is None:
            out[m] = c
        else:
            v = v + c
            if v:
                out[m] = v
            else:
                del out[m]
    return out


def p_sum(polys) -> dict:
    out: dict = {}
    for p in polys:
        for m, c in p.items():
            v = out.get(m)
            out[m] = c if v is None else v + c
    return {m: c for m, c in out.items() if c}


def p_neg(p: dict) -> dict:
    return {m: -c for m, c in p.items()}


def p_scale(p: dict, c) -> dict:
    if not c:
        return {}
    if c == 1:
        return p
    return {m: v * c for m, v in p.items()}


def p_mul(p: dict, r: dict) -> dict:
    if not p or not r:
        return {}
    if len(p) < len(r):
        p, r = r, p
    out: dict = {}
    for m2, c2 in r.items():
        for m1, c1 in p.items():
            f, m = mono_mul(m1, m2)
            v = c1 * c2 if f == 1 else c1 * c2 * f
            w = out.get(m)
            out[m] = v if w is None else w + v
    return {m: c for m, c in out.items() if c}


def p_mul_mono(p: dict, coef, mono: tuple) -> dict:
    out: dict = {}
    for m, c in p.items():
        f, mm = mono_mul(m, mono)
        v = c * coef if f == 1 else c * coef * f
        w = out.get(mm)
        out[mm] = v if w is None else w + v
    return {m: c for m, c in out.items() if c}


def p_pow(p: dict, k: int) -> dict:
    if k < 0:
        raise ValueError("negative power of a polynomial")
    result = P_ONE
    base = p
    while k:
        if k & 1:
            result = p_mul(result, base)
        k >>= 1
        if k:
            base = p_mul(base, base)
    return result


def p_key(p: dict) -> tuple:
    return tuple(sorted(p.items()))


def p_atoms(p: dict) -> set:
    return {a for m in p for a, _ in m}


# -- dense exponent vectors (lex order) --------------------------------------


def _dense(p: dict, atoms: list) -> dict:
    idx = {a: i for i, a in enumerate(atoms)}
    n = len(atoms)
    out = {}
    for m, c in p.items():
        v = [0] * n
        for a, e in m:
            v[idx[a]] = e
        out[tuple(v)] = c
    return out


def _sparse(vec: tuple, atoms: list):
    d = {atoms[i]: norm_exp(e) for i, e in enumerate(vec) if e}
    coef = 1
    if _ROOTS and any(a in _ROOTS for a in d):
        coef = _reduce_roots(d)
    return coef, tuple(sorted(d.items()))


def _from_dense(dp: dict, atoms: list) -> dict:
    out: dict = {}
    for v, c in dp.items():
        f, m = _sparse(v, atoms)
        out[m] = out.get(m, 0) + c * f
    return {m: c for m, c in out.items() if c}


def _is_int_atom(a: str) -> bool:
    return _ATOMS[a][0] in ("sym", "root")


def p_content(p: dict):
    """Split ``p`` as ``coef * mono * prim``.

    ``prim`` has no monomial factor outside root atoms and its lex-leading
    coefficient is 1.
    """
    if not p:
        raise ZeroDivisionError("content of the zero polynomial")
    atoms = sorted(a for a in p_atoms(p) if a not in _ROOTS)
    mins = {}
    for a in atoms:
        lo = None
        for m in p:
            e = 0
            for b, x in m:
                if b == a:
                    e = x
                    break
            lo = e if lo is None or e < lo else lo
        if lo:
            mins[a] = norm_exp(lo)
    mono = tuple(sorted(mins.items()))
    if mono:
        _, inv = mono_pow(mono, -1)
        prim = p_mul_mono(p, 1, inv)
    else:
        prim = p
    all_atoms = sorted(p_atoms(prim))
    dense = _dense(prim, all_atoms)
    lead = dense[max(dense)]
    if lead != 1:
        prim = p_scale(prim, 1 / lead)
    return lead, mono, prim


def p_divexact(n: dict, d: dict, max_steps: int = 20000):
    """Exact quotient ``n / d`` in the Laurent ring, or None.

    Sound but incomplete when root atoms are present: a quotient is only
    found when the division also holds with ``sqrtN`` treated as free.
    """
    if not d:
        raise ZeroDivisionError("division by zero polynomial")
    if not n:
        return {}
    atoms = sorted(p_atoms(n) | p_atoms(d))
    N = _dense(n, atoms)
    D = _dense(d, atoms)
    k = len(atoms)
    n_min = tuple(min(v[i] for v in N) for i in range(k))
    d_min = tuple(min(v[i] for v in D) for i in range(k))
    R = {tuple(x - y for x, y in zip(v, n_min)): c for v, c in N.items()}
    Dv = {tuple(x - y for x, y in zip(v, d_min)): c for v, c in D.items()}
    lt_d = max(Dv)
    lc_d = Dv[lt_d]
    quo = {}
    steps = 0
    while R:
        steps += 1
        if steps > max_steps:
            return None
        lt = max(R)
        t = tuple(x - y for x, y in zip(lt, lt_d))
        if any(x < 0 for x in t):
            return None
        c = R[lt] / lc_d
        quo[t] = c
        for v, dc in Dv.items():
            w = tuple(x + y for x, y in zip(t, v))
            val = R.get(w, 0) - c * dc
            if val:
                R[w] = val
            else:
                R.pop(w, None)
    shift = tuple(x - y for x, y in zip(n_min, d_min))
    quo = {tuple(x + y for x, y in zip(v, shift)): c for v, c in quo.items()}
    return _from_dense(quo, atoms)


def q_sqrt(c):
    """Exact rational square root of a nonnegative rational, or None."""
    if c < 0:
        return None
    c = q(c)
    a, b = int(c.numerator), int(c.denominator)
    if is_square(a) and is_square(b):
        return Q(int(isqrt(a)), int(isqrt(b)))
    return None


def p_sqrt(p: dict, max_steps: int = 20000):
    """A square root of ``p`` with positive leading coefficient, or None."""
    if not p:
        return {}
    atoms = sorted(p_atoms(p))
    P = _dense(p, atoms)
    k = len(atoms)
    lo = tuple(min(v[i] for v in P) for i in range(k))
    int_atom = [_is_int_atom(a) for a in atoms]
    for i in range(k):
        if int_atom[i] and lo[i] % 2:
            return None
    R = {tuple(x - y for x, y in zip(v, lo)): c for v, c in P.items()}
    lt = max(R)
    if any(int_atom[i] and lt[i] % 2 for i in range(k)):
        return None
    c0 = q_sqrt(R[lt])
    if c0 is None:
        return None
    half = tuple(norm_exp(Q(x) / 2) if not int_atom[i] else x // 2 for i, x in enumerate(lt))
    root = {half: c0}
    del R[lt]
    steps = 0
    while R:
        steps += 1
        if steps > max_steps:
            return None
        lt = max(R)
        t = tuple(x - y for x, y in zip(lt, half))
        if any(x < 0 for x in t) or t >= half:
            return None
        c = R[lt] / (2 * c0)
        # R -= 2*c*x^t*root + c^2*x^(2t)
        for v, rc in root.items():
            w = tuple(x + y for x, y in zip(t, v))
            val = R.get(w, 0) - 2 * c * rc
            if val:
                R[w] = val
            else:
                R.pop(w, None)
        w = tuple(2 * x for x in t)
        val = R.get(w, 0) - c * c
        if val:
            R[w] = val
        else:
            R.pop(w, None)
        root[t] = c
    shift = tuple(norm_exp(Q(x) / 2) if not int_atom[i] else x // 2 for i, x in enumerate(lo))
    root = {tuple(x + y for x, y in zip(v, shift)): c for v, c in root.items()}
    return _from_dense(root, atoms)


def mono_value(m: tuple, env: dict) -> float:
    from .expr import atom_value  # local import: avoids a cycle

    v = 1.0
    for a, e in m:
        v *= atom_value(a, e, env)
    return v


def p_value(p: dict, env: dict) -> float:
    return math.fsum(float(c) * mono_value(m, env) for m, c in p.items())
