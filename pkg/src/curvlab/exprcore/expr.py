"""Exact scalar expressions in canonical quotient form.

An :class:`Expr` is ``num / den`` where ``num`` is a Laurent polynomial over
the atom registry and ``den`` is a product of registered non-monomial factor
polynomials with multiplicities.  Monomial denominators are always folded
into ``num``, so expressions built from the metrics in the catalog usually
have ``den == ()``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import cache, lru_cache
from numbers import Rational

from . import _poly as P
from ._poly import Q


class EvaluationError(ArithmeticError):
    """Raised when an expression cannot be evaluated at a point."""


_FACTORS: dict[tuple, dict] = {}


def _register_factor(prim: dict) -> tuple:
    key = P.p_key(prim)
    if key not in _FACTORS:
        _FACTORS[key] = prim
    return key


def _factor(key: tuple) -> dict:
    return _FACTORS[key]


@lru_cache(maxsize=4096)
def _factor_pow(key: tuple, k: int) -> dict:
    return P.p_pow(_FACTORS[key], k)


@lru_cache(maxsize=4096)
def _den_poly(den: tuple) -> dict:
    out = P.P_ONE
    for key, k in den:
        out = P.p_mul(out, _factor_pow(key, k))
    return out


def _den_merge(d1: tuple, d2: tuple) -> tuple:
    if not d1:
        return d2
    if not d2:
        return d1
    acc = dict(d1)
    for key, k in d2:
        acc[key] = acc.get(key, 0) + k
    return tuple(sorted(acc.items()))


def _den_lcm(d1: tuple, d2: tuple) -> tuple:
    acc = dict(d1)
    for key, k in d2:
        acc[key] = max(acc.get(key, 0), k)
    return tuple(sorted(acc.items()))


def _den_quot(big: tuple, small: tuple) -> tuple:
    s = dict(small)
    return tuple((key, k - s.get(key, 0)) for key, k in big if k - s.get(key, 0))


class Expr:
    """Immutable exact expression; see the module docstring for the form.

    ``==`` is semantic equality (the cross-multiplied difference vanishes);
    use :meth:`same` for structural equality of canonical forms.
    """

    __slots__ = ("_key", "den", "num")

    def __init__(self, num: dict, den: tuple = ()):
        if not num:
            den = ()
        self.num = num
        self.den = den
        self._key = None

    # -- construction --------------------------------------------------------

    @staticmethod
    def const(value) -> Expr:
        if isinstance(value, Expr):
            return value
        if isinstance(value, float):
            value = Fraction(value)
        return Expr(P.p_const(value))

    @staticmethod
    def symbol(name: str) -> Expr:
        return symbol(name)

    # -- predicates ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def is_constant(self) -> bool:
        return not self.den and all(not m for m in self.num)

    def is_monomial(self) -> bool:
        return not self.den and len(self.num) == 1

    def constant_value(self):
        """The rational value of a constant expression."""
        if not self.num:
            return Q(0)
        if not self.is_constant():
            raise ValueError(f"not a constant: {self}")
        return self.num[()]

    def key(self) -> tuple:
        if self._key is None:
            self._key = (P.p_key(self.num), self.den)
        return self._key

    def same(self, other: Expr) -> bool:
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __eq__(self, other):
        if not isinstance(other, Expr):
            try:
                other = as_expr(other)
            except TypeError:
                return NotImplemented
        if self.den == other.den:
            return self.num == other.num
        return (self - other).is_zero()

    def __bool__(self):
        return bool(self.num)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = as_expr(other)
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            return Expr(P.p_add(self.num, other.num), self.den)
        lcm = _den_lcm(self.den, other.den)
        n1 = P.p_mul(self.num, _den_poly(_den_quot(lcm, self.den)))
        n2 = P.p_mul(other.num, _den_poly(_den_quot(lcm, other.den)))
        return Expr(P.p_add(n1, n2), lcm)

    __radd__ = __add__

    def __neg__(self):
        return Expr(P.p_neg(self.num), self.den)

    def __sub__(self, other):
        return self + (-as_expr(other))

    def __rsub__(self, other):
        return as_expr(other) - self

    def __mul__(self, other):
        if not isinstance(other, Expr):
            if isinstance(other, (int, Rational)) or type(other) is type(Q(1)):
                return Expr(P.p_scale(self.num, Q(other)), self.den)
            other = as_expr(other)
        if not self.num or not other.num:
            return ZERO
        return Expr(P.p_mul(self.num, other.num), _den_merge(self.den, other.den))

    __rmul__ = __mul__

    def inverse(self) -> Expr:
        if not self.num:
            raise ZeroDivisionError("division by an expression whose numerator is zero")
        coef, mono, prim = P.p_content(self.num)
        c_inv, m_inv = P.mono_pow(mono, -1)
        head = P.p_mul_mono(_den_poly(self.den), c_inv / coef, m_inv)
        if len(prim) == 1:
            # prim is the constant 1 or a lone root atom such as sqrt2
            (m, c), = prim.items()
            ci, mi = P.mono_pow(m, -1)
            return Expr(P.p_mul_mono(head, ci / c, mi))
        mult = 1
        while True:
            r = P.p_sqrt(prim)
            if not r or len(r) < 2:
                break
            lead, mono_r, prim = P.p_content(r)
            # p_sqrt of a normalised factor is itself normalised
            assert lead == 1 and not mono_r
            mult *= 2
        return Expr(head, ((_register_factor(prim), mult),))

    def __truediv__(self, other):
        other = as_expr(other)
        if other.is_constant():
            return Expr(P.p_scale(self.num, 1 / other.constant_value()), self.den)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return as_expr(other) * self.inverse()

    def __pow__(self, k):
        if isinstance(k, Expr):
            k = k.constant_value()
            if k.denominator != 1:
                raise ValueError("non-integer exponent")
            k = int(k)
        if not isinstance(k, int):
            raise TypeError("integer exponents only")
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return ONE
        if not self.den and len(self.num) == 1:
            (m, c), = self.num.items()
            f, mm = P.mono_pow(m, k)
            return Expr({mm: c ** k * f})
        num = P.p_pow(self.num, k)
        den = tuple((key, e * k) for key, e in self.den)
        return Expr(num, den)

    # -- display -------------------------------------------------------------

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"Expr({to_text(self)!r})"

    def leading_sign(self) -> int:
        """Sign of the coefficient of the first rendered term."""
        if not self.num:
            return 0
        m = min(self.num, key=_render_key)
        return 1 if self.num[m] > 0 else -1

    def free_symbols(self) -> frozenset:
        out = set()
        for m in self.num:
            for a, _ in m:
                out |= _atom_symbols(a)
        for key, _ in self.den:
            for m in _factor(key):
                for a, _ in m:
                    out |= _atom_symbols(a)
        return frozenset(out)


ZERO = Expr({})
ONE = Expr(P.p_const(1))


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not an expression")
    if isinstance(value, (int, Rational, float)) or type(value) is type(Q(1)):
        return Expr.const(value)
    if isinstance(value, str):
        from .parser import parse_expr

        return canonicalize(parse_expr(value))
    from .parser import Node

    if isinstance(value, Node):
        return canonicalize(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def symbol(name: str) -> Expr:
    return Expr({((P.sym_atom(name), 1),): Q(1)})


# -- cancellation / canonical form ------------------------------------------


def cancel(e: Expr) -> Expr:
    """Divide out denominator factors that divide the numerator exactly."""
    if not e.den:
        return e
    num = e.num
    rest = []
    for key, k in e.den:
        f = _factor(key)
        while k:
            quo = P.p_divexact(num, f)
            if quo is None:
                break
            num = quo
            k -= 1
        if k:
            rest.append((key, k))
    return Expr(num, tuple(rest))


# -- exponentials ------------------------------------------------------------


def exp(arg) -> Expr:
    arg = cancel(as_expr(arg))
    if not arg.num:
        return ONE
    if arg.den:
        sign = arg.leading_sign()
        if sign < 0:
            arg = -arg
        key = P.opaque_atom("exp{" + to_text(arg) + "}", arg)
        return Expr({((key, sign),): Q(1)})
    parts = {}
    for m, c in arg.num.items():
        parts[P.exp_atom(m)] = P.norm_exp(c)
    return Expr({tuple(sorted(parts.items())): Q(1)})


def sinh(arg) -> Expr:
    arg = as_expr(arg)
    return (exp(arg) - exp(-arg)) / 2


def cosh(arg) -> Expr:
    arg = as_expr(arg)
    return (exp(arg) + exp(-arg)) / 2


# -- symbols contained in atoms ----------------------------------------------


@cache
def _atom_symbols(a: str) -> frozenset:
    kind, payload = P.atom_kind(a)
    if kind == "sym":
        return frozenset((a,))
    if kind == "root":
        return frozenset()
    if kind == "exp":
        out = set()
        for b, _ in payload:
            out |= _atom_symbols(b)
        return frozenset(out)
    return payload.free_symbols()


# -- differentiation ---------------------------------------------------------


@cache
def _exp_logderiv(a: str, x: str) -> Expr:
    kind, payload = P.atom_kind(a)
    if kind == "exp":
        return _poly_diff({payload: Q(1)}, x)
    return differentiate(payload, x)


def _poly_diff(poly: dict, x: str) -> Expr:
    acc: dict = {}
    extra = []
    for m, c in poly.items():
        for i, (a, e) in enumerate(m):
            if x not in _atom_symbols(a):
                continue
            kind = P.atom_kind(a)[0]
            if kind == "sym":
                rest = m[:i] + ((a, e - 1),) + m[i + 1:] if e != 1 else m[:i] + m[i + 1:]
                acc[rest] = acc.get(rest, 0) + c * e
                continue
            ld = _exp_logderiv(a, x)
            if not ld.num:
                continue
            if ld.den:
                extra.append(Expr({m: c * e}) * ld)
                continue
            for lm, lc in ld.num.items():
                f, mm = P.mono_mul(m, lm)
                acc[mm] = acc.get(mm, 0) + c * e * lc * f
    out = Expr({k: v for k, v in acc.items() if v})
    for t in extra:
        out = out + t
    return out


def differentiate(e, coord: str) -> Expr:
    """Exact partial derivative with respect to the symbol ``coord``."""
    e = as_expr(e)
    if not e.num or coord not in e.free_symbols():
        return ZERO
    dn = _poly_diff(e.num, coord)
    if not e.den:
        return dn
    inv_den = Expr(P.P_ONE, e.den)
    out = dn * inv_den
    num = Expr(e.num)
    for key, k in e.den:
        f = _factor(key)
        df = _poly_diff(f, coord)
        if df.num:
            out = out - num * inv_den * df * k * Expr(P.P_ONE, ((key, 1),))
    return cancel(out)


# -- numeric evaluation ------------------------------------------------------


def atom_value(a: str, e, env: dict) -> float:
    kind, payload = P.atom_kind(a)
    if kind == "sym":
        try:
            v = env[a]
        except KeyError:
            raise EvaluationError(f"unassigned symbol {a!r}") from None
        return v ** e
    if kind == "root":
        return math.sqrt(payload) ** e
    if kind == "exp":
        return math.exp(float(e) * P.mono_value(payload, env))
    return math.exp(float(e) * _eval(payload, env))


def _eval(e: Expr, env: dict) -> float:
    n = P.p_value(e.num, env)
    if not e.den:
        return n
    d = 1.0
    for key, k in e.den:
        d *= P.p_value(_factor(key), env) ** k
    if abs(d) < 1e-300:
        raise EvaluationError("division by numerical zero")
    return n / d


def eval_numeric(e, point: dict) -> float:
    """Evaluate at a point given as ``{name: rational or float}``."""
    e = as_expr(e)
    env = {k: float(v) for k, v in point.items()}
    return _eval(e, env)


# -- substitution ------------------------------------------------------------


def _subst_poly(poly: dict, b: dict, cache: dict) -> Expr:
    terms = []
    for m, c in poly.items():
        t = Expr({(): c})
        for a, k in m:
            ck = (a, k)
            if ck not in cache:
                cache[ck] = _subst_atom(a, k, b, cache)
            t = t * cache[ck]
        terms.append(t)
    return expr_sum(terms)


def _subst_atom(a: str, k, b: dict, cache: dict) -> Expr:
    kind, payload = P.atom_kind(a)
    if kind == "sym":
        base = b.get(a)
        if base is None:
            return Expr({((a, k),): Q(1)})
        return base ** k
    if kind == "root":
        return Expr({((a, 1),): Q(1)}) ** k
    if kind == "exp":
        return exp(_subst_poly({payload: Q(1)}, b, cache) * Q(k))
    return exp(substitute(payload, b) * Q(k))


def substitute(e, bindings) -> Expr:
    """Simultaneous substitution ``{name: Expr}``, then cancellation."""
    e = as_expr(e)
    b = {k: as_expr(v) for k, v in dict(bindings).items()}
    if not b or not (e.free_symbols() & set(b)):
        return e
    cache: dict = {}
    out = _subst_poly(e.num, b, cache)
    for key, k in e.den:
        out = out / (_subst_poly(_factor(key), b, cache) ** k)
    return cancel(out)


# -- sums --------------------------------------------------------------------


def expr_sum(terms) -> Expr:
    terms = [t for t in terms if t.num]
    if not terms:
        return ZERO
    if all(not t.den for t in terms):
        return Expr(P.p_sum(t.num for t in terms))
    dens = {t.den for t in terms}
    if len(dens) == 1:
        return Expr(P.p_sum(t.num for t in terms), terms[0].den)
    out = ZERO
    for t in terms:
        out = out + t
    return out


def canonicalize(e) -> Expr:
    """Canonical quotient form of a parse tree, string, number or Expr."""
    from .parser import Node, build

    if isinstance(e, Node):
        e = build(e)
    return cancel(as_expr(e))


def is_zero(e) -> bool:
    return not as_expr(e).num


def sqrt_expr(e) -> Expr | None:
    """An exact square root with positive leading sign, or None."""
    e = cancel(as_expr(e))
    if not e.num:
        return ZERO
    if not e.den:
        r = P.p_sqrt(e.num)
        return None if r is None else Expr(r)
    num = e.num
    den = []
    for key, k in e.den:
        if k % 2:
            num = P.p_mul(num, _factor(key))
            k += 1
        den.append((key, k // 2))
    r = P.p_sqrt(num)
    if r is None:
        return None
    return cancel(Expr(r, tuple(den)))


# -- rendering ---------------------------------------------------------------


def _qtext(c) -> str:
    c = P.q(c)
    if c.denominator == 1:
        return str(int(c.numerator))
    return f"{int(c.numerator)}/{int(c.denominator)}"


def _render_key(m: tuple):
    exps = []
    syms = []
    for a, e in m:
        (exps if P.atom_kind(a)[0] in ("exp", "opaque") else syms).append((a, -e))
    return (tuple(exps), tuple(syms))


def _power(base: str, k) -> str:
    return base if k == 1 else f"{base}^{k}"


def _term_text(c, m: tuple) -> str:
    top, bottom = [], []
    exp_arg = {}
    for a, e in m:
        kind, payload = P.atom_kind(a)
        if kind == "exp":
            exp_arg[payload] = Q(e)
        elif kind == "opaque":
            (top if e > 0 else bottom).append(_power(f"exp({to_text(payload)})", abs(e)))
        else:
            (top if e > 0 else bottom).append(_power(a, abs(e)))
    if exp_arg:
        top.append("exp(" + _poly_text(exp_arg) + ")")
    c = abs(P.q(c))
    if not bottom:
        if not top:
            return _qtext(c)
        if c == 1:
            return "*".join(top)
        return _qtext(c) + "*" + "*".join(top)
    p, qd = int(c.numerator), int(c.denominator)
    head = ([str(p)] if p != 1 or not top else []) + top
    tail = ([str(qd)] if qd != 1 else []) + bottom
    tail_s = tail[0] if len(tail) == 1 else "(" + "*".join(tail) + ")"
    return "*".join(head) + "/" + tail_s


def _poly_text(poly: dict) -> str:
    if not poly:
        return "0"
    out = []
    for i, m in enumerate(sorted(poly, key=_render_key)):
        c = poly[m]
        body = _term_text(c, m)
        if i == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


def to_text(e: Expr) -> str:
    num = _poly_text(e.num)
    if not e.den:
        return num
    if len(e.num) > 1:
        num = f"({num})"
    parts = []
    for key, k in e.den:
        parts.append(_power(f"({_poly_text(_factor(key))})", k))
    den = parts[0] if len(parts) == 1 and e.den[0][1] == 1 else "(" + "*".join(parts) + ")"
    return f"{num}/{den}"
