"""Dot actions, Tachibana tensors and checkers for pseudosymmetry-type conditions.

Index layout of every derived (0,k+2) tensor is ``(X1..Xk; X, Y)``: the
acted-on slots first, the two operator arguments last.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import curvature as cv
from .exprcore import (
    ONE,
    ZERO,
    Expr,
    as_expr,
    cancel,
    eval_numeric,
    expr_sum,
    sqrt_expr,
)
from .tensorlab import (
    MetricDefinition,
    Symmetry,
    Tensor,
    determinant,
    kulkarni_nomizu,
    linear_combination,
    metric_inverse,
    metric_tensor,
    sample_points,
    trace,
)

HOLDS = "holds"
HOLDS_WITH_FACTOR = "holds_with_factor"
FAILS = "fails"
NOT_APPLICABLE = "not_applicable"

VERDICTS = (HOLDS, HOLDS_WITH_FACTOR, FAILS, NOT_APPLICABLE)


@dataclass(frozen=True)
class ConditionVerdict:
    condition: str
    verdict: str
    factor: Expr | None = None
    witness: tuple | None = None  # (0-based index, residual Expr)
    note: str = ""
    data: tuple = ()

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if (self.factor is not None) != (self.verdict == HOLDS_WITH_FACTOR):
            raise ValueError("factor is present exactly when the verdict is holds_with_factor")
        if (self.witness is not None) != (self.verdict == FAILS):
            raise ValueError("witness is present exactly when the verdict is fails")

    @property
    def ok(self) -> bool:
        return self.verdict in (HOLDS, HOLDS_WITH_FACTOR)

    def get(self, key, default=None):
        return dict(self.data).get(key, default)

    def renamed(self, condition: str) -> ConditionVerdict:
        return ConditionVerdict(condition, self.verdict, self.factor, self.witness, self.note, self.data)


# -- derived tensors ---------------------------------------------------------


def _action_symmetry(T: Tensor) -> Symmetry:
    k = T.rank
    gens = tuple((perm + (k, k + 1), s) for perm, s in T.sym.generators)
    skew = tuple(range(k)) + (k + 1, k)
    return Symmetry(T.sym.name + "+skew" if gens else "skew", gens + ((skew, -1),))


def _check_operands(A: Tensor, T: Tensor):
    if A.metric is not T.metric:
        raise ValueError("operands live on different charts")
    if T.upper or T.rank not in (2, 4):
        raise ValueError(f"acted-on tensor must be (0,2) or (0,4), got valence {T.valence}")


def _apply(op_by_upper: dict, T: Tensor, name: str) -> Tensor:
    """``-sum_p op^{s}_{l m i} T_{..s..}`` placed at ``(..i.., l, m)``."""
    k = T.rank
    terms = defaultdict(list)
    for idx, v in T.nonzero():
        for p in range(k):
            for l, m, i, w in op_by_upper.get(idx[p], ()):
                tgt = idx[:p] + (i,) + idx[p + 1:] + (l, m)
                terms[tgt].append(-(w * v))
    return Tensor.from_terms(T.metric, k + 2, terms, 0, _action_symmetry(T), name, check=False)


def _curvature_op(T4: Tensor) -> dict:
    """``op^s_{lmi} = T4_{lmiw} g^{ws}`` grouped by ``s``."""
    ginv = metric_inverse(T4.metric)
    cols = defaultdict(list)
    for (w, s), x in ginv.nonzero():
        cols[w].append((s, x))
    terms = defaultdict(list)
    for (l, m, i, w), v in T4.nonzero():
        for s, x in cols[w]:
            terms[(s, l, m, i)].append(v * x)
    out = defaultdict(list)
    for (s, l, m, i), ts in sorted(terms.items()):
        val = cancel(expr_sum(ts))
        if val.num:
            out[s].append((l, m, i, val))
    return out


def dot_action(T4: Tensor, T: Tensor) -> Tensor:
    """``(T4 . T)(X1..Xk; X, Y) = -sum_p T(.., Op(X,Y) X_p, ..)``."""
    if T4.valence != (0, 4):
        raise ValueError("the acting tensor must be (0,4)")
    _check_operands(T4, T)
    name = f"{T4.name}.{T.name}" if T4.name and T.name else ""
    return _apply(_curvature_op(T4), T, name)


def tachibana(A: Tensor, T: Tensor) -> Tensor:
    """``Q(A,T)`` built from ``(X ^_A Y) Z = A(Y,Z) X - A(X,Z) Y``."""
    if A.valence != (0, 2):
        raise ValueError("Q(A,T) needs a symmetric (0,2) tensor A")
    _check_operands(A, T)
    n = A.dim
    op = defaultdict(list)
    a_nz = A.nonzero()
    for s in range(n):
        for (m, i), a in a_nz:
            # +A_{mi} delta^s_l  and  -A_{li} delta^s_m
            op[s].append((s, m, i, a))
            op[s].append((m, s, i, -a))
    name = f"Q({A.name},{T.name})" if A.name and T.name else ""
    return _apply(op, T, name)


# -- generic checks ----------------------------------------------------------


def _first_nonzero_difference(lhs: Tensor, rhs: Tensor):
    keys = sorted({i for i, _ in lhs.nonzero()} | {i for i, _ in rhs.nonzero()})
    for idx in keys:
        d = lhs[idx] - rhs[idx]
        if d.num:
            return idx, cancel(d)
    return None


def check_identity(lhs: Tensor, rhs: Tensor, condition: str = "identity") -> ConditionVerdict:
    if lhs.metric is not rhs.metric or lhs.valence != rhs.valence:
        raise ValueError(f"{condition}: sides differ in chart or valence")
    diff = _first_nonzero_difference(lhs, rhs)
    if diff is None:
        return ConditionVerdict(condition, HOLDS)
    return ConditionVerdict(condition, FAILS, witness=diff)


def check_vanishes(T: Tensor, condition: str) -> ConditionVerdict:
    nz = T.nonzero()
    if not nz:
        return ConditionVerdict(condition, HOLDS)
    return ConditionVerdict(condition, FAILS, witness=nz[0])


def check_proportionality(T1: Tensor, T2: Tensor, condition: str = "proportional") -> ConditionVerdict:
    """Is ``T1 = f * T2`` for one scalar ``f``?

    ``f`` is read off the first nonzero component of ``T2`` in lexicographic
    order and then verified on every component.
    """
    if T1.metric is not T2.metric or T1.valence != T2.valence:
        raise ValueError(f"{condition}: tensors differ in chart or valence")
    ref = T2.nonzero()
    if not ref:
        if T1.is_zero():
            return ConditionVerdict(condition, HOLDS, note="vacuous: both tensors vanish")
        return ConditionVerdict(condition, NOT_APPLICABLE, note="reference tensor vanishes identically")
    if T1.is_zero():
        return ConditionVerdict(condition, HOLDS, note="factor 0: left side vanishes")
    idx0, v0 = ref[0]
    f = cancel(T1[idx0] / v0)
    for idx in sorted({i for i, _ in T1.nonzero()} | {i for i, _ in ref}):
        d = T1[idx] - f * T2[idx]
        if d.num:
            d = cancel(d)
            if d.num:
                return ConditionVerdict(condition, FAILS, witness=(idx, d))
    if not f.num:
        return ConditionVerdict(condition, HOLDS, note="factor 0")
    return ConditionVerdict(condition, HOLDS_WITH_FACTOR, factor=f)


def check_linear_dependence(tensors, g: MetricDefinition, samples: int = 5, seed: int = 42) -> int:
    """Numeric rank of the tensors evaluated at seeded sample points.

    Each tensor becomes one row: its flattened components at every point,
    concatenated.  Parameter values are taken from the first point and held
    fixed, so coefficients depending on parameters count as constants.
    Singular values below ``1e-9 * max`` count as zero.
    """
    if samples < 3:
        raise ValueError("need at least 3 sample points")
    if not tensors:
        return 0
    shape = tensors[0].valence
    if any(t.valence != shape or t.metric is not g for t in tensors):
        raise ValueError("tensors must share chart and valence")
    pts = sample_points(g, samples, seed)
    # parameters are constants of one metric: keep the first point's values
    fixed = {p: pts[0][p] for p in g.param_names()}
    pts = [dict(p, **fixed) for p in pts]
    rows = []
    for t in tensors:
        rows.append(np.concatenate([t.evaluate(p).ravel() for p in pts]))
    M = np.vstack(rows)
    sv = np.linalg.svd(M, compute_uv=False)
    if not sv.size or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > 1e-9 * sv[0]))


# -- first-order conditions --------------------------------------------------


def cyclic_sum_ricci(g: MetricDefinition) -> Tensor:
    DS = cv.nabla_ricci(g)
    terms = defaultdict(list)
    for (i, j, k), v in DS.nonzero():
        # S_{ij,k} contributes to (i,j,k), (k,i,j), (j,k,i)
        terms[(i, j, k)].append(v)
        terms[(k, i, j)].append(v)
        terms[(j, k, i)].append(v)
    return Tensor.from_terms(g, 3, terms, check=False)


def check_cyclic_parallel(g: MetricDefinition) -> ConditionVerdict:
    return check_vanishes(cyclic_sum_ricci(g), "cyclic_parallel")


def check_codazzi(g: MetricDefinition) -> ConditionVerdict:
    DS = cv.nabla_ricci(g)
    terms = defaultdict(list)
    for (i, j, k), v in DS.nonzero():
        terms[(i, j, k)].append(v)
        terms[(k, j, i)].append(-v)
    return check_vanishes(Tensor.from_terms(g, 3, terms, check=False), "codazzi")


def check_ricci_symmetric(g: MetricDefinition) -> ConditionVerdict:
    return check_vanishes(cv.nabla_ricci(g), "ricci_symmetric")


def check_semisymmetric(g: MetricDefinition) -> ConditionVerdict:
    return check_vanishes(derived(g, "RR"), "semisymmetric")


def check_second_order_symmetric(g: MetricDefinition) -> ConditionVerdict:
    return check_vanishes(cv.nabla2_riemann(g), "second_order_symmetric")


# -- named derived tensors ---------------------------------------------------

_DERIVED_CACHE: dict = {}

BASE_TENSORS = {
    "R": cv.riemann,
    "S": cv.ricci,
    "g": metric_tensor,
    "C": cv.weyl,
    "K": cv.concircular,
    "conh": cv.conharmonic,
    "G": cv.gaussian,
    "S2": cv.ricci_square,
}


def base_tensor(g: MetricDefinition, name: str) -> Tensor:
    return BASE_TENSORS[name](g)


def derived(g: MetricDefinition, name: str) -> Tensor:
    """Cached derived tensor by short name.

    ``"RR"``, ``"CK"``, ``"conhR"`` are dot actions (acting tensor first);
    ``"QgR"``, ``"QSconh"`` are Tachibana tensors.
    """
    key = (id(g), name)
    hit = _DERIVED_CACHE.get(key)
    if hit is not None and hit[0] is g:
        return hit[1]
    if name.startswith("Q"):
        A, T = name[1], name[2:]
        t = tachibana(base_tensor(g, A), base_tensor(g, T))
        t.name = f"Q({A},{T})"
    else:
        A, T = _split_dot(name)
        t = dot_action(base_tensor(g, A), base_tensor(g, T))
        t.name = f"{A}.{T}"
    _DERIVED_CACHE[key] = (g, t)
    return t


_FOUR = ("conh", "R", "C", "K", "G")


def _split_dot(name: str):
    for a in _FOUR:
        if name.startswith(a):
            rest = name[len(a):]
            if rest in BASE_TENSORS:
                return a, rest
    raise KeyError(f"unknown derived tensor {name!r}")


# -- quasi-Einstein ------------------------------------------------------------


@dataclass(frozen=True)
class QuasiEinstein:
    kind: str  # einstein | quasi | neither
    rho: Expr | None = None
    omega: tuple | None = None
    coefficient: Expr | None = None  # S - rho g = coefficient * omega (x) omega
    note: str = ""


def _numeric_rank_one_values(g: MetricDefinition, pts) -> list:
    """Per point, the real eigenvalues ``r`` of (S, g) with rank(S - r g) <= 1."""
    S = cv.ricci(g)
    gt = metric_tensor(g)
    out = []
    for p in pts:
        s = S.evaluate(p)
        m = gt.evaluate(p)
        lam = np.linalg.eigvals(np.linalg.solve(m, s))
        scale = max(1.0, float(np.abs(s).max()), float(np.abs(m).max()))
        cands = []
        for x in lam:
            if abs(x.imag) > 1e-7 * max(1.0, abs(x)):
                continue
            sv = np.linalg.svd(s - x.real * m, compute_uv=False)
            if len(sv) < 2 or sv[1] <= 1e-7 * scale * max(1.0, abs(x.real)):
                cands.append(float(x.real))
        out.append(cands)
    return out


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-6 * max(1.0, abs(a), abs(b))


def _minor_witness(B: Tensor):
    n = B.dim
    for (i, k) in itertools.combinations(range(n), 2):
        for (j, l) in itertools.combinations(range(n), 2):
            m = B[i, j] * B[k, l] - B[i, l] * B[k, j]
            if m.num:
                m = cancel(m)
                if m.num:
                    return (i, k, j, l), m
    return None


def _factor_rank_one(B: Tensor, trace_b: Expr):
    """``(c, omega)`` with ``B = c * omega (x) omega`` and ``|omega|^2 = +-1``."""
    n = B.dim
    diag = [j for j in range(n) if B[j, j].num]
    if not diag:
        return None
    j = diag[0]
    if trace_b.num:
        coeffs = [trace_b, -trace_b]
    else:
        coeffs = [ONE, -ONE]
    for c in coeffs:
        wj = sqrt_expr(B[j, j] / c)
        if wj is None:
            continue
        denom = c * wj
        omega = [cancel(B[i, j] / denom) if B[i, j].num else ZERO for i in range(n)]
        omega[j] = wj
        lead = next(w for w in omega if w.num)
        if lead.leading_sign() < 0:
            omega = [-w for w in omega]
        ok = all(
            not cancel(B[a, b] - c * omega[a] * omega[b]).num
            for a in range(n) for b in range(a, n)
        )
        if ok:
            return cancel(c), tuple(omega)
    return None


def quasi_einstein_analysis(g: MetricDefinition, seed: int = 42, samples: int = 5) -> QuasiEinstein:
    n = g.dim
    S = cv.ricci(g)
    gt = metric_tensor(g)
    kappa = cv.scalar_curvature(g)
    E = linear_combination([1, -kappa / n], [S, gt])
    if E.is_zero():
        return QuasiEinstein("einstein", rho=cancel(kappa / n))
    pts = sample_points(g, samples, seed)
    numeric = _numeric_rank_one_values(g, pts)
    if any(not c for c in numeric):
        return QuasiEinstein("neither", note="no eigenvalue of multiplicity n-1 at a sample point")
    t1 = kappa
    t2 = trace(cv.ricci_square(g), metric_inverse(g))
    disc = cancel((n - 1) * (n * t2 - t1 * t1))
    if disc.num:
        r = sqrt_expr(disc)
        if r is None:
            return QuasiEinstein("neither", note="no exact rational root for rho")
        roots = [cancel(((n - 1) * t1 + s * r) / (n * (n - 1))) for s in (1, -1)]
    else:
        roots = [cancel(t1 / n)]
    rho = None
    for cand in roots:
        if all(any(_close(eval_numeric(cand, p), x) for x in c) for p, c in zip(pts, numeric)):
            rho = cand
            break
    if rho is None:
        return QuasiEinstein("neither", note="numeric eigenvalue matches no exact root")
    B = linear_combination([1, -rho], [S, gt])
    if _minor_witness(B) is not None:
        return QuasiEinstein("neither", note="rank(S - rho g) exceeds 1")
    fact = _factor_rank_one(B, cancel(t1 - n * rho))
    if fact is None:
        return QuasiEinstein("quasi", rho=rho, note="rank-one factor not expressible exactly")
    c, omega = fact
    return QuasiEinstein("quasi", rho=rho, omega=omega, coefficient=c)


def check_quasi_einstein(g: MetricDefinition, seed: int = 42, samples: int = 5) -> ConditionVerdict:
    qe = quasi_einstein_analysis(g, seed, samples)
    data = [("kind", qe.kind)]
    if qe.rho is not None:
        data.append(("rho", qe.rho))
    if qe.omega is not None:
        data.append(("omega", qe.omega))
        data.append(("coefficient", qe.coefficient))
    if qe.kind == "neither":
        S = cv.ricci(g)
        kappa = cv.scalar_curvature(g)
        E = linear_combination([1, -kappa / g.dim], [S, metric_tensor(g)])
        return ConditionVerdict("quasi_einstein", FAILS, witness=E.nonzero()[0], note=qe.note, data=tuple(data))
    return ConditionVerdict("quasi_einstein", HOLDS, note=qe.note,
                            data=tuple(data))


def check_rank_one_ricci(g: MetricDefinition) -> ConditionVerdict:
    S = cv.ricci(g)
    if S.is_zero():
        return ConditionVerdict("rank_ricci_one", NOT_APPLICABLE, note="Ricci tensor vanishes")
    return check_vanishes(kulkarni_nomizu(S, S), "rank_ricci_one")


# -- compatibility -------------------------------------------------------------


def _raise_covector(g: MetricDefinition, omega) -> list:
    ginv = metric_inverse(g)
    n = g.dim
    return [cancel(expr_sum([ginv[s, r] * as_expr(omega[r]) for r in range(n) if ginv[s, r].num]))
            for s in range(n)]


def compatibility_tensor(T: Tensor, A) -> Tensor:
    """Cyclic compatibility sum of ``T`` with a symmetric tensor or a covector.

    For a (0,2) tensor ``A`` this is ``T(AX,Y,Z,W) + T(AZ,Y,W,X) + T(AW,Y,X,Z)``
    with ``g(AX, Y) = A(X, Y)``; for a covector ``w`` it is
    ``w^s (w_h T_sijk + w_j T_sikh + w_k T_sihj)``.
    """
    g = T.metric
    n = g.dim
    terms = defaultdict(list)
    if isinstance(A, Tensor):
        ginv = metric_inverse(g)
        # Aop[h][s] = g^{s y} A_{y h}
        aop = defaultdict(list)
        for s in range(n):
            for h in range(n):
                v = expr_sum([ginv[s, y] * A[y, h] for y in range(n) if ginv[s, y].num and A[y, h].num])
                if v.num:
                    aop[s].append((h, v))
        TA = defaultdict(list)
        for (s, i, j, k), t in T.nonzero():
            for h, a in aop[s]:
                TA[(h, i, j, k)].append(a * t)
        TA = {k: expr_sum(v) for k, v in TA.items()}
        for (h, i, j, k), v in TA.items():
            if not v.num:
                continue
            # v = T(A d_h, d_i, d_j, d_k); contributes as each of the three terms
            terms[(h, i, j, k)].append(v)
            terms[(k, i, h, j)].append(v)
            terms[(j, i, k, h)].append(v)
        return Tensor.from_terms(g, 4, terms, check=False)
    omega = [as_expr(w) for w in A]
    if len(omega) != n:
        raise ValueError("covector length differs from the dimension")
    up = _raise_covector(g, omega)
    for (s, i, a, b), t in T.nonzero():
        ws = up[s]
        if not ws.num:
            continue
        wt = ws * t
        # w_h T_{s i j k}: (a,b) = (j,k)
        for h in range(n):
            if omega[h].num:
                terms[(h, i, a, b)].append(omega[h] * wt)
        # w_j T_{s i k h}: (a,b) = (k,h)
        for j in range(n):
            if omega[j].num:
                terms[(b, i, j, a)].append(omega[j] * wt)
        # w_k T_{s i h j}: (a,b) = (h,j)
        for k in range(n):
            if omega[k].num:
                terms[(a, i, b, k)].append(omega[k] * wt)
    return Tensor.from_terms(g, 4, terms, check=False)


def check_riemann_compatible(g: MetricDefinition, A, use_weyl: bool = False,
                             condition: str | None = None) -> ConditionVerdict:
    T = cv.weyl(g) if use_weyl else cv.riemann(g)
    if condition is None:
        condition = "weyl_compatible" if use_weyl else "riemann_compatible"
    return check_vanishes(compatibility_tensor(T, A), condition)


def omega_curvature_tensor(g: MetricDefinition, omega) -> Tensor:
    """``w(X1) R(X2,X3) + w(X2) R(X3,X1) + w(X3) R(X1,X2)`` lowered to (0,5)."""
    n = g.dim
    omega = [as_expr(w) for w in omega]
    terms = defaultdict(list)
    for (b, c, i, j), v in cv.riemann(g).nonzero():
        for a in range(n):
            w = omega[a]
            if not w.num:
                continue
            wv = w * v
            terms[(a, b, c, i, j)].append(wv)
            terms[(c, a, b, i, j)].append(wv)
            terms[(b, c, a, i, j)].append(wv)
    return Tensor.from_terms(g, 5, terms, check=False)


def check_omega_curvature_condition(g: MetricDefinition, omega) -> ConditionVerdict:
    if all(not as_expr(w).num for w in omega):
        return ConditionVerdict("omega_curvature_condition", NOT_APPLICABLE, note="zero covector")
    return check_vanishes(omega_curvature_tensor(g, omega), "omega_curvature_condition")


# -- conharmonic identities ----------------------------------------------------


def conharmonic_identities(g: MetricDefinition) -> list:
    """The four conharmonic dot-action identities as verdicts."""
    n = g.dim
    c = cv.scalar_curvature(g) / ((n - 2) * (n - 1))
    out = []
    specs = [
        ("conh.S", "conhS", "CS", "QgS"),
        ("R.conh", "Rconh", "RC", None),
        ("conh.R", "conhR", "CR", "QgR"),
        ("conh.conh", "conhconh", "CC", "QgC"),
    ]
    for label, lhs, first, q in specs:
        rhs = derived(g, first)
        if q is not None:
            rhs = linear_combination([1, -c], [rhs, derived(g, q)])
        out.append(check_identity(derived(g, lhs), rhs, label))
    return out


def check_conharmonic_identities(g: MetricDefinition) -> ConditionVerdict:
    for v in conharmonic_identities(g):
        if not v.ok:
            return ConditionVerdict("conharmonic_identities", FAILS, witness=v.witness, note=v.condition)
    return ConditionVerdict("conharmonic_identities", HOLDS)


# -- two-parameter families ----------------------------------------------------

FAMILY_IDS = ("v", "vi", "vii", "viii")

FAMILY_TENSORS = {
    "v": ("RC", "CR", "QgR", "QSR", "QgC", "QSC"),
    "vi": ("CK", "KC", "QgC", "QSC", "QgK", "QSK"),
    "vii": ("Kconh", "conhK", "QgK", "QSK", "Qgconh", "QSconh"),
    "viii": ("Rconh", "conhR", "QgR", "QSR", "Qgconh", "QSconh"),
}


def family_basis(family: str, k: Expr) -> dict:
    """Coefficients of ``lhs - rhs`` per basis instantiation.

    Each basis maps to ``{tensor name: coefficient}``; the constant ``a^2``
    of the printed identities is replaced by ``1/k`` with ``k`` the scalar
    curvature.
    """
    k = as_expr(k)
    h = as_expr(1)
    if family == "v":
        return {
            (1, 0): {"RC": 2 / k, "CR": 2 / k, "QgR": h * 2 / 3, "QSR": -2 * h, "QgC": -h},
            (0, 1): {"RC": h * 2 / 3, "CR": h * 2 / 3, "QgR": -k / 9, "QSR": k / 3, "QSC": -h},
        }
    if family == "vi":
        return {
            (1, 0): {"CK": h, "KC": h, "QgC": -k / 12, "QSC": -h},
            (0, 1): {"CK": h, "KC": h, "QgC": -k * 7 / 12, "QgK": k / 2, "QSK": -h},
        }
    if family == "vii":
        return {
            (1, 0): {"Kconh": -h * 2 / 5, "conhK": -h * 2 / 5, "QgK": -k / 30, "QSK": -h,
                     "QSconh": h * 7 / 5},
            (0, 1): {"Kconh": 12 / (5 * k), "conhK": 12 / (5 * k), "QgK": h * 6 / 5,
                     "Qgconh": -h, "QSconh": -12 / (5 * k)},
        }
    if family == "viii":
        return {
            (1, 0): {"Rconh": 2 / k, "conhR": 2 / k, "QgR": h, "Qgconh": -h, "QSconh": -2 / k},
            (0, 1): {"QSR": -h, "QSconh": h},
        }
    raise KeyError(f"unknown family {family!r}")


def check_two_parameter_family(family: str, g: MetricDefinition) -> ConditionVerdict:
    cid = f"family_{family}"
    names = FAMILY_TENSORS[family]
    tensors = {nm: derived(g, nm) for nm in names}
    if all(t.is_zero() for t in tensors.values()):
        return ConditionVerdict(cid, HOLDS, note="vacuous: every tensor vanishes")
    k = cv.scalar_curvature(g)
    if not k.num or (k.free_symbols() & set(g.coords)):
        return ConditionVerdict(cid, NOT_APPLICABLE, note="scalar curvature is zero or non-constant")
    for basis, coeffs in family_basis(family, k).items():
        combo = linear_combination(list(coeffs.values()), [tensors[nm] for nm in coeffs])
        nz = combo.nonzero()
        if nz:
            return ConditionVerdict(cid, FAILS, witness=nz[0], note=f"basis (L1,L2)={basis} fails")
    return ConditionVerdict(cid, HOLDS, note="both basis instantiations hold")


# -- classification ----------------------------------------------------------

CONDITION_IDS = (
    "ricci_symmetric",
    "cyclic_parallel",
    "codazzi",
    "semisymmetric",
    "second_order_symmetric",
    "pseudosymmetric",
    "ricci_pseudosymmetric",
    "conformally_pseudosymmetric",
    "weyl_pseudosymmetric",
    "RR_eq_QSR",
    "RR_QSR_vs_QgC",
    "conh_squared_zero",
    "quasi_einstein",
    "riemann_compatible_S",
    "weyl_compatible_S",
    "family_v",
    "family_vi",
    "family_vii",
    "family_viii",
    "ricci_generalized_pseudosymmetric",
    "rank_ricci_one",
    "conh_dot_weyl_zero",
    "weyl_dot_conh_pseudosymmetric",
    "riemann_compatible_omega",
    "weyl_compatible_omega",
    "omega_curvature_condition",
    "conharmonic_identities",
)


@dataclass(frozen=True)
class ClassificationReport:
    metric: str
    verdicts: tuple
    invariants: tuple  # (name, value) pairs, values are Expr or str
    seed: int = 42
    points: tuple = field(default=())

    def __getitem__(self, condition: str) -> ConditionVerdict:
        for v in self.verdicts:
            if v.condition == condition:
                return v
        raise KeyError(condition)

    def invariant(self, name: str):
        return dict(self.invariants)[name]


def signature(g: MetricDefinition, point: dict) -> str:
    m = metric_tensor(g).evaluate(point)
    ev = np.sort(np.linalg.eigvalsh(m))
    return "(" + ",".join("-" if x < 0 else "+" for x in ev) + ")"


def _guard(cid: str, fn) -> ConditionVerdict:
    try:
        v = fn()
    except (ValueError, KeyError, ZeroDivisionError, ArithmeticError) as exc:
        return ConditionVerdict(cid, NOT_APPLICABLE, note=f"{type(exc).__name__}: {exc}")
    return v if v.condition == cid else v.renamed(cid)


def classify(g: MetricDefinition, seed: int = 42, points: int = 5) -> ClassificationReport:
    S = lambda: cv.ricci(g)
    qe_holder = {}

    def quasi():
        v = check_quasi_einstein(g, seed, points)
        qe_holder["v"] = v
        return v

    def omega_check(kind: str):
        v = qe_holder.get("v")
        omega = v.get("omega") if v is not None else None
        if omega is None:
            return ConditionVerdict(kind, NOT_APPLICABLE, note="no rank-one covector available")
        if kind == "omega_curvature_condition":
            return check_omega_curvature_condition(g, omega)
        return check_riemann_compatible(g, omega, use_weyl=(kind == "weyl_compatible_omega"))

    checks = {
        "ricci_symmetric": lambda: check_ricci_symmetric(g),
        "cyclic_parallel": lambda: check_cyclic_parallel(g),
        "codazzi": lambda: check_codazzi(g),
        "semisymmetric": lambda: check_semisymmetric(g),
        "second_order_symmetric": lambda: check_second_order_symmetric(g),
        "pseudosymmetric": lambda: check_proportionality(derived(g, "RR"), derived(g, "QgR")),
        "ricci_pseudosymmetric": lambda: check_proportionality(derived(g, "RS"), derived(g, "QgS")),
        "conformally_pseudosymmetric": lambda: check_proportionality(derived(g, "RC"), derived(g, "QgC")),
        "weyl_pseudosymmetric": lambda: check_proportionality(derived(g, "CC"), derived(g, "QgC")),
        "RR_eq_QSR": lambda: check_identity(derived(g, "RR"), derived(g, "QSR")),
        "RR_QSR_vs_QgC": lambda: check_proportionality(
            linear_combination([1, -1], [derived(g, "RR"), derived(g, "QSR")]), derived(g, "QgC")),
        "conh_squared_zero": lambda: check_vanishes(derived(g, "conhconh"), "conh_squared_zero"),
        "quasi_einstein": quasi,
        "riemann_compatible_S": lambda: check_riemann_compatible(g, S()),
        "weyl_compatible_S": lambda: check_riemann_compatible(g, S(), use_weyl=True),
        "family_v": lambda: check_two_parameter_family("v", g),
        "family_vi": lambda: check_two_parameter_family("vi", g),
        "family_vii": lambda: check_two_parameter_family("vii", g),
        "family_viii": lambda: check_two_parameter_family("viii", g),
        "ricci_generalized_pseudosymmetric": lambda: check_proportionality(derived(g, "RR"), derived(g, "QSR")),
        "rank_ricci_one": lambda: check_rank_one_ricci(g),
        "conh_dot_weyl_zero": lambda: check_vanishes(derived(g, "conhC"), "conh_dot_weyl_zero"),
        "weyl_dot_conh_pseudosymmetric": lambda: check_proportionality(derived(g, "Cconh"), derived(g, "QgC")),
        "riemann_compatible_omega": lambda: omega_check("riemann_compatible_omega"),
        "weyl_compatible_omega": lambda: omega_check("weyl_compatible_omega"),
        "omega_curvature_condition": lambda: omega_check("omega_curvature_condition"),
        "conharmonic_identities": lambda: check_conharmonic_identities(g),
    }
    verdicts = tuple(_guard(cid, checks[cid]) for cid in CONDITION_IDS)
    pts = sample_points(g, points, seed)
    invariants = (
        ("kappa", cv.scalar_curvature(g)),
        ("det_g", determinant(g)),
        ("signature", signature(g, pts[0])),
    )
    return ClassificationReport(g.name, verdicts, invariants, seed, tuple(pts))
