"""Component tensors over a coordinate chart.

Tensors are dense numpy object arrays of :class:`~curvlab.exprcore.Expr`.
Only covariant tensors and tensors with a single leading contravariant slot
occur, so the valence is stored as ``upper`` (0, 1 or 2) plus the rank.
Algorithms iterate over the nonzero components, which keeps the dense
storage cheap for the sparse tables produced by the catalog metrics.
"""

from __future__ import annotations

import itertools
import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cache

import numpy as np

from .exprcore import ZERO, Expr, as_expr, cancel, differentiate, eval_numeric, expr_sum

SIGNS = ("positive", "negative", "nonzero", "free")


class ChartMismatch(ValueError):
    pass


class SymmetryViolation(ValueError):
    pass


class DegenerateMetric(ValueError):
    pass


# -- symmetries --------------------------------------------------------------


@dataclass(frozen=True)
class Symmetry:
    """Index symmetry given by involutive slot permutations with signs."""

    name: str
    generators: tuple = ()

    def orbit(self, idx: tuple) -> dict:
        """Map each index in the orbit of ``idx`` to its sign (0 if forced zero)."""
        seen = {idx: 1}
        todo = [idx]
        while todo:
            cur = todo.pop()
            for perm, s in self.generators:
                nxt = tuple(cur[p] for p in perm)
                sign = seen[cur] * s
                if nxt not in seen:
                    seen[nxt] = sign
                    todo.append(nxt)
                elif seen[nxt] != sign:
                    seen[nxt] = 0
        if 0 in seen.values():
            return {k: 0 for k in seen}
        return seen

    def representative(self, idx: tuple) -> tuple:
        return min(self.orbit(idx))


def _swap(rank: int, i: int, j: int) -> tuple:
    p = list(range(rank))
    p[i], p[j] = p[j], p[i]
    return tuple(p)


def _pair_swap(rank: int, start: int = 0) -> tuple:
    p = list(range(rank))
    a, b, c, d = range(start, start + 4)
    p[a], p[b], p[c], p[d] = c, d, a, b
    return tuple(p)


NO_SYMMETRY = Symmetry("none")


def symmetric_pair(rank: int, i: int = 0, j: int = 1) -> Symmetry:
    return Symmetry(f"sym{i}{j}", ((_swap(rank, i, j), 1),))


def riemann_type(rank: int = 4, skew_tail: bool = False) -> Symmetry:
    gens = [(_swap(rank, 0, 1), -1), (_swap(rank, 2, 3), -1), (_pair_swap(rank), 1)]
    name = "riemann"
    if skew_tail:
        gens.append((_swap(rank, rank - 2, rank - 1), -1))
        name = "riemann+skew"
    return Symmetry(name, tuple(gens))


# -- metrics -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MetricDefinition:
    """A coordinate metric with its parameters and domain.

    Hashing is by identity, so per-metric caches stay cheap; catalog
    entries are module-level singletons.
    """

    name: str
    coords: tuple
    components: tuple
    params: tuple = ()
    domain: tuple = ()
    meta: tuple = field(default=())

    def __post_init__(self):
        n = len(self.coords)
        comps = tuple(tuple(as_expr(c) for c in row) for row in self.components)
        if len(comps) != n or any(len(row) != n for row in comps):
            raise ValueError(f"metric {self.name!r}: component table is not {n}x{n}")
        for i in range(n):
            for j in range(i):
                if not (comps[i][j] - comps[j][i]).is_zero():
                    raise ValueError(f"metric {self.name!r}: g[{j + 1}][{i + 1}] != g[{i + 1}][{j + 1}]")
        for name, sign in self.params:
            if sign not in SIGNS:
                raise ValueError(f"unknown sign assumption {sign!r} for {name!r}")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "params", tuple((p, s) for p, s in self.params))
        object.__setattr__(self, "domain", tuple((c, Fraction(v)) for c, v in self.domain))

    @classmethod
    def from_table(cls, name, coords, table: dict, params=(), domain=(), meta=()):
        """Build from ``{(i, j): expr}`` with 0-based indices, upper triangle."""
        n = len(coords)
        rows = [[ZERO] * n for _ in range(n)]
        for (i, j), v in table.items():
            v = as_expr(v)
            rows[i][j] = v
            rows[j][i] = v
        return cls(name, tuple(coords), tuple(tuple(r) for r in rows), params, domain, meta)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def g(self, i: int, j: int) -> Expr:
        return self.components[i][j]

    def meta_value(self, key, default=None):
        for k, v in self.meta:
            if k == key:
                return v
        return default

    def symbols(self) -> frozenset:
        out = set()
        for row in self.components:
            for c in row:
                out |= c.free_symbols()
        return frozenset(out)

    def param_names(self) -> tuple:
        declared = [p for p, _ in self.params]
        extra = sorted(self.symbols() - set(declared) - set(self.coords))
        return tuple(declared + extra)


# -- sampling ----------------------------------------------------------------

_PARAM_VALUES = (Fraction(1, 2), Fraction(1), Fraction(3, 2))


def _draw_param(rng: random.Random, sign: str) -> Fraction:
    v = rng.choice(_PARAM_VALUES)
    if sign == "negative":
        return -v
    if sign in ("nonzero", "free") and rng.random() < 0.5:
        return -v
    return v


def sample_points(metric: MetricDefinition, count: int = 5, seed: int = 42, max_tries: int = 50) -> list:
    """Seeded random rational points inside the metric's domain.

    Coordinates are drawn from (1/4, 2) shifted by any ``coord > c``
    constraint; parameters follow their sign assumptions.  Points where the
    metric is numerically degenerate are redrawn.
    """
    rng = random.Random(seed)
    signs = dict(metric.params)
    lower = dict(metric.domain)
    det = determinant(metric)
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries * count:
            raise DegenerateMetric(f"could not sample {count} admissible points for {metric.name!r}")
        pt = {}
        for c in metric.coords:
            pt[c] = lower.get(c, Fraction(0)) + Fraction(rng.randint(6, 39), 20)
        for p in metric.param_names():
            pt[p] = _draw_param(rng, signs.get(p, "free"))
        try:
            if abs(eval_numeric(det, pt)) < 1e-12:
                continue
        except (ArithmeticError, OverflowError):
            continue
        out.append(pt)
    return out


# -- tensors -----------------------------------------------------------------


def _zeros(n: int, rank: int) -> np.ndarray:
    if rank == 0:
        arr = np.empty((), dtype=object)
        arr[()] = ZERO
        return arr
    return np.full((n,) * rank, ZERO, dtype=object)


class Tensor:
    """Dense component array over the chart of ``metric``.

    ``upper`` counts leading contravariant slots.  A declared ``sym`` is
    verified on construction unless ``check=False``.
    """

    __slots__ = ("_nz", "comps", "metric", "name", "sym", "upper")

    def __init__(self, metric: MetricDefinition, comps: np.ndarray, upper: int = 0,
                 sym: Symmetry = NO_SYMMETRY, name: str = "", check: bool = True):
        self.metric = metric
        self.comps = comps
        self.upper = upper
        self.sym = sym
        self.name = name
        self._nz = None
        if comps.ndim and any(s != metric.dim for s in comps.shape):
            raise ChartMismatch("component array does not match the chart dimension")
        if check and sym.generators:
            self.verify_symmetry()

    @classmethod
    def from_entries(cls, metric, rank: int, entries: dict, upper: int = 0,
                     sym: Symmetry = NO_SYMMETRY, name: str = "", check: bool = True):
        arr = _zeros(metric.dim, rank)
        for idx, v in entries.items():
            if v.num:
                arr[idx] = v
        return cls(metric, arr, upper, sym, name, check)

    @classmethod
    def from_terms(cls, metric, rank: int, terms: dict, upper: int = 0,
                   sym: Symmetry = NO_SYMMETRY, name: str = "", check: bool = True):
        """Sum the term lists of ``{idx: [Expr, ...]}`` into a tensor."""
        entries = {}
        for idx, ts in terms.items():
            v = expr_sum(ts)
            if v.den:
                v = cancel(v)
            if v.num:
                entries[idx] = v
        return cls.from_entries(metric, rank, entries, upper, sym, name, check)

    @classmethod
    def zeros(cls, metric, rank: int, upper: int = 0, name: str = ""):
        return cls(metric, _zeros(metric.dim, rank), upper, NO_SYMMETRY, name, False)

    @property
    def rank(self) -> int:
        return self.comps.ndim

    @property
    def dim(self) -> int:
        return self.metric.dim

    @property
    def valence(self) -> tuple:
        return (self.upper, self.rank - self.upper)

    def __getitem__(self, idx):
        return self.comps[idx]

    def indices(self):
        return itertools.product(range(self.dim), repeat=self.rank)

    def nonzero(self) -> list:
        """Nonzero components as ``(index, Expr)`` in lexicographic order."""
        if self._nz is None:
            if self.rank == 0:
                v = self.comps[()]
                self._nz = [((), v)] if v.num else []
            else:
                flat = self.comps.ravel()
                shape = self.comps.shape
                self._nz = [
                    (tuple(int(i) for i in np.unravel_index(k, shape)), v)
                    for k, v in enumerate(flat) if v.num
                ]
        return self._nz

    def is_zero(self) -> bool:
        return not self.nonzero()

    def verify_symmetry(self):
        for idx, v in self.nonzero():
            for perm, s in self.sym.generators:
                j = tuple(idx[p] for p in perm)
                w = self.comps[j]
                if not (w - v * s).is_zero():
                    raise SymmetryViolation(
                        f"{self.name or 'tensor'}: component {j} violates the declared "
                        f"{self.sym.name} symmetry against {idx}")

    def representatives(self) -> list:
        """Nonzero components whose index is the least in its symmetry orbit."""
        if not self.sym.generators:
            return self.nonzero()
        return [(i, v) for i, v in self.nonzero() if self.sym.representative(i) == i]

    def _check_compatible(self, other: Tensor):
        if other.metric is not self.metric:
            raise ChartMismatch("tensors live on different charts")
        if other.rank != self.rank or other.upper != self.upper:
            raise ChartMismatch(f"shape mismatch: valence {self.valence} vs {other.valence}")

    def _common_sym(self, other: Tensor) -> Symmetry:
        return self.sym if self.sym == other.sym else NO_SYMMETRY

    def __add__(self, other: Tensor) -> Tensor:
        return linear_combination([1, 1], [self, other])

    def __sub__(self, other: Tensor) -> Tensor:
        return linear_combination([1, -1], [self, other])

    def __neg__(self) -> Tensor:
        return self.scale(-1)

    def scale(self, c) -> Tensor:
        c = as_expr(c)
        entries = {i: cancel(v * c) for i, v in self.nonzero()}
        return Tensor.from_entries(self.metric, self.rank, entries, self.upper, self.sym, check=False)

    def __rmul__(self, c) -> Tensor:
        return self.scale(c)

    def map(self, fn) -> Tensor:
        entries = {i: fn(v) for i, v in self.nonzero()}
        return Tensor.from_entries(self.metric, self.rank, entries, self.upper, NO_SYMMETRY, check=False)

    def evaluate(self, point: dict) -> np.ndarray:
        out = np.zeros(self.comps.shape if self.rank else (), dtype=float)
        for idx, v in self.nonzero():
            out[idx] = eval_numeric(v, point)
        return out

    def __repr__(self):
        return f"Tensor({self.name or '?'}, valence={self.valence}, nonzero={len(self.nonzero())})"


def linear_combination(coeffs, tensors) -> Tensor:
    """Componentwise ``sum(c * T)``; all tensors share chart and valence."""
    if len(coeffs) != len(tensors) or not tensors:
        raise ValueError("need one coefficient per tensor")
    first = tensors[0]
    sym = first.sym
    for t in tensors[1:]:
        first._check_compatible(t)
        if t.sym != sym:
            sym = NO_SYMMETRY
    coeffs = [as_expr(c) for c in coeffs]
    terms = defaultdict(list)
    for c, t in zip(coeffs, tensors):
        if not c.num:
            continue
        for idx, v in t.nonzero():
            terms[idx].append(v * c)
    return Tensor.from_terms(first.metric, first.rank, terms, first.upper, sym, check=False)


# -- metric algebra ----------------------------------------------------------


def metric_tensor(g: MetricDefinition) -> Tensor:
    arr = _zeros(g.dim, 2)
    for i in range(g.dim):
        for j in range(g.dim):
            arr[i, j] = g.components[i][j]
    return Tensor(g, arr, 0, symmetric_pair(2), "g")


def _minor_det(g: MetricDefinition, rows: tuple, cols: tuple, memo: dict) -> Expr:
    key = (rows, cols)
    if key in memo:
        return memo[key]
    if len(rows) == 1:
        val = g.components[rows[0]][cols[0]]
    else:
        r0, rest = rows[0], rows[1:]
        terms = []
        for j, c in enumerate(cols):
            a = g.components[r0][c]
            if not a.num:
                continue
            sub = _minor_det(g, rest, cols[:j] + cols[j + 1:], memo)
            if sub.num:
                terms.append(a * sub if j % 2 == 0 else -(a * sub))
        val = expr_sum(terms)
    memo[key] = val
    return val


@cache
def _det_memo(g: MetricDefinition):
    memo: dict = {}
    full = tuple(range(g.dim))
    return cancel(_minor_det(g, full, full, memo)), memo


def determinant(g: MetricDefinition) -> Expr:
    return _det_memo(g)[0]


@cache
def metric_inverse(g: MetricDefinition) -> Tensor:
    """Contravariant metric via cofactors over the determinant."""
    det, memo = _det_memo(g)
    if det.is_zero():
        raise DegenerateMetric(f"metric {g.name!r} is identically degenerate")
    n = g.dim
    inv_det = det.inverse()
    full = tuple(range(n))
    entries = {}
    for i in range(n):
        for j in range(i, n):
            rows = full[:j] + full[j + 1:]
            cols = full[:i] + full[i + 1:]
            if n == 1:
                cof = Expr.const(1)
            else:
                cof = _minor_det(g, rows, cols, memo)
            if (i + j) % 2:
                cof = -cof
            if cof.num:
                v = cancel(cof * inv_det)
                entries[(i, j)] = v
                entries[(j, i)] = v
    return Tensor.from_entries(g, 2, entries, upper=2, sym=symmetric_pair(2), name="g_inv")


def kulkarni_nomizu(A: Tensor, B: Tensor) -> Tensor:
    """``(A^B)_{hijk} = A_hk B_ij + A_ij B_hk - A_hj B_ik - A_ik B_hj``."""
    if A.metric is not B.metric:
        raise ChartMismatch("Kulkarni-Nomizu product of tensors on different charts")
    if A.valence != (0, 2) or B.valence != (0, 2):
        raise ChartMismatch("Kulkarni-Nomizu product needs two (0,2) tensors")
    terms = defaultdict(list)
    a_nz = A.nonzero()
    b_nz = B.nonzero()
    for (p, q_), a in a_nz:
        for (r, s), b in b_nz:
            ab = a * b
            # A(X1,Y) B(X2,X): h=p, k=q, i=r, j=s
            terms[(p, r, s, q_)].append(ab)
            # A(X2,X) B(X1,Y): i=p, j=q, h=r, k=s
            terms[(r, p, q_, s)].append(ab)
            # -A(X1,X) B(X2,Y): h=p, j=q, i=r, k=s
            terms[(p, r, q_, s)].append(-ab)
            # -A(X2,Y) B(X1,X): i=p, k=q, h=r, j=s
            terms[(r, p, s, q_)].append(-ab)
    return Tensor.from_terms(A.metric, 4, terms, 0, riemann_type(4), name="KN")


# -- connection --------------------------------------------------------------


class Christoffels:
    """Second-kind symbols ``Gamma[h, i, j]``, symmetric in ``(i, j)``."""

    def __init__(self, metric: MetricDefinition, comps: np.ndarray):
        self.metric = metric
        self.comps = comps
        n = metric.dim
        for h in range(n):
            for i in range(n):
                for j in range(i):
                    if not (comps[h, i, j] - comps[h, j, i]).is_zero():
                        raise SymmetryViolation(f"Gamma[{h}][{i}][{j}] is not symmetric")
        # upper index -> [(lower i, lower j, value)]
        self.by_upper = defaultdict(list)
        for h, i, j in itertools.product(range(n), repeat=3):
            v = comps[h, i, j]
            if v.num:
                self.by_upper[h].append((i, j, v))

    def __getitem__(self, idx):
        return self.comps[idx]

    def as_tensor(self) -> Tensor:
        return Tensor(self.metric, self.comps, upper=1, sym=symmetric_pair(3, 1, 2), name="Gamma", check=False)

    def nonzero(self) -> list:
        return self.as_tensor().nonzero()


def covariant_derivative(T: Tensor, gamma: Christoffels) -> Tensor:
    """``T_{i1..ik,l}``; the derivative index is appended last."""
    if T.metric is not gamma.metric:
        raise ChartMismatch("connection and tensor live on different charts")
    if T.upper:
        raise ChartMismatch("covariant derivative implemented for (0,k) tensors")
    g = T.metric
    k = T.rank
    terms = defaultdict(list)
    for idx, v in T.nonzero():
        for l, x in enumerate(g.coords):
            d = differentiate(v, x)
            if d.num:
                terms[idx + (l,)].append(d)
        for p in range(k):
            for l, i, gam in gamma.by_upper[idx[p]]:
                tgt = idx[:p] + (i,) + idx[p + 1:] + (l,)
                terms[tgt].append(-(gam * v))
    sym = NO_SYMMETRY
    if T.sym.generators:
        gens = tuple((perm + (k,), s) for perm, s in T.sym.generators)
        sym = Symmetry(T.sym.name, gens)
    name = f"nabla{T.name}" if T.name else ""
    return Tensor.from_terms(g, k + 1, terms, 0, sym, name, check=False)


def raise_first_index(T: Tensor, g_inv: Tensor) -> Tensor:
    """``T^s_{...} = g^{sr} T_{r...}``."""
    if T.metric is not g_inv.metric:
        raise ChartMismatch("raising with the inverse metric of another chart")
    if T.upper:
        raise ChartMismatch("first index is already contravariant")
    terms = defaultdict(list)
    ginv = g_inv.nonzero()
    for idx, v in T.nonzero():
        r = idx[0]
        for (s, r2), w in ginv:
            if r2 == r:
                terms[(s,) + idx[1:]].append(w * v)
    return Tensor.from_terms(T.metric, T.rank, terms, 1, NO_SYMMETRY, check=False)


def lower_first_index(T: Tensor, g: Tensor) -> Tensor:
    """``T_{r...} = g_{rs} T^s_{...}``."""
    if T.metric is not g.metric:
        raise ChartMismatch("lowering with the metric of another chart")
    if T.upper != 1:
        raise ChartMismatch("first index is not contravariant")
    terms = defaultdict(list)
    gnz = g.nonzero()
    for idx, v in T.nonzero():
        s = idx[0]
        for (r, s2), w in gnz:
            if s2 == s:
                terms[(r,) + idx[1:]].append(w * v)
    return Tensor.from_terms(T.metric, T.rank, terms, 0, NO_SYMMETRY, check=False)


def contract_pair(A: Tensor, B: Tensor, g_inv: Tensor) -> Tensor:
    """``A_{ir} g^{rs} B_{sj}`` for two (0,2) tensors."""
    terms = defaultdict(list)
    ginv = defaultdict(list)
    for (r, s), w in g_inv.nonzero():
        ginv[r].append((s, w))
    b_rows = defaultdict(list)
    for (s, j), b in B.nonzero():
        b_rows[s].append((j, b))
    for (i, r), a in A.nonzero():
        for s, w in ginv[r]:
            aw = a * w
            for j, b in b_rows[s]:
                terms[(i, j)].append(aw * b)
    return Tensor.from_terms(A.metric, 2, terms, 0, NO_SYMMETRY, check=False)


def trace(T: Tensor, g_inv: Tensor) -> Expr:
    """``g^{ij} T_{ij}`` for a (0,2) tensor."""
    terms = []
    for (i, j), v in T.nonzero():
        w = g_inv[j, i]
        if w.num:
            terms.append(v * w)
    return cancel(expr_sum(terms))


def outer(u: list, v: list, metric: MetricDefinition) -> Tensor:
    """``u_i v_j`` for two covectors given as lists of Expr."""
    n = metric.dim
    entries = {}
    for i in range(n):
        for j in range(n):
            x = as_expr(u[i]) * as_expr(v[j])
            if x.num:
                entries[(i, j)] = x
    return Tensor.from_entries(metric, 2, entries, 0, NO_SYMMETRY, check=False)
