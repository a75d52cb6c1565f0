"""Curvature tensors of a coordinate metric.

Conventions: ``R(X1,X2,X3,X4) = g(Rop(X1,X2)X3, X4)`` with
``Rop(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``, ``S_ij = g^{hk} R_hijk`` and
``kappa = g^{ij} S_ij``.  Every builder is cached per metric object.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from functools import cache

from .exprcore import Expr, as_expr, cancel, differentiate, expr_sum
from .tensorlab import (
    Christoffels,
    MetricDefinition,
    Tensor,
    _zeros,
    contract_pair,
    covariant_derivative,
    kulkarni_nomizu,
    linear_combination,
    metric_inverse,
    metric_tensor,
    riemann_type,
    symmetric_pair,
    trace,
)


class DimensionError(ValueError):
    pass


@cache
def christoffel(g: MetricDefinition) -> Christoffels:
    n = g.dim
    ginv = metric_inverse(g)
    dg = {}
    for i, j in itertools.product(range(n), repeat=2):
        if j < i:
            continue
        c = g.components[i][j]
        for k, x in enumerate(g.coords):
            d = differentiate(c, x)
            if d.num:
                dg[(i, j, k)] = d
                dg[(j, i, k)] = d

    def dgv(i, j, k):
        return dg.get((i, j, k))

    first = {}
    for l in range(n):
        for i in range(n):
            for j in range(i, n):
                ts = [t for t in (dgv(l, j, i), dgv(i, l, j)) if t is not None]
                t3 = dgv(i, j, l)
                if t3 is not None:
                    ts.append(-t3)
                if ts:
                    v = expr_sum(ts) * as_expr(1) / 2
                    if v.num:
                        first[(l, i, j)] = v
    inv_rows = defaultdict(list)
    for (h, l), w in ginv.nonzero():
        inv_rows[h].append((l, w))
    arr = _zeros(n, 3)
    for h in range(n):
        for i in range(n):
            for j in range(i, n):
                ts = [w * first[(l, i, j)] for l, w in inv_rows[h] if (l, i, j) in first]
                if ts:
                    v = cancel(expr_sum(ts))
                    arr[h, i, j] = v
                    arr[h, j, i] = v
    return Christoffels(g, arr)


@cache
def curvature_operator(g: MetricDefinition) -> Tensor:
    """``Rop[l, h, i, j]``: the l-th component of ``Rop(d_h, d_i) d_j``."""
    n = g.dim
    gam = christoffel(g)
    G = gam.comps
    terms = defaultdict(list)
    for l, i, j in itertools.product(range(n), repeat=3):
        v = G[l, i, j]
        if not v.num:
            continue
        for h, x in enumerate(g.coords):
            d = differentiate(v, x)
            if d.num:
                terms[(l, h, i, j)].append(d)
                terms[(l, i, h, j)].append(-d)
    # Gamma^l_hm Gamma^m_ij - Gamma^l_im Gamma^m_hj
    for l in range(n):
        for h, m, v1 in gam.by_upper[l]:
            for i, j, v2 in gam.by_upper[m]:
                p = v1 * v2
                terms[(l, h, i, j)].append(p)
                terms[(l, i, h, j)].append(-p)
    return Tensor.from_terms(g, 4, terms, upper=1, name="Rop", check=False)


@cache
def riemann(g: MetricDefinition) -> Tensor:
    op = curvature_operator(g)
    terms = defaultdict(list)
    g_rows = defaultdict(list)
    for i in range(g.dim):
        for k in range(g.dim):
            c = g.components[i][k]
            if c.num:
                g_rows[i].append((k, c))
    for (l, h, i, j), v in op.nonzero():
        for k, c in g_rows[l]:
            terms[(h, i, j, k)].append(c * v)
    return Tensor.from_terms(g, 4, terms, 0, riemann_type(4), "R")


@cache
def ricci(g: MetricDefinition) -> Tensor:
    ginv = metric_inverse(g)
    terms = defaultdict(list)
    for (h, i, j, k), v in riemann(g).nonzero():
        w = ginv[h, k]
        if w.num:
            terms[(i, j)].append(w * v)
    return Tensor.from_terms(g, 2, terms, 0, symmetric_pair(2), "S")


@cache
def scalar_curvature(g: MetricDefinition) -> Expr:
    return trace(ricci(g), metric_inverse(g))


@cache
def gaussian(g: MetricDefinition) -> Tensor:
    """``G(X1,X2,X3,X4) = g((X1 ^_g X2) X3, X4)`` from the endomorphism."""
    n = g.dim
    terms = defaultdict(list)
    for h, i, j, k in itertools.product(range(n), repeat=4):
        a = g.components[i][j]
        b = g.components[h][k]
        c = g.components[h][j]
        d = g.components[i][k]
        if a.num and b.num:
            terms[(h, i, j, k)].append(a * b)
        if c.num and d.num:
            terms[(h, i, j, k)].append(-(c * d))
    return Tensor.from_terms(g, 4, terms, 0, riemann_type(4), "G")


def _require_dim(g: MetricDefinition, lo: int, what: str):
    if g.dim < lo:
        raise DimensionError(f"{what} needs dimension >= {lo}, got {g.dim}")


@cache
def g_wedge_S(g: MetricDefinition) -> Tensor:
    return kulkarni_nomizu(metric_tensor(g), ricci(g))


@cache
def weyl(g: MetricDefinition) -> Tensor:
    _require_dim(g, 4, "the Weyl tensor")
    n = g.dim
    kappa = scalar_curvature(g)
    t = linear_combination(
        [1, as_expr(-1) / (n - 2), kappa / ((n - 2) * (n - 1))],
        [riemann(g), g_wedge_S(g), gaussian(g)],
    )
    return Tensor(g, t.comps, 0, riemann_type(4), "C")


@cache
def concircular(g: MetricDefinition) -> Tensor:
    _require_dim(g, 3, "the concircular tensor")
    n = g.dim
    kappa = scalar_curvature(g)
    t = linear_combination([1, -kappa / (n * (n - 1))], [riemann(g), gaussian(g)])
    return Tensor(g, t.comps, 0, riemann_type(4), "K")


@cache
def conharmonic(g: MetricDefinition) -> Tensor:
    _require_dim(g, 4, "the conharmonic tensor")
    n = g.dim
    t = linear_combination([1, as_expr(-1) / (n - 2)], [riemann(g), g_wedge_S(g)])
    return Tensor(g, t.comps, 0, riemann_type(4), "conh")


@cache
def ricci_square(g: MetricDefinition) -> Tensor:
    S = ricci(g)
    t = contract_pair(S, S, metric_inverse(g))
    return Tensor(g, t.comps, 0, symmetric_pair(2), "S2")


@cache
def nabla_ricci(g: MetricDefinition) -> Tensor:
    return covariant_derivative(ricci(g), christoffel(g))


@cache
def nabla_riemann(g: MetricDefinition) -> Tensor:
    return covariant_derivative(riemann(g), christoffel(g))


@cache
def nabla2_riemann(g: MetricDefinition) -> Tensor:
    return covariant_derivative(nabla_riemann(g), christoffel(g))
