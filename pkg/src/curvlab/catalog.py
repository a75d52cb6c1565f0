"""Built-in metrics, product and family constructors, metric files."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cache
from importlib import resources

from . import curvature as cv
from .exprcore import (
    ZERO,
    ExprSyntaxError,
    as_expr,
    cancel,
    differentiate,
    eval_numeric,
    parse,
    to_text,
)
from .pseudosym import (
    CONDITION_IDS,
    FAILS,
    HOLDS,
    HOLDS_WITH_FACTOR,
    NOT_APPLICABLE,
    ConditionVerdict,
    check_identity,
)
from .tensorlab import (
    SIGNS,
    MetricDefinition,
    Tensor,
    kulkarni_nomizu,
    linear_combination,
    riemann_type,
    sample_points,
)

NAMES = ("godel", "ex21i", "ex21ii", "som_raychaudhuri", "minkowski", "const_curv")


@dataclass(frozen=True)
class CatalogEntry:
    metric: MetricDefinition
    manifest: tuple  # (condition id, expected verdict)
    goldens: tuple = ()  # golden file names shipped with the package
    description: str = ""

    def __post_init__(self):
        for cid, verdict in self.manifest:
            if cid not in CONDITION_IDS:
                raise ValueError(f"manifest refers to unknown condition {cid!r}")


class UnknownMetric(KeyError):
    pass


# -- constructors --------------------------------------------------------------


def godel_metric() -> MetricDefinition:
    return MetricDefinition.from_table(
        "godel",
        ("x1", "x2", "x3", "x4"),
        {
            (0, 0): parse("-a^2"),
            (1, 1): parse("a^2/2*exp(2*x1)"),
            (1, 3): parse("a^2*exp(x1)"),
            (2, 2): parse("-a^2"),
            (3, 3): parse("a^2"),
        },
        params=(("a", "positive"),),
    )


def godel_base() -> MetricDefinition:
    """The (x1, x2, x4) block of the Godel metric."""
    g = _BUILTIN_METRICS()["godel"]
    keep = (0, 1, 3)
    comps = tuple(tuple(g.components[i][j] for j in keep) for i in keep)
    return MetricDefinition("godel_base", ("x1", "x2", "x4"), comps, g.params)


def warped_line_metric(dim: int, eps="eps") -> MetricDefinition:
    """``eps dx1^2 + x1 (dx2^2 + ... + dxn^2)`` on ``x^i > 0``."""
    coords = tuple(f"x{i + 1}" for i in range(dim))
    e = as_expr(eps)
    table = {(0, 0): e}
    for i in range(1, dim):
        table[(i, i)] = parse("x1")
    params = (("eps", "nonzero"),) if "eps" in e.free_symbols() else ()
    name = {4: "ex21i", 5: "ex21ii"}.get(dim, f"warped{dim}")
    if not params:
        name = f"{name}[eps={to_text(e)}]"
    return MetricDefinition.from_table(
        name, coords, table, params=params, domain=tuple((c, 0) for c in coords))


def godel_family(H, D, name: str = "godel_family", params=None) -> MetricDefinition:
    """``(dt + H dphi)^2 - D^2 dphi^2 - dr^2 - dz^2`` on ``t > 0, r > 0``."""
    H = as_expr(H)
    D = as_expr(D)
    if not D.num:
        raise ValueError("D must not vanish identically")
    coords = ("t", "r", "phi", "z")
    for f, label in ((H, "H"), (D, "D")):
        extra = f.free_symbols() & {"t", "phi", "z"}
        if extra:
            raise ValueError(f"{label} may depend on r only, found {sorted(extra)}")
    if params is None:
        syms = sorted((H.free_symbols() | D.free_symbols()) - set(coords))
        params = tuple((s, "positive") for s in syms)
    table = {
        (0, 0): as_expr(1),
        (0, 2): H,
        (2, 2): cancel(H * H - D * D),
        (1, 1): as_expr(-1),
        (3, 3): as_expr(-1),
    }
    return MetricDefinition.from_table(
        name, coords, table, params=params, domain=(("t", 0), ("r", 0)),
        meta=(("H", H), ("D", D), ("radial", "r")))


def product_with_line(base: MetricDefinition, epsilon, coord: str = "z",
                      position: int | None = None, name: str | None = None) -> MetricDefinition:
    """Block metric ``base (+) epsilon dcoord^2``; the line is inserted at ``position``."""
    eps = as_expr(epsilon)
    if not eps.num:
        raise ValueError("epsilon must be nonzero")
    if eps.free_symbols() & set(base.coords):
        raise ValueError("epsilon must be constant")
    if coord in base.coords:
        raise ValueError(f"coordinate {coord!r} already used by the base")
    n = base.dim
    pos = n if position is None else position
    if not 0 <= pos <= n:
        raise ValueError("line position out of range")
    coords = base.coords[:pos] + (coord,) + base.coords[pos:]
    old = [i for i in range(n + 1) if i != pos]
    rows = [[ZERO] * (n + 1) for _ in range(n + 1)]
    for a, i in enumerate(old):
        for b, j in enumerate(old):
            rows[i][j] = base.components[a][b]
    rows[pos][pos] = eps
    params = list(base.params)
    declared = {p for p, _ in params}
    for s in sorted(eps.free_symbols() - declared):
        params.append((s, "nonzero"))
    return MetricDefinition(
        name or f"{base.name}_x_line", coords, tuple(tuple(r) for r in rows), tuple(params), base.domain,
        meta=(("base", base), ("line_index", pos), ("line_factor", eps)))


def const_curv_metric() -> MetricDefinition:
    """De Sitter in flat slicing, ``-dt^2 + exp(2t)(dx^2 + dy^2 + dz^2)``."""
    return MetricDefinition.from_table(
        "const_curv", ("t", "x", "y", "z"),
        {(0, 0): as_expr(-1), (1, 1): parse("exp(2*t)"), (2, 2): parse("exp(2*t)"), (3, 3): parse("exp(2*t)")})


def minkowski_metric() -> MetricDefinition:
    return MetricDefinition.from_table(
        "minkowski", ("t", "x", "y", "z"),
        {(0, 0): as_expr(-1), (1, 1): as_expr(1), (2, 2): as_expr(1), (3, 3): as_expr(1)})


def som_raychaudhuri_metric() -> MetricDefinition:
    a = parse("a")
    r = parse("r")
    return godel_family(a * r * r, r, name="som_raychaudhuri", params=(("a", "nonzero"),))


def godel_form_family() -> MetricDefinition:
    """The family member with hyperbolic H and D that is Godel in disguise."""
    H = parse("2*sqrt2/m*sinh(m*r/2)^2")
    D = parse("2/m*sinh(m*r/2)*cosh(m*r/2)")
    return godel_family(H, D, name="godel_cylindrical", params=(("m", "positive"),))


@cache
def _BUILTIN_METRICS() -> dict:
    return {
        "godel": godel_metric(),
        "ex21i": warped_line_metric(4),
        "ex21ii": warped_line_metric(5),
        "som_raychaudhuri": som_raychaudhuri_metric(),
        "minkowski": minkowski_metric(),
        "const_curv": const_curv_metric(),
    }


_MANIFESTS = {
    "godel": (
        ("ricci_symmetric", FAILS),
        ("cyclic_parallel", HOLDS),
        ("codazzi", FAILS),
        ("semisymmetric", FAILS),
        ("second_order_symmetric", FAILS),
        ("pseudosymmetric", FAILS),
        ("ricci_pseudosymmetric", FAILS),
        ("conformally_pseudosymmetric", FAILS),
        ("weyl_pseudosymmetric", HOLDS_WITH_FACTOR),
        ("RR_eq_QSR", HOLDS),
        ("conh_squared_zero", HOLDS),
        ("quasi_einstein", HOLDS),
        ("riemann_compatible_S", HOLDS),
        ("family_v", HOLDS),
        ("family_vi", HOLDS),
        ("family_vii", HOLDS),
        ("family_viii", HOLDS),
        ("rank_ricci_one", HOLDS),
        ("conh_dot_weyl_zero", HOLDS),
        ("weyl_dot_conh_pseudosymmetric", HOLDS_WITH_FACTOR),
        ("riemann_compatible_omega", HOLDS),
        ("weyl_compatible_omega", HOLDS),
        ("omega_curvature_condition", FAILS),
        ("conharmonic_identities", HOLDS),
    ),
    "ex21i": (
        ("cyclic_parallel", FAILS),
        ("codazzi", HOLDS),
        ("semisymmetric", FAILS),
        ("pseudosymmetric", HOLDS_WITH_FACTOR),
        ("RR_eq_QSR", HOLDS),
        ("quasi_einstein", HOLDS),
        ("conharmonic_identities", HOLDS),
    ),
    "ex21ii": (
        ("cyclic_parallel", FAILS),
        ("codazzi", FAILS),
        ("pseudosymmetric", HOLDS_WITH_FACTOR),
        ("RR_eq_QSR", HOLDS),
        ("quasi_einstein", HOLDS),
        ("conharmonic_identities", HOLDS),
    ),
    "som_raychaudhuri": (
        ("RR_eq_QSR", HOLDS),
        ("conharmonic_identities", HOLDS),
    ),
    "minkowski": tuple(
        (cid, HOLDS) for cid in (
            "ricci_symmetric", "cyclic_parallel", "codazzi", "semisymmetric", "second_order_symmetric",
            "pseudosymmetric", "ricci_pseudosymmetric", "conformally_pseudosymmetric",
            "weyl_pseudosymmetric", "RR_eq_QSR", "RR_QSR_vs_QgC", "conh_squared_zero", "quasi_einstein",
            "riemann_compatible_S", "weyl_compatible_S", "family_v", "family_vi", "family_vii",
            "family_viii", "conharmonic_identities")
    ),
    "const_curv": (
        ("ricci_symmetric", HOLDS),
        ("cyclic_parallel", HOLDS),
        ("codazzi", HOLDS),
        ("quasi_einstein", HOLDS),
        ("conharmonic_identities", HOLDS),
    ),
}

_GOLDENS = {
    "godel": ("godel_gamma.txt", "godel_riemann.txt", "godel_ricci.txt", "godel_scalar.txt",
              "godel_nabla_riemann.txt", "godel_nabla_ricci.txt", "godel_weyl.txt", "godel_RR.txt",
              "godel_QSR.txt", "godel_CC.txt", "godel_QgC.txt"),
}

_DESCRIPTIONS = {
    "godel": "Godel rotating dust metric, parameter a > 0",
    "ex21i": "eps dx1^2 + x1 (dx2^2 + dx3^2 + dx4^2) on x^i > 0",
    "ex21ii": "eps dx1^2 + x1 (dx2^2 + ... + dx5^2) on x^i > 0",
    "som_raychaudhuri": "(dt + a r^2 dphi)^2 - r^2 dphi^2 - dr^2 - dz^2 on t, r > 0",
    "minkowski": "flat diag(-1, 1, 1, 1)",
    "const_curv": "de Sitter, -dt^2 + exp(2t)(dx^2 + dy^2 + dz^2)",
}


def builtin(name: str) -> CatalogEntry:
    metrics = _BUILTIN_METRICS()
    if name not in metrics:
        raise UnknownMetric(f"unknown metric {name!r}; choose from {', '.join(NAMES)}")
    return _entry(name)


@cache
def _entry(name: str) -> CatalogEntry:
    return CatalogEntry(_BUILTIN_METRICS()[name], _MANIFESTS[name], _GOLDENS.get(name, ()),
                        _DESCRIPTIONS[name])


def golden_path(filename: str):
    return resources.files("curvlab") / "data" / "golden" / filename


# -- product Weyl formulas -----------------------------------------------------


def product_weyl_expected(base: MetricDefinition, product: MetricDefinition) -> Tensor:
    """Weyl tensor of ``base x line`` predicted from the base Ricci data."""
    pos = product.meta_value("line_index")
    eps = product.meta_value("line_factor")
    if pos is None or eps is None:
        raise ValueError("product was not built by product_with_line")
    n = product.dim
    if base.dim != n - 1:
        raise ValueError("base dimension must be one less than the product")
    if base.dim >= 4 and not cv.weyl(base).is_zero():
        raise ValueError("base is not conformally flat")
    if n < 4:
        raise ValueError("product dimension must be at least 4")
    gb = base.components
    Sb = cv.ricci(base)
    kb = cv.scalar_curvature(base)
    m = base.dim
    A = [[cancel(Sb[a, b] - kb * gb[a][b] / (n - 1)) for b in range(m)] for a in range(m)]
    emb = [i for i in range(n) if i != pos]
    entries = {}
    c1 = as_expr(1) / ((n - 3) * (n - 2))
    for a in range(m):
        for b in range(m):
            for c in range(m):
                for d in range(m):
                    v = (gb[a][d] * A[b][c] - gb[a][c] * A[b][d] + gb[b][c] * A[a][d] - gb[b][d] * A[a][c])
                    if v.num:
                        v = cancel(c1 * v)
                        if v.num:
                            entries[(emb[a], emb[b], emb[c], emb[d])] = v
    sym = riemann_type(4)
    c2 = -eps / (n - 2)
    for b in range(m):
        for c in range(m):
            v = cancel(c2 * A[b][c])
            if not v.num:
                continue
            for idx, s in sym.orbit((pos, emb[b], emb[c], pos)).items():
                entries[idx] = v * s
    return Tensor.from_entries(product, 4, entries, 0, sym, "C_expected")


def check_product_weyl_formulas(base: MetricDefinition, product: MetricDefinition) -> ConditionVerdict:
    try:
        expected = product_weyl_expected(base, product)
    except ValueError as exc:
        return ConditionVerdict("product_weyl_formulas", NOT_APPLICABLE, note=str(exc))
    return check_identity(cv.weyl(product), expected, "product_weyl_formulas")


# -- phi decomposition ---------------------------------------------------------


def phi_functions(g: MetricDefinition) -> dict:
    """``tau`` and the three coefficient functions from ``H``, ``D`` and their r-derivatives."""
    H = g.meta_value("H")
    D = g.meta_value("D")
    r = g.meta_value("radial", "r")
    if H is None or D is None:
        raise ValueError("metric was not built by godel_family")
    H1 = differentiate(H, r)
    H2 = differentiate(H1, r)
    D1 = differentiate(D, r)
    D2 = differentiate(D1, r)
    tau = cancel((H1 ** 2 - 2 * D * D2)
                 * (D ** 2 * H2 ** 2 - 2 * D * D1 * H1 * H2 - H1 ** 4 + 2 * D * D2 * H1 ** 2 + D1 ** 2 * H1 ** 2))
    out = {"tau": tau}
    if not tau.num:
        return out
    inv = tau.inverse()
    out["phi1"] = cancel(D ** 2 * inv * (2 * D ** 2 * H2 ** 2 - 4 * D * D1 * H1 * H2 - 3 * H1 ** 4
                                          + 8 * D * D2 * H1 ** 2 + 2 * D1 ** 2 * H1 ** 2 - 8 * D ** 2 * D2 ** 2))
    out["phi2"] = cancel(2 * D ** 4 * inv * (H1 ** 2 - 4 * D * D2))
    out["phi3"] = cancel(-4 * D ** 6 * inv)
    return out


def check_phi_decomposition(g: MetricDefinition, seed: int = 42, samples: int = 5) -> ConditionVerdict:
    cid = "phi_decomposition"
    phi = phi_functions(g)
    tau = phi["tau"]
    if not tau.num:
        return ConditionVerdict(cid, NOT_APPLICABLE, note="tau vanishes identically")
    for p in sample_points(g, samples, seed):
        if abs(eval_numeric(tau, p)) < 1e-12:
            return ConditionVerdict(cid, NOT_APPLICABLE, note="tau vanishes at a sample point")
    S = cv.ricci(g)
    S2 = cv.ricci_square(g)
    rhs = linear_combination(
        [phi["phi1"], phi["phi2"], phi["phi3"]],
        [kulkarni_nomizu(S, S), kulkarni_nomizu(S, S2), kulkarni_nomizu(S2, S2)],
    )
    return check_identity(cv.riemann(g), rhs, cid)


# -- metric files --------------------------------------------------------------


class MetricFileError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


_G_KEY = re.compile(r"g\s+(\d+)\s+(\d+)$")
_DOMAIN = re.compile(r"([A-Za-z][A-Za-z0-9_]*)\s*>\s*(-?\d+(?:/\d+)?)$")
_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*$")


def parse_metric_file(text: str) -> MetricDefinition:
    """Read the line-oriented ``key: value`` metric format.

    Blank lines and lines starting with ``#`` are skipped.
    """
    name = None
    dim = None
    coords = None
    params = []
    domain = []
    comps = {}
    comp_lines = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise MetricFileError("expected 'key: value'", lineno)
        key, value = (s.strip() for s in line.split(":", 1))
        if key == "name":
            if not value:
                raise MetricFileError("empty name", lineno)
            name = value
        elif key == "dim":
            try:
                dim = int(value)
            except ValueError:
                raise MetricFileError(f"dimension {value!r} is not an integer", lineno) from None
            if dim < 2:
                raise MetricFileError("dimension must be at least 2", lineno)
        elif key == "coords":
            coords = tuple(value.split())
            if not coords or not all(_IDENT.match(c) for c in coords) or len(set(coords)) != len(coords):
                raise MetricFileError("coords must be distinct identifiers", lineno)
        elif key == "param":
            parts = value.split()
            if len(parts) != 2 or not _IDENT.match(parts[0]) or parts[1] not in SIGNS:
                raise MetricFileError(f"param expects 'name sign' with sign in {SIGNS}", lineno)
            params.append((parts[0], parts[1]))
        elif key == "domain":
            m = _DOMAIN.match(value)
            if not m:
                raise MetricFileError("domain expects '<coord> > <rational>'", lineno)
            domain.append((m.group(1), Fraction(m.group(2)), lineno))
        elif _G_KEY.match(key):
            m = _G_KEY.match(key)
            i, j = int(m.group(1)), int(m.group(2))
            try:
                e = parse(value)
            except ExprSyntaxError as exc:
                raise MetricFileError(f"bad expression: {exc}", lineno) from None
            except ZeroDivisionError:
                raise MetricFileError("division by zero in expression", lineno) from None
            k = (min(i, j), max(i, j))
            if k in comps:
                raise MetricFileError(f"component g {k[0]} {k[1]} given twice", lineno)
            comps[k] = e
            comp_lines[k] = lineno
        else:
            raise MetricFileError(f"unknown key {key!r}", lineno)
    last = len(text.splitlines()) or 1
    if coords is None:
        raise MetricFileError("missing coords", last)
    if dim is None:
        dim = len(coords)
    if dim != len(coords):
        raise MetricFileError(f"dim {dim} does not match {len(coords)} coords", last)
    for (i, j), ln in comp_lines.items():
        if not (1 <= i <= dim and 1 <= j <= dim):
            raise MetricFileError(f"index g {i} {j} out of range 1..{dim}", ln)
    for c, _, ln in domain:
        if c not in coords:
            raise MetricFileError(f"domain refers to unknown coordinate {c!r}", ln)
    for p, _ in params:
        if p in coords:
            raise MetricFileError(f"parameter {p!r} clashes with a coordinate", last)
    table = {(i - 1, j - 1): e for (i, j), e in comps.items()}
    try:
        return MetricDefinition.from_table(
            name or "metric", coords, table, params=tuple(params),
            domain=tuple((c, v) for c, v, _ in domain))
    except ValueError as exc:
        raise MetricFileError(str(exc), last) from None


def write_metric_file(g: MetricDefinition) -> str:
    lines = [f"name: {g.name}", f"dim: {g.dim}", "coords: " + " ".join(g.coords)]
    for p, s in g.params:
        lines.append(f"param: {p} {s}")
    for c, v in g.domain:
        lines.append(f"domain: {c} > {v}")
    for i in range(g.dim):
        for j in range(i, g.dim):
            e = g.components[i][j]
            if e.num:
                lines.append(f"g {i + 1} {j + 1}: {to_text(e)}")
    return "\n".join(lines) + "\n"


def load_metric(source: str) -> MetricDefinition:
    """A built-in name or a path to a metric file."""
    if source in _BUILTIN_METRICS():
        return _BUILTIN_METRICS()[source]
    with open(source, encoding="utf-8") as fh:
        return parse_metric_file(fh.read())
