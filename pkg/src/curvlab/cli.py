"""Command-line front end: compute, classify, check, table, list."""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import curvature as cv
from . import pseudosym as ps
from .catalog import (
    NAMES,
    MetricFileError,
    UnknownMetric,
    builtin,
    golden_path,
    load_metric,
)
from .exprcore import (
    Expr,
    ExprSyntaxError,
    as_expr,
    cancel,
    cosh,
    exp,
    parse,
    sinh,
    symbol,
    to_text,
)
from .tensorlab import (
    MetricDefinition,
    Tensor,
    kulkarni_nomizu,
    linear_combination,
    metric_tensor,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_INPUT = 3


# -- tensor registry -----------------------------------------------------------

_PRIMARY = {
    # name: (label, builder)
    "metric": ("g", metric_tensor),
    "gamma": ("Gamma", lambda g: cv.christoffel(g).as_tensor()),
    "riemann": ("R", cv.riemann),
    "ricci": ("S", cv.ricci),
    "scalar": ("kappa", cv.scalar_curvature),
    "weyl": ("C", cv.weyl),
    "concircular": ("K", cv.concircular),
    "conharmonic": ("conh", cv.conharmonic),
    "gaussian": ("G", cv.gaussian),
    "ricci_sq": ("S2", cv.ricci_square),
    "nabla_ricci": ("DS", cv.nabla_ricci),
    "nabla_riemann": ("DR", cv.nabla_riemann),
    "nabla2_riemann": ("DDR", cv.nabla2_riemann),
}

_ACTING = ("R", "C", "K", "conh")
_ACTED = ("R", "S", "C", "K", "conh")
DERIVED_NAMES = tuple(a + t for a in _ACTING for t in _ACTED) + tuple(
    "Q" + a + t for a in ("g", "S") for t in ("R", "S", "C", "K", "conh"))

TENSOR_NAMES = tuple(_PRIMARY) + DERIVED_NAMES


def tensor_label(name: str) -> str:
    return _PRIMARY[name][0] if name in _PRIMARY else name


def _name_for_label(label: str) -> str | None:
    for name, (lab, _) in _PRIMARY.items():
        if lab == label:
            return name
    return label if label in DERIVED_NAMES else None


def compute_tensor(g: MetricDefinition, name: str):
    """The named tensor (or scalar ``Expr`` for ``scalar``)."""
    if name in _PRIMARY:
        return _PRIMARY[name][1](g)
    if name in DERIVED_NAMES:
        return ps.derived(g, name)
    raise KeyError(name)


def _index_text(idx) -> str:
    return "".join(f"[{i + 1}]" for i in idx)


def component_lines(label: str, value) -> list:
    if isinstance(value, Expr):
        return [f"{label} = {to_text(value)}"]
    reps = value.representatives()
    if not reps:
        return ["(all components zero)"]
    return [f"{label}{_index_text(i)} = {to_text(v)}" for i, v in reps]


# -- reports -------------------------------------------------------------------


def _text(v) -> str:
    if isinstance(v, Expr):
        return to_text(v)
    return str(v)


def _data_value(v):
    if isinstance(v, (tuple, list)):
        return tuple(_text(x) for x in v)
    return _text(v)


@dataclass(frozen=True)
class ConditionRow:
    id: str
    verdict: str
    factor: str | None = None
    witness: tuple | None = None  # (1-based index tuple, residual text)
    note: str = ""
    data: tuple = ()  # (key, text or tuple of text)


@dataclass(frozen=True)
class ReportDocument:
    tool: str
    version: str
    metric: str
    seed: int
    points: tuple  # tuple of ((name, value text), ...)
    conditions: tuple
    invariants: tuple  # (name, text)

    @classmethod
    def from_report(cls, report: ps.ClassificationReport) -> ReportDocument:
        rows = []
        for v in report.verdicts:
            wit = None
            if v.witness is not None:
                idx, res = v.witness
                wit = (tuple(i + 1 for i in idx), _text(res))
            rows.append(ConditionRow(
                v.condition, v.verdict,
                None if v.factor is None else _text(v.factor),
                wit, v.note,
                tuple((k, _data_value(x)) for k, x in v.data if x is not None),
            ))
        points = tuple(tuple((k, str(Fraction(x))) for k, x in pt.items()) for pt in report.points)
        inv = tuple((k, _text(x)) for k, x in report.invariants)
        return cls("curvlab", __version__, report.metric, report.seed, points, tuple(rows), inv)

    def to_json(self) -> str:
        conds = {}
        for r in self.conditions:
            conds[r.id] = {
                "verdict": r.verdict,
                "factor": r.factor,
                "witness": None if r.witness is None else {"index": list(r.witness[0]), "residual": r.witness[1]},
                "note": r.note,
                "data": {k: (list(x) if isinstance(x, tuple) else x) for k, x in r.data},
            }
        doc = {
            "tool": self.tool,
            "version": self.version,
            "metric": self.metric,
            "seed": self.seed,
            "points": [dict(p) for p in self.points],
            "conditions": conds,
            "invariants": dict(self.invariants),
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> ReportDocument:
        doc = json.loads(text)
        rows = []
        for cid, r in doc["conditions"].items():
            w = r.get("witness")
            rows.append(ConditionRow(
                cid, r["verdict"], r.get("factor"),
                None if w is None else (tuple(w["index"]), w["residual"]),
                r.get("note", ""),
                tuple((k, tuple(x) if isinstance(x, list) else x) for k, x in r.get("data", {}).items()),
            ))
        return cls(
            doc["tool"], doc["version"], doc["metric"], int(doc["seed"]),
            tuple(tuple(p.items()) for p in doc["points"]),
            tuple(rows),
            tuple(doc["invariants"].items()),
        )

    def to_text(self) -> str:
        lines = [f"metric: {self.metric}", f"seed: {self.seed}  points: {len(self.points)}"]
        for k, x in self.invariants:
            lines.append(f"{k}: {x}")
        lines.append("")
        width = max(len(r.id) for r in self.conditions)
        for r in self.conditions:
            detail = ""
            if r.factor is not None:
                detail = f"factor {r.factor}"
            elif r.witness is not None:
                detail = f"witness {''.join(f'[{i}]' for i in r.witness[0])}: {r.witness[1]}"
            extra = ", ".join(
                f"{k}=({', '.join(x)})" if isinstance(x, tuple) else f"{k}={x}" for k, x in r.data)
            parts = [p for p in (detail, extra, r.note) if p]
            lines.append(f"{r.id:<{width}}  {r.verdict:<17}  {'; '.join(parts)}".rstrip())
        return "\n".join(lines)


# -- identity language ---------------------------------------------------------


class DSLError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")
_FUNCS = {"exp": exp, "sinh": sinh, "cosh": cosh}
_TENSOR_ATOMS = ("R", "S", "g", "C", "K", "conh", "G", "S2")


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        num, ident, op = m.groups()
        if num is not None:
            toks.append(("num", num))
        elif ident is not None:
            toks.append(("id", ident))
        else:
            if op not in "+-*/^().~=,":
                raise DSLError(f"unexpected character {op!r} at offset {m.start(3)}")
            toks.append(("op", op))
        pos = m.end()
    toks.append(("end", ""))
    return toks


class _IdentityParser:
    """Recursive descent over scalars and tensors.

    identity := sum '=' sum
    sum      := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := product ('^' unary)?
    product  := atom (('.' | '~') atom)*
    atom     := number | name | func '(' sum ')' | 'Q' '(' sum ',' sum ')' | '(' sum ')'
    """

    def __init__(self, text: str, g: MetricDefinition):
        self.toks = _tokenize(text)
        self.pos = 0
        self.g = g
        self.names = set(g.coords) | set(g.param_names())

    def peek(self, *vals):
        kind, v = self.toks[self.pos]
        return kind == "op" and v in vals

    def expect(self, v: str):
        if not self.peek(v):
            raise DSLError(f"expected {v!r} at token {self.pos + 1}, found {self.toks[self.pos][1]!r}")
        self.pos += 1

    def identity(self):
        lhs = self.sum()
        self.expect("=")
        rhs = self.sum()
        if self.toks[self.pos][0] != "end":
            raise DSLError(f"trailing input at token {self.pos + 1}: {self.toks[self.pos][1]!r}")
        return lhs, rhs

    def sum(self):
        v = self.term()
        while self.peek("+", "-"):
            op = self.toks[self.pos][1]
            self.pos += 1
            w = self.term()
            v = _add(v, w if op == "+" else _neg(w))
        return v

    def term(self):
        v = self.unary()
        while self.peek("*", "/"):
            op = self.toks[self.pos][1]
            self.pos += 1
            w = self.unary()
            v = _mul(v, w) if op == "*" else _div(v, w)
        return v

    def unary(self):
        if self.peek("-"):
            self.pos += 1
            return _neg(self.unary())
        if self.peek("+"):
            self.pos += 1
            return self.unary()
        return self.power()

    def power(self):
        v = self.product()
        if self.peek("^"):
            self.pos += 1
            e = self.unary()
            if not isinstance(v, Expr) or not isinstance(e, Expr) or not e.is_constant():
                raise DSLError("'^' needs a scalar base and a constant exponent")
            c = Fraction(e.constant_value())
            if c.denominator != 1:
                raise DSLError("'^' exponent must be an integer")
            v = v ** int(c)
        return v

    def product(self):
        v = self.atom()
        while self.peek(".", "~"):
            op = self.toks[self.pos][1]
            self.pos += 1
            w = self.atom()
            if not isinstance(v, Tensor) or not isinstance(w, Tensor):
                raise DSLError(f"'{op}' needs tensor operands")
            try:
                v = ps.dot_action(v, w) if op == "." else kulkarni_nomizu(v, w)
            except ValueError as exc:
                raise DSLError(str(exc)) from None
        return v

    def atom(self):
        kind, v = self.toks[self.pos]
        if kind == "num":
            self.pos += 1
            return as_expr(int(v))
        if kind == "op" and v == "(":
            self.pos += 1
            x = self.sum()
            self.expect(")")
            return x
        if kind != "id":
            raise DSLError(f"unexpected {v or 'end of input'!r} at token {self.pos + 1}")
        self.pos += 1
        if v == "Q" and self.peek("("):
            self.pos += 1
            a = self.sum()
            self.expect(",")
            t = self.sum()
            self.expect(")")
            if not isinstance(a, Tensor) or not isinstance(t, Tensor):
                raise DSLError("Q(A,T) needs tensor arguments")
            try:
                return ps.tachibana(a, t)
            except ValueError as exc:
                raise DSLError(str(exc)) from None
        if v in _FUNCS and self.peek("("):
            self.pos += 1
            x = self.sum()
            self.expect(")")
            if not isinstance(x, Expr):
                raise DSLError(f"{v}() needs a scalar argument")
            return _FUNCS[v](x)
        if v == "kappa":
            return cv.scalar_curvature(self.g)
        if v in _TENSOR_ATOMS:
            try:
                return ps.base_tensor(self.g, v)
            except cv.DimensionError as exc:
                raise DSLError(str(exc)) from None
        if v in self.names:
            return symbol(v)
        raise DSLError(f"unknown name {v!r}")


def _is_scalar_zero(v) -> bool:
    return isinstance(v, Expr) and not v.num


def _add(a, b):
    if isinstance(a, Expr) and isinstance(b, Expr):
        return a + b
    if isinstance(a, Tensor) and isinstance(b, Tensor):
        try:
            return linear_combination([1, 1], [a, b])
        except ValueError as exc:
            raise DSLError(str(exc)) from None
    if _is_scalar_zero(a):
        return b
    if _is_scalar_zero(b):
        return a
    raise DSLError("cannot add a scalar and a tensor")


def _neg(a):
    return -a if isinstance(a, Expr) else a.scale(-1)


def _mul(a, b):
    if isinstance(a, Expr) and isinstance(b, Expr):
        return a * b
    if isinstance(a, Expr):
        return b.scale(a)
    if isinstance(b, Expr):
        return a.scale(b)
    raise DSLError("'*' between two tensors; use '.', '~' or Q(A,T)")


def _div(a, b):
    if not isinstance(b, Expr):
        raise DSLError("cannot divide by a tensor")
    if not b.num:
        raise DSLError("division by zero")
    if isinstance(a, Expr):
        return a / b
    return a.scale(as_expr(1) / b)


def check_identity_text(g: MetricDefinition, text: str) -> ps.ConditionVerdict:
    """Evaluate ``lhs = rhs`` written in the identity language."""
    lhs, rhs = _IdentityParser(text, g).identity()
    cond = text.strip()
    if isinstance(lhs, Tensor) and isinstance(rhs, Tensor):
        try:
            return ps.check_identity(lhs, rhs, cond)
        except ValueError as exc:
            raise DSLError(str(exc)) from None
    if isinstance(lhs, Tensor) and _is_scalar_zero(rhs):
        return ps.check_vanishes(lhs, cond)
    if isinstance(rhs, Tensor) and _is_scalar_zero(lhs):
        return ps.check_vanishes(rhs, cond)
    if isinstance(lhs, Expr) and isinstance(rhs, Expr):
        d = cancel(lhs - rhs)
        if d.num:
            return ps.ConditionVerdict(cond, ps.FAILS, witness=((), d))
        return ps.ConditionVerdict(cond, ps.HOLDS)
    raise DSLError("one side is a tensor and the other a nonzero scalar")


# -- golden tables ---------------------------------------------------------------


class GoldenFormatError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class GoldenTable:
    tensor: str
    entries: tuple  # ((0-based index tuple, expression text), ...)
    closure: bool = False
    label: str = ""


_GOLDEN_LINE = re.compile(r"([A-Za-z][A-Za-z0-9_]*)((?:\[\d+\])*)\s*=\s*(.+)$")


def parse_golden(text: str) -> GoldenTable:
    tensor = None
    label = None
    closure = False
    entries = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _GOLDEN_LINE.match(line)
        if m is None:
            key, sep, value = line.partition(":")
            key, value = key.strip(), value.strip()
            if not sep:
                raise GoldenFormatError("expected 'T[i]...[k] = expr' or a 'key: value' header", lineno)
            if key == "tensor":
                if value not in TENSOR_NAMES:
                    raise GoldenFormatError(f"unknown tensor {value!r}", lineno)
                tensor = value
            elif key == "closure":
                if value != "zero":
                    raise GoldenFormatError("closure header must read 'closure: zero'", lineno)
                closure = True
            else:
                raise GoldenFormatError(f"unknown header {key!r}", lineno)
            continue
        lab, idx_text, expr_text = m.groups()
        if label is not None and lab != label:
            raise GoldenFormatError(f"label {lab!r} differs from {label!r}", lineno)
        label = lab
        idx = tuple(int(k) - 1 for k in re.findall(r"\d+", idx_text))
        if any(i < 0 for i in idx):
            raise GoldenFormatError("indices are 1-based", lineno)
        if idx in seen:
            raise GoldenFormatError(f"component {idx_text} listed twice", lineno)
        seen.add(idx)
        try:
            parse(expr_text)
        except (ExprSyntaxError, ZeroDivisionError) as exc:
            raise GoldenFormatError(f"bad expression: {exc}", lineno) from None
        entries.append((idx, expr_text.strip()))
    if label is None:
        raise GoldenFormatError("no components listed", max(1, len(text.splitlines())))
    from_label = _name_for_label(label)
    if tensor is None:
        if from_label is None:
            raise GoldenFormatError(f"cannot infer the tensor from label {label!r}", 1)
        tensor = from_label
    return GoldenTable(tensor, tuple(entries), closure, label)


def compare_golden(g: MetricDefinition, table: GoldenTable) -> list:
    """Per-component diff lines; empty when the table matches."""
    value = compute_tensor(g, table.tensor)
    label = table.label or tensor_label(table.tensor)
    if isinstance(value, Expr):
        diffs = []
        for idx, text in table.entries:
            if idx:
                raise GoldenFormatError(f"{table.tensor} is a scalar; no indices allowed", 1)
            if cancel(value - parse(text)).num:
                diffs.append(f"{label}: expected {text}, got {to_text(value)}")
        return diffs
    rank = value.rank
    for idx, _ in table.entries:
        if len(idx) != rank or any(i >= g.dim for i in idx):
            raise GoldenFormatError(f"index {_index_text(idx)} does not fit a rank-{rank} tensor in dim {g.dim}", 1)
    diffs = []
    expected = {}
    for idx, text in table.entries:
        e = parse(text)
        orbit = value.sym.orbit(idx)
        if any(s == 0 for s in orbit.values()):
            diffs.append(f"{label}{_index_text(idx)}: listed but forced to zero by symmetry")
            continue
        for j, s in orbit.items():
            ej = e if s == 1 else -e
            if j in expected and cancel(expected[j] - ej).num:
                diffs.append(f"{label}{_index_text(idx)}: inconsistent with another listed component")
            expected[j] = ej
        got = value[idx]
        if cancel(got - e).num:
            diffs.append(f"{label}{_index_text(idx)}: expected {text}, got {to_text(got)}")
    if table.closure:
        for idx, v in value.representatives():
            if idx not in expected:
                diffs.append(f"{label}{_index_text(idx)}: expected 0, got {to_text(v)}")
    return diffs


def _golden_source(path: str) -> str:
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8")
    shipped = golden_path(p.name)
    if shipped.is_file():
        return shipped.read_text(encoding="utf-8")
    raise FileNotFoundError(path)


# -- commands --------------------------------------------------------------------


def _err(msg: str):
    print(f"error: {msg}", file=sys.stderr)


def _load(source: str) -> MetricDefinition:
    return load_metric(source)


def cmd_compute(args) -> int:
    if args.tensor not in TENSOR_NAMES:
        _err(f"unknown tensor {args.tensor!r}; choose from {', '.join(TENSOR_NAMES)}")
        return EXIT_USAGE
    g = _load(args.metric)
    try:
        value = compute_tensor(g, args.tensor)
    except cv.DimensionError as exc:
        _err(str(exc))
        return EXIT_USAGE
    label = tensor_label(args.tensor)
    if args.format == "json":
        if isinstance(value, Expr):
            comps = [{"index": [], "value": to_text(value)}]
        else:
            comps = [{"index": [i + 1 for i in idx], "value": to_text(v)} for idx, v in value.representatives()]
        print(json.dumps({"metric": g.name, "tensor": args.tensor, "label": label, "components": comps}, indent=2))
    else:
        print("\n".join(component_lines(label, value)))
    return EXIT_OK


def cmd_classify(args) -> int:
    if args.points < 3:
        _err("--points must be at least 3")
        return EXIT_USAGE
    g = _load(args.metric)
    doc = ReportDocument.from_report(ps.classify(g, seed=args.seed, points=args.points))
    print(doc.to_json() if args.format == "json" else doc.to_text())
    return EXIT_OK


def cmd_check(args) -> int:
    g = _load(args.metric)
    try:
        v = check_identity_text(g, args.identity)
    except DSLError as exc:
        _err(f"identity: {exc}")
        return EXIT_USAGE
    if v.verdict == ps.FAILS:
        idx, res = v.witness
        print(f"fails  witness {_index_text(idx) or '(scalar)'}: {to_text(res)}")
        return EXIT_FAIL
    print("holds" + (f"  ({v.note})" if v.note else ""))
    return EXIT_OK


def cmd_table(args) -> int:
    g = _load(args.metric)
    if args.golden:
        sources = [args.golden]
    else:
        if args.metric not in NAMES or not builtin(args.metric).goldens:
            _err(f"no shipped golden tables for {args.metric!r}; pass --golden")
            return EXIT_USAGE
        sources = list(builtin(args.metric).goldens)
    failed = False
    for src in sources:
        try:
            table = parse_golden(_golden_source(src))
            diffs = compare_golden(g, table)
        except GoldenFormatError as exc:
            _err(f"{src}: {exc}")
            return EXIT_INPUT
        except OSError as exc:
            _err(f"{src}: {exc}")
            return EXIT_INPUT
        except cv.DimensionError as exc:
            _err(f"{src}: {exc}")
            return EXIT_INPUT
        name = Path(src).name
        if diffs:
            failed = True
            print(f"{name}: {len(diffs)} diff(s)")
            for d in diffs:
                print(f"  {d}")
        else:
            extra = ", closure" if table.closure else ""
            print(f"{name}: ok ({len(table.entries)} listed{extra})")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_list(args) -> int:
    print("metrics:")
    for n in NAMES:
        print(f"  {n:<18} {builtin(n).description}")
    print("tensors:")
    for n in TENSOR_NAMES:
        print(f"  {n:<18} {tensor_label(n)}")
    print("conditions:")
    for c in ps.CONDITION_IDS:
        print(f"  {c}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curvlab", description="Symbolic curvature and pseudosymmetry toolkit.")
    p.add_argument("--version", action="version", version=f"curvlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def metric_arg(sp):
        sp.add_argument("--metric", required=True, help=f"built-in name ({', '.join(NAMES)}) or metric file path")

    sp = sub.add_parser("compute", help="print the nonzero components of a tensor",
                        description="Tensors: " + ", ".join(TENSOR_NAMES) + ". "
                        "Names like RC are dot actions R.C; QgC is Q(g,C).")
    metric_arg(sp)
    sp.add_argument("--tensor", required=True)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_compute)

    sp = sub.add_parser("classify", help="run every curvature condition")
    metric_arg(sp)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--points", type=int, default=5)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("check", help="test an identity such as 'R.R = Q(S,R)'",
                        description="Atoms: R S g C K conh G S2 kappa, parameters and coordinates; "
                        "operators: '.' dot action, '~' Kulkarni-Nomizu product, Q(A,T), + - * / ^, =.")
    metric_arg(sp)
    sp.add_argument("identity")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("table", help="compare against a golden component table")
    metric_arg(sp)
    sp.add_argument("--golden", help="golden file; default: every table shipped for the metric")
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("list", help="list metrics, tensors and condition ids")
    sp.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MetricFileError as exc:
        _err(f"metric file: {exc}")
        return EXIT_INPUT
    except UnknownMetric as exc:
        _err(str(exc.args[0]))
        return EXIT_INPUT
    except OSError as exc:
        _err(f"metric: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
