"""Recursive-descent parser for scalar expressions.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' int)?
    base   := rational | ident | '(' expr ')'
            | ('exp'|'sinh'|'cosh') '(' expr ')' | '-' factor

Exponents are integer literals, optionally signed or parenthesised.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import expr as E

FUNCTIONS = ("exp", "sinh", "cosh")

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


@dataclass(frozen=True)
class Node:
    op: str
    args: tuple = ()

    def __str__(self):
        if self.op == "num":
            return str(self.args[0])
        if self.op == "sym":
            return self.args[0]
        if self.op in FUNCTIONS:
            return f"{self.op}({self.args[0]})"
        if self.op == "neg":
            return f"(-{self.args[0]})"
        if self.op == "pow":
            return f"({self.args[0]})^{self.args[1]}"
        sep = {"add": " + ", "sub": " - ", "mul": "*", "div": "/"}[self.op]
        return "(" + sep.join(str(a) for a in self.args) + ")"


def _tokenize(text: str):
    pos = 0
    out = []
    raw = text.encode("utf-8")
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            off = len(text[:pos].encode("utf-8"))
            # report the first non-space byte
            while off < len(raw) and raw[off:off + 1].isspace():
                off += 1
            raise ExprSyntaxError(f"unexpected character {text[pos:].strip()[0]!r}", off, text)
        kind = m.lastgroup
        start = len(text[: m.start(kind)].encode("utf-8"))
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(raw)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, off = self.take()
        if v != value:
            got = "end of input" if kind == "end" else repr(v)
            raise ExprSyntaxError(f"expected {value!r}, got {got}", off, self.text)

    def error(self, message: str):
        raise ExprSyntaxError(message, self.peek()[2], self.text)

    def parse(self) -> Node:
        node = self.expr()
        kind, v, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {v!r}", off, self.text)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = Node("add" if op == "+" else "sub", (node, rhs))
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.factor()
            node = Node("mul" if op == "*" else "div", (node, rhs))
        return node

    def factor(self) -> Node:
        node = self.base()
        if self.peek()[1] == "^":
            self.take()
            node = Node("pow", (node, self.exponent()))
        return node

    def exponent(self) -> int:
        kind, v, off = self.peek()
        sign = 1
        paren = False
        if v == "(":
            self.take()
            paren = True
            kind, v, off = self.peek()
        if v in ("-", "+"):
            self.take()
            sign = -1 if v == "-" else 1
            kind, v, off = self.peek()
        if kind != "num" or "." in v:
            raise ExprSyntaxError("non-integer exponent", off, self.text)
        self.take()
        if paren:
            self.expect(")")
        return sign * int(v)

    def base(self) -> Node:
        kind, v, _off = self.peek()
        if kind == "num":
            self.take()
            return Node("num", (Fraction(v),))
        if kind == "ident":
            self.take()
            if v in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Node(v, (arg,))
            return Node("sym", (v,))
        if v == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        if v == "-":
            self.take()
            return Node("neg", (self.factor(),))
        if kind == "end":
            self.error("unexpected end of input")
        self.error(f"unexpected {v!r}")


def parse_expr(text: str) -> Node:
    """Parse ``text`` into a :class:`Node` tree."""
    return _Parser(text).parse()


def build(node: Node) -> E.Expr:
    """Canonical :class:`~curvlab.exprcore.expr.Expr` of a parse tree."""
    op, args = node.op, node.args
    if op == "num":
        return E.Expr.const(args[0])
    if op == "sym":
        return E.symbol(args[0])
    if op == "neg":
        return -build(args[0])
    if op == "pow":
        return build(args[0]) ** args[1]
    if op in FUNCTIONS:
        return getattr(E, op)(build(args[0]))
    a, b = build(args[0]), build(args[1])
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    return a / b
