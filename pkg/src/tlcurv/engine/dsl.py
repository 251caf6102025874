"""Metric-expression language for user charts.

Grammar (whitespace insensitive)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?          # right associative, binds tighter than unary minus
    atom    := NUMBER | IDENT | FUNC "(" expr ")" | "(" expr ")"

Identifiers are ``x0`` .. ``x9``; functions are sin cos tan sinh cosh tanh exp
log sqrt abs. ``-x0^2`` parses as ``-(x0^2)`` and ``2^-1`` as ``2^(-1)``.

A chart file is JSON::

    {"dim": 2, "metric": [["-1", "0"], ["0", "cosh(x0)^2"]],
     "convex_radius": 1.0, "future_axis": 0, "domain": "1 - x1^2"}

``domain`` is optional; a point is inside when the expression is positive.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from tlcurv.engine.chart import ChartError, MetricChart

FUNCTIONS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs,
}

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()])"
)


class DSLError(ChartError):
    """Parse or evaluation error with a position: ``line``, ``column`` (1-based) and ``token``."""

    def __init__(self, message, line, column, token, source=None):
        where = f"{source}: " if source else ""
        super().__init__(f"{where}line {line}, column {column}: {message} (token {token!r})")
        self.reason, self.line, self.column, self.token = message, line, column, token


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            line, col = _line_col(text, pos)
            raise DSLError("unexpected character", line, col, text[pos])
        if m.lastgroup != "ws":
            out.append(Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    out.append(Token("end", "<end of input>", len(text)))
    return out


def _line_col(text, pos):
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


# AST nodes are tuples: ("num", v) ("var", i) ("neg", a) ("bin", op, a, b) ("call", name, a)


class Parser:
    def __init__(self, text: str, dim: int | None = None):
        self.text = text
        self.dim = dim
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        line, col = _line_col(self.text, tok.pos)
        raise DSLError(message, line, col, tok.text)

    def take(self, text=None):
        tok = self.tok
        if text is not None and tok.text != text:
            self.error(f"expected {text!r}")
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            self.error("unexpected token after expression")
        return node

    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.take().text
            node = ("bin", op, node, self.unary())
        return node

    def unary(self):
        if self.tok.text == "-":
            self.take()
            return ("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.text == "^":
            self.take()
            return ("bin", "^", base, self.unary())
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.take()
            return ("num", float(tok.text))
        if tok.kind == "name":
            self.take()
            if tok.text in FUNCTIONS:
                self.take("(")
                arg = self.expr()
                self.take(")")
                return ("call", tok.text, arg)
            m = re.fullmatch(r"x(\d)", tok.text)
            if not m:
                self.error("unknown identifier", tok)
            idx = int(m[1])
            if self.dim is not None and idx >= self.dim:
                self.error(f"coordinate index out of range for dimension {self.dim}", tok)
            return ("var", idx)
        if tok.text == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        self.error("expected a number, coordinate, function or '('")


def parse(text: str, dim: int | None = None):
    return Parser(text, dim).parse()


def compile_expr(node):
    """Turn an AST into ``f(x)`` evaluating on points ``(..., n)``."""
    kind = node[0]
    if kind == "num":
        v = node[1]
        return lambda x: np.full(x.shape[:-1], v)
    if kind == "var":
        i = node[1]
        return lambda x: x[..., i]
    if kind == "neg":
        a = compile_expr(node[1])
        return lambda x: -a(x)
    if kind == "call":
        fn, a = FUNCTIONS[node[1]], compile_expr(node[2])
        return lambda x: fn(a(x))
    op, a, b = node[1], compile_expr(node[2]), compile_expr(node[3])
    if op == "+":
        return lambda x: a(x) + b(x)
    if op == "-":
        return lambda x: a(x) - b(x)
    if op == "*":
        return lambda x: a(x) * b(x)
    if op == "/":
        return lambda x: a(x) / b(x)
    return lambda x: np.power(a(x), b(x))


def evaluate(text: str, x) -> np.ndarray:
    """Evaluate an expression at points ``x`` (convenience for tests and the REPL)."""
    x = np.asarray(x, dtype=float)
    return compile_expr(parse(text))(x)


def _locate(raw: str, expr: str, start: int) -> tuple[int, int]:
    """File offset of the JSON string literal holding ``expr``, searching from ``start``."""
    needle = json.dumps(expr, ensure_ascii=False)
    pos = raw.find(needle, start)
    if pos < 0:
        needle = json.dumps(expr)
        pos = raw.find(needle, start)
    return (pos + 1, pos + len(needle)) if pos >= 0 else (-1, start)


def _compile_in_file(raw, expr, dim, where, source, cursor):
    offset, cursor = _locate(raw, expr, cursor)
    try:
        return compile_expr(parse(expr, dim)), cursor
    except DSLError as err:
        line, col = err.line, err.column
        if offset >= 0:
            # map the in-expression position onto the file
            line0, col0 = _line_col(raw, offset)
            line, col = line0 + err.line - 1, err.column + (col0 - 1 if err.line == 1 else 0)
        raise DSLError(f"{err.reason} in {where}", line, col, err.token, source) from None


def chart_from_spec(spec: dict, raw: str = "", source: str | None = None) -> MetricChart:
    """Build a chart from a parsed chart-file document."""
    try:
        dim = int(spec["dim"])
        rows = spec["metric"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ChartError(f"{source or 'chart'}: missing or invalid field {exc}") from None
    if dim < 2 or len(rows) != dim or any(len(r) != dim for r in rows):
        raise ChartError(f"{source or 'chart'}: metric must be a {dim}x{dim} array of expressions")
    cursor = 0
    entries = []
    for i, row in enumerate(rows):
        compiled = []
        for j, expr in enumerate(row):
            if not isinstance(expr, str):
                expr = repr(float(expr))
            fn, cursor = _compile_in_file(raw, expr, dim, f"metric[{i}][{j}]", source, cursor)
            compiled.append(fn)
        entries.append(compiled)

    def metric_fn(x):
        return np.stack([np.stack([e(x) for e in row], axis=-1) for row in entries], axis=-2)

    domain_fn = None
    if spec.get("domain") is not None:
        dom, _ = _compile_in_file(raw, spec["domain"], dim, "domain", source, 0)

        def domain_fn(x):
            with np.errstate(invalid="ignore"):
                return dom(x) > 0

    chart = MetricChart(
        name=str(spec.get("name", Path(source).stem if source else "custom")),
        dim=dim,
        metric_fn=metric_fn,
        convex_radius=float(spec.get("convex_radius", 1.0)),
        future_axis=int(spec.get("future_axis", 0)),
        domain_fn=domain_fn,
        center=spec.get("center"),
        params={"source": source},
    )
    probe = chart.center[None, :]
    if not chart.inside(probe).all():
        raise ChartError(f"{source or 'chart'}: the chart center lies outside the domain")
    g = metric_fn(probe)
    if np.max(np.abs(g - np.swapaxes(g, -1, -2))) > 1e-12 * max(1.0, float(np.max(np.abs(g)))):
        raise ChartError(f"{source or 'chart'}: metric is not symmetric")
    return chart


def load_chart_file(path) -> MetricChart:
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ChartError(f"cannot read chart file {path}: {exc}") from None
    try:
        spec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DSLError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno, raw[exc.pos : exc.pos + 1], str(path)) from None
    return chart_from_spec(spec, raw, str(path))
