"""Parser and evaluator for analytic field expressions over (t, x, y).

Grammar (EBNF)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := unary ('^' factor)?          # '^' right-associative
    unary  := '-' unary | atom
    atom   := number | 't' | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
    func   := 'sin' | 'cos' | 'exp' | 'tanh'

Unary minus binds tighter than the base of '^', so ``-2^2`` is ``(-2)^2``.
Evaluation is plain double-precision arithmetic and broadcasts over numpy
arrays, which keeps field sampling vectorized.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import EvalError, ParseError

__all__ = ["parse", "evaluate", "pretty", "ExprNode", "compile_expr"]

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "tanh": np.tanh}
_VARIABLES = ("t", "x", "y")
_CONSTANTS = {"pi": np.pi}

_NUMBER_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")

_MAX_DEPTH = 400


@dataclass(frozen=True)
class ExprNode:
    """AST node; `pos` is the source offset, ignored by equality."""

    kind: str  # "num" | "var" | "const" | "neg" | "binop" | "call"
    value: float | str | None = None
    children: tuple["ExprNode", ...] = ()
    pos: int = field(default=0, compare=False)


@dataclass
class _Token:
    kind: str  # "num" | "ident" | "op" | "end"
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            m = _NUMBER_RE.match(source, i)
            if not m or m.group(0) == ".":
                raise ParseError(f"malformed number {source[i:i + 8]!r}", i)
            tokens.append(_Token("num", m.group(0), i))
            i = m.end()
            continue
        m = _IDENT_RE.match(source, i)
        if m:
            tokens.append(_Token("ident", m.group(0), i))
            i = m.end()
            continue
        if ch in "+-*/^()":
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, text: str):
        tok = self.peek()
        if tok.kind == "op" and tok.text == text:
            return self.next()
        raise ParseError(f"expected {text!r}", tok.pos)

    def expr(self, depth: int = 0) -> ExprNode:
        if depth > _MAX_DEPTH:
            raise ParseError("expression too deeply nested", self.peek().pos)
        node = self.term(depth + 1)
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next()
            rhs = self.term(depth + 1)
            node = ExprNode("binop", op.text, (node, rhs), pos=op.pos)
        return node

    def term(self, depth: int) -> ExprNode:
        if depth > _MAX_DEPTH:
            raise ParseError("expression too deeply nested", self.peek().pos)
        node = self.factor(depth + 1)
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.next()
            rhs = self.factor(depth + 1)
            node = ExprNode("binop", op.text, (node, rhs), pos=op.pos)
        return node

    def factor(self, depth: int) -> ExprNode:
        if depth > _MAX_DEPTH:
            raise ParseError("expression too deeply nested", self.peek().pos)
        base = self.unary(depth + 1)
        if self.peek().kind == "op" and self.peek().text == "^":
            op = self.next()
            exponent = self.factor(depth + 1)  # right-associative
            return ExprNode("binop", "^", (base, exponent), pos=op.pos)
        return base

    def unary(self, depth: int) -> ExprNode:
        if depth > _MAX_DEPTH:
            raise ParseError("expression too deeply nested", self.peek().pos)
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.next()
            child = self.unary(depth + 1)
            return ExprNode("neg", None, (child,), pos=tok.pos)
        return self.atom(depth + 1)

    def atom(self, depth: int) -> ExprNode:
        tok = self.next()
        if tok.kind == "num":
            return ExprNode("num", float(tok.text), pos=tok.pos)
        if tok.kind == "ident":
            if tok.text in _VARIABLES:
                return ExprNode("var", tok.text, pos=tok.pos)
            if tok.text in _CONSTANTS:
                return ExprNode("const", tok.text, pos=tok.pos)
            if tok.text in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr(depth + 1)
                self.expect_op(")")
                return ExprNode("call", tok.text, (arg,), pos=tok.pos)
            raise ParseError(f"unknown identifier {tok.text!r}", tok.pos)
        if tok.kind == "op" and tok.text == "(":
            node = self.expr(depth + 1)
            self.expect_op(")")
            return node
        if tok.kind == "end":
            raise ParseError("unexpected end of input", tok.pos)
        raise ParseError(f"unexpected {tok.text!r}", tok.pos)


def parse(source: str) -> ExprNode:
    """Parse an expression, raising position-annotated `ParseError` on bad input."""
    tokens = _tokenize(source)
    parser = _Parser(tokens)
    node = parser.expr()
    trailing = parser.peek()
    if trailing.kind != "end":
        raise ParseError(f"trailing input starting with {trailing.text!r}", trailing.pos)
    return node


def evaluate(node: ExprNode, t=0.0, x=0.0, y=0.0):
    """Evaluate an AST at (t, x, y); scalars in, scalar out; arrays broadcast.

    Division by zero and domain violations (e.g. fractional power of a
    negative base) raise `EvalError` naming the offending node.
    """
    env = {"t": t, "x": x, "y": y}

    def go(n: ExprNode):
        if n.kind == "num":
            return n.value
        if n.kind == "var":
            return env[n.value]
        if n.kind == "const":
            return _CONSTANTS[n.value]
        if n.kind == "neg":
            return -go(n.children[0])
        if n.kind == "call":
            with np.errstate(over="ignore", invalid="ignore"):
                out = _FUNCTIONS[n.value](go(n.children[0]))
            _check_finite(out, n)
            return out
        left = go(n.children[0])
        right = go(n.children[1])
        op = n.value
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if op == "+":
                out = left + right
            elif op == "-":
                out = left - right
            elif op == "*":
                out = left * right
            elif op == "/":
                if np.any(np.asarray(right) == 0):
                    raise EvalError("division by zero in '/'", n.pos)
                out = left / right
            elif op == "^":
                out = np.power(np.asarray(left, dtype=float), right)
            else:  # pragma: no cover - grammar admits no other operator
                raise EvalError(f"unknown operator {op!r}", n.pos)
        _check_finite(out, n)
        return out

    out = go(node)
    if np.ndim(out) == 0:
        return float(out)
    return np.asarray(out, dtype=float)


def _check_finite(value, node: ExprNode):
    if not np.all(np.isfinite(value)):
        label = node.value if node.kind == "call" else f"operator {node.value!r}"
        raise EvalError(f"non-finite result from {label}", node.pos)


def compile_expr(source: str):
    """Parse once and return a vectorized callable f(t, x, y)."""
    node = parse(source)

    def f(t=0.0, x=0.0, y=0.0):
        return evaluate(node, t, x, y)

    return f


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def pretty(node: ExprNode) -> str:
    """Render an AST back to source that reparses to an equal AST."""

    def go(n: ExprNode, parent_prec: int, is_right: bool) -> str:
        if n.kind == "num":
            v = n.value
            text = repr(v) if v != int(v) else str(int(v))
            return text
        if n.kind in ("var", "const"):
            return str(n.value)
        if n.kind == "call":
            return f"{n.value}({go(n.children[0], 0, False)})"
        if n.kind == "neg":
            inner = go(n.children[0], 4, False)
            text = f"-{inner}"
            # unary minus sits below '*'/'/' but is a valid '^' base
            return f"({text})" if parent_prec > 1 and parent_prec != 3 else text
        prec = _PRECEDENCE[n.value]
        assoc_right = n.value == "^"
        left = go(n.children[0], prec if not assoc_right else prec + 1, False)
        right = go(n.children[1], prec + 1 if not assoc_right else prec, True)
        text = f"{left} {n.value} {right}" if n.value != "^" else f"{left}^{right}"
        needs = prec < parent_prec or (prec == parent_prec and is_right and not assoc_right)
        return f"({text})" if needs else text

    return go(node, 0, False)
