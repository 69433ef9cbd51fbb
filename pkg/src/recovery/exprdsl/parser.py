"""Pratt parser and printer for coefficient expressions in ``x``."""

import math
import re
from dataclasses import dataclass
from typing import List

from recovery.errors import ExprArityError, ExprNameError, ExprSyntaxError
from recovery.exprdsl.models import (
    CONSTANT_NAMES,
    FUNCTION_ARITY,
    BinOp,
    Call,
    Const,
    Expr,
    Neg,
    Num,
    Var,
)

_NUMBER = re.compile(r"[0-9]+\.?[0-9]*(?:[eE][+-]?[0-9]+)?|\.[0-9]+(?:[eE][+-]?[0-9]+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*", re.ASCII)

# left binding powers
_BINARY_POWER = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_POWER = 30


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    offset: int


def _byte_offset(src: str, pos: int) -> int:
    return len(src[:pos].encode("utf-8"))


def tokenize(src: str) -> List[Token]:
    """Split ``src`` into tokens; offsets count UTF-8 bytes."""
    tokens = []
    pos = 0
    while pos < len(src):
        ch = src[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _NUMBER.match(src, pos)
        if m:
            if not math.isfinite(float(m.group(0))):
                raise ExprSyntaxError(_byte_offset(src, pos), "finite numeric literal", src)
            tokens.append(Token("num", m.group(0), _byte_offset(src, pos)))
            pos = m.end()
            continue
        m = _NAME.match(src, pos)
        if m:
            tokens.append(Token("name", m.group(0), _byte_offset(src, pos)))
            pos = m.end()
            continue
        if ch in "+-*/^(),":
            tokens.append(Token("op", ch, _byte_offset(src, pos)))
            pos += 1
            continue
        raise ExprSyntaxError(_byte_offset(src, pos), f"unexpected character '{ch}'", src)
    tokens.append(Token("end", "", _byte_offset(src, len(src))))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = tokenize(src)
        self.index = 0

    @property
    def token(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        tok = self.tokens[self.index]
        if tok.kind != "end":
            self.index += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.token
        if tok.kind != "op" or tok.text != text:
            raise ExprSyntaxError(tok.offset, f"expected '{text}'", self.src)
        return self.advance()

    def binding_power(self, tok: Token) -> int:
        if tok.kind == "op":
            return _BINARY_POWER.get(tok.text, 0)
        return 0

    def expression(self, rbp: int = 0) -> Expr:
        left = self.prefix()
        while rbp < self.binding_power(self.token):
            tok = self.advance()
            if tok.text == "^":
                # right associative; the exponent may carry its own unary minus
                right = self.expression(_BINARY_POWER["^"] - 1)
            else:
                right = self.expression(_BINARY_POWER[tok.text])
            left = BinOp(tok.text, left, right)
        return left

    def prefix(self) -> Expr:
        tok = self.token
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.expression(_UNARY_POWER))
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.expression(0)
            self.expect(")")
            return inner
        if tok.kind == "name":
            self.advance()
            return self.name(tok)
        raise ExprSyntaxError(tok.offset, "expected operand", self.src)

    def name(self, tok: Token) -> Expr:
        is_call = self.token.kind == "op" and self.token.text == "("
        if is_call:
            if tok.text not in FUNCTION_ARITY:
                raise ExprNameError(
                    f"unknown function '{tok.text}' at offset {tok.offset}"
                )
            self.advance()
            args = []
            if not (self.token.kind == "op" and self.token.text == ")"):
                args.append(self.expression(0))
                while self.token.kind == "op" and self.token.text == ",":
                    self.advance()
                    args.append(self.expression(0))
            self.expect(")")
            arity = FUNCTION_ARITY[tok.text]
            if len(args) != arity:
                raise ExprArityError(
                    f"function '{tok.text}' takes {arity} argument(s), "
                    f"got {len(args)} at offset {tok.offset}"
                )
            return Call(tok.text, tuple(args))
        if tok.text == "x":
            return Var()
        if tok.text in CONSTANT_NAMES:
            return Const(tok.text)
        if tok.text in FUNCTION_ARITY:
            raise ExprSyntaxError(self.token.offset, "expected '('", self.src)
        raise ExprNameError(f"unknown identifier '{tok.text}' at offset {tok.offset}")


def parse(src: str) -> Expr:
    """Parse ``src`` into an expression tree.

    Precedence, tightest first: ``^`` (right associative), unary minus,
    ``* /``, ``+ -``. So ``-x^2`` is ``-(x^2)``.
    """
    if not src or not src.strip():
        raise ExprSyntaxError(0, "expected operand", src or "")
    parser = _Parser(src)
    tree = parser.expression(0)
    if parser.token.kind != "end":
        raise ExprSyntaxError(parser.token.offset, "expected operator or end", src)
    return tree


def to_text(expr: Expr) -> str:
    """Fully parenthesized text that parses back to the same tree."""
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Var):
        return "x"
    if isinstance(expr, Const):
        return expr.name
    if isinstance(expr, Neg):
        return f"(-({to_text(expr.operand)}))"
    if isinstance(expr, BinOp):
        return f"({to_text(expr.left)} {expr.op} {to_text(expr.right)})"
    if isinstance(expr, Call):
        inner = ", ".join(to_text(a) for a in expr.args)
        return f"{expr.name}({inner})"
    raise TypeError(f"not an expression node: {expr!r}")
