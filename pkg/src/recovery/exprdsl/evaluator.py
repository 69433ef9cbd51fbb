import math
from typing import Callable

import numpy as np

from recovery.errors import ExprDomainError
from recovery.exprdsl.models import BinOp, Call, Const, Expr, Neg, Num, Var
from recovery.exprdsl.parser import parse, to_text

_CONSTANTS = {"pi": math.pi, "e": math.e}


def _first_bad(mask, x):
    """x value of the first flagged point, for error messages."""
    xs = np.broadcast_to(x, np.shape(mask))
    return float(xs.flat[int(np.argmax(mask))])


def _fault(expr: Expr, mask, x, reason: str):
    if np.any(mask):
        raise ExprDomainError(to_text(expr), _first_bad(mask, x), reason)


def _power(expr: BinOp, base, exponent, x):
    base_b, exp_b = np.broadcast_arrays(base, exponent)
    non_integer = exp_b != np.round(exp_b)
    _fault(expr, (base_b < 0) & non_integer, x, "negative base with non-integer exponent")
    _fault(expr, (base_b == 0) & (exp_b < 0), x, "zero raised to a negative power")
    with np.errstate(over="ignore", invalid="ignore"):
        return np.power(base_b, exp_b)


def _eval(expr: Expr, x):
    if isinstance(expr, Num):
        return np.full(np.shape(x), expr.value)
    if isinstance(expr, Var):
        return x
    if isinstance(expr, Const):
        return np.full(np.shape(x), _CONSTANTS[expr.name])
    if isinstance(expr, Neg):
        return -_eval(expr.operand, x)
    if isinstance(expr, BinOp):
        left = _eval(expr.left, x)
        right = _eval(expr.right, x)
        with np.errstate(over="ignore", invalid="ignore"):
            if expr.op == "+":
                out = left + right
            elif expr.op == "-":
                out = left - right
            elif expr.op == "*":
                out = left * right
            elif expr.op == "/":
                _fault(expr, right == 0, x, "division by zero")
                out = left / right
            else:
                out = _power(expr, left, right, x)
        _fault(expr, ~np.isfinite(out), x, "non-finite result")
        return out
    if isinstance(expr, Call):
        args = [_eval(a, x) for a in expr.args]
        with np.errstate(over="ignore", invalid="ignore"):
            if expr.name == "exp":
                out = np.exp(args[0])
            elif expr.name == "log":
                _fault(expr, args[0] <= 0, x, "log of a non-positive value")
                out = np.log(args[0])
            elif expr.name == "sqrt":
                _fault(expr, args[0] < 0, x, "sqrt of a negative value")
                out = np.sqrt(args[0])
            elif expr.name == "abs":
                out = np.abs(args[0])
            elif expr.name == "pow":
                out = _power(BinOp("^", *expr.args), args[0], args[1], x)
            elif expr.name == "min":
                out = np.minimum(args[0], args[1])
            else:
                out = np.maximum(args[0], args[1])
        _fault(expr, ~np.isfinite(out), x, "non-finite result")
        return out
    raise TypeError(f"not an expression node: {expr!r}")


def evaluate(expr: Expr, x):
    """Evaluate ``expr`` at ``x`` (scalar or array).

    Returns a float for scalar input, an array otherwise. Any domain fault or
    non-finite value raises ExprDomainError.
    """
    scalar = np.ndim(x) == 0
    xs = np.asarray(x, dtype=float)
    out = np.asarray(_eval(expr, xs), dtype=float)
    if scalar:
        return float(out)
    return out


def compile_expr(src_or_expr) -> Callable:
    """Coefficient function for a MarketModel from text or a parsed tree."""
    expr = parse(src_or_expr) if isinstance(src_or_expr, str) else src_or_expr

    def coefficient(x):
        xs = np.asarray(x, dtype=float)
        return np.asarray(_eval(expr, xs), dtype=float)

    coefficient.expr = expr  # type: ignore[attr-defined]
    coefficient.__name__ = to_text(expr)
    return coefficient
