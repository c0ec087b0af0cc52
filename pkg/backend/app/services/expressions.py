"""Closed-form expressions for coefficients, nonlinearities and noises.

Expressions are parsed with sympy under a whitelist: the declared variables,
``sin``, ``cos``, ``exp``, ``sqrt``, ``tanh``, ``pi`` and numeric literals.
``^`` is accepted as power.
"""

from __future__ import annotations

import logging
from tokenize import TokenError
from typing import Sequence

import numpy as np
import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from ..models.errors import SpecError
from ..models.tree import MultiIndex

logger = logging.getLogger(__name__)

_FUNCTIONS = {
    "sin": sympy.sin,
    "cos": sympy.cos,
    "exp": sympy.exp,
    "sqrt": sympy.sqrt,
    "tanh": sympy.tanh,
    "pi": sympy.pi,
}
_GLOBALS = {
    "__builtins__": {},
    "Integer": sympy.Integer,
    "Float": sympy.Float,
    "Rational": sympy.Rational,
    "Symbol": sympy.Symbol,
}
_TRANSFORMATIONS = standard_transformations + (convert_xor,)

X0, X1 = sympy.symbols("x0 x1", real=True)


def state_symbol(sort: int, derivative: MultiIndex = (0, 0)) -> sympy.Symbol:
    """Abstract variable Z_(sort, derivative): u1, u1_x, u1_xx, u1_t, u1_tx, ..."""
    suffix = "t" * derivative[0] + "x" * derivative[1]
    return sympy.Symbol(f"u{sort}_{suffix}" if suffix else f"u{sort}", real=True)


def parse_state_symbol(symbol: sympy.Symbol) -> tuple[int, MultiIndex] | None:
    """Inverse of :func:`state_symbol`; None for other symbols."""
    name = symbol.name
    if not name.startswith("u"):
        return None
    head, _, suffix = name[1:].partition("_")
    if not head.isdigit() or set(suffix) - {"t", "x"}:
        return None
    return int(head), (suffix.count("t"), suffix.count("x"))


def parse_expression(text: str, variables: Sequence[str]) -> sympy.Expr:
    """Parse ``text`` allowing only the whitelisted names plus ``variables``."""
    local = dict(_FUNCTIONS)
    allowed: dict[str, sympy.Symbol] = {}
    for name in variables:
        parsed = sympy.Symbol(name, real=True)
        allowed[name] = parsed
        local[name] = parsed
    try:
        expression = parse_expr(str(text), local_dict=local, global_dict=dict(_GLOBALS), transformations=_TRANSFORMATIONS)
    except (SyntaxError, TokenError, TypeError, ValueError, AttributeError, NameError) as exc:
        raise SpecError(f"cannot parse expression {text!r}: {exc}") from exc
    if not isinstance(expression, sympy.Expr):
        raise SpecError(f"expression {text!r} is not a scalar formula")
    unknown = {symbol.name for symbol in expression.free_symbols} - set(allowed)
    if unknown:
        raise SpecError(f"expression {text!r} uses unknown names {sorted(unknown)}")
    return expression


def lambdify(expression: sympy.Expr, variables: Sequence[sympy.Symbol]):
    """numpy callable that always returns an array of the broadcast input shape."""
    func = sympy.lambdify(list(variables), expression, modules="numpy")

    def evaluate(*args):
        value = func(*args)
        shape = np.broadcast(*args).shape if args else ()
        return np.broadcast_to(np.asarray(value, dtype=float), shape).copy()

    return evaluate


def sample_on_torus(expression: sympy.Expr, points: np.ndarray) -> np.ndarray:
    """Evaluate an expression of x1 on spatial sample points."""
    return lambdify(expression, [X1])(np.asarray(points, dtype=float))


def sample_on_grid(expression: sympy.Expr, t_points: np.ndarray, x_points: np.ndarray) -> np.ndarray:
    """Evaluate an expression of (x0, x1) on the tensor grid, shape (nt, nx)."""
    t_mesh, x_mesh = np.meshgrid(t_points, x_points, indexing="ij")
    return lambdify(expression, [X0, X1])(t_mesh, x_mesh)
