"""Counter-terms of the renormalised system.

For a strong preparation map R fixing T_X and every I_{(𝔱,0)}(T), the
renormalised equation for component i reads

    (∂₀ − L^i) u_i = Σ_l F_i(R(·)*ζ_l)(u, ∂₁u) ξ_l,   ξ₀ ≡ 1,

so the counter-terms are F_i((R* − Id)ζ_l) ξ_l. The coefficients of
(R* − Id)ζ_l already carry the 1/S(τ) factor, so no further division
happens here; for R_ℓ this is Σ_{τ∈B⁻} ℓ(·,τ) F_i(τ)/S(τ).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import numpy as np
import sympy

from ..models.basis import Basis
from ..models.equation_spec import EquationSpec
from ..models.errors import HypothesisViolation
from ..models.lincomb import LinComb
from ..models.tree import DecoratedTree
from . import trees
from .elementary import ElementaryDifferentials
from .expressions import X0, X1, state_symbol
from .preparation import CUSTOM, PreparationMap, check_strong, require_hypotheses
from .rules import ParsedComponent, parse_system

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class CounterTerm:
    """One term c(x)·F_i(τ)·ξ_l of the renormalised right-hand side.

    屬性:
        component: 方程分量 i
        noise: 噪聲索引 l（0 代表 ξ₀ ≡ 1）
        tree: 展開中的樹 τ
        coefficient: (R* − Id)ζ_l 中 τ 的係數（已含 1/S(τ)）
        function: F_i(τ)
    """

    component: int  # 分量
    noise: int  # 噪聲
    tree: DecoratedTree  # τ
    coefficient: Any  # 係數
    function: sympy.Expr  # F_i(τ)

    @property
    def symmetry_factor(self) -> int:
        return trees.symmetry_factor(self.tree)

    def coefficient_expr(self) -> sympy.Expr:
        value = self.coefficient
        if isinstance(value, Fraction):
            return sympy.Rational(value.numerator, value.denominator)
        if isinstance(value, np.ndarray):
            return sympy.Symbol(f"c_{{{self.tree.to_text()}}}")
        return sympy.sympify(value)

    def as_dict(self) -> dict[str, Any]:
        value = self.coefficient
        if isinstance(value, np.ndarray):
            coefficient: Any = {"mean": float(np.mean(value)), "min": float(np.min(value)), "max": float(np.max(value))}
        else:
            coefficient = str(value)
        return {
            "tree": self.tree.to_text(),
            "symmetryFactor": self.symmetry_factor,
            "component": self.component,
            "noise": self.noise,
            "coefficient": coefficient,
            "function": str(self.function),
        }


def dual_correction(prep: PreparationMap, noise: int) -> LinComb:
    """(R* − Id)ζ_l."""
    seed = trees.noise(noise)
    return prep.apply_dual(seed) - LinComb.of(seed)


def counter_terms(
    spec: EquationSpec,
    prep: PreparationMap,
    basis: Basis,
    system: Sequence[ParsedComponent] | None = None,
    points: Sequence[Any] = (),
) -> list[CounterTerm]:
    """All counter-terms, per component and noise, in basis order."""
    warnings = require_hypotheses(prep, basis, points)
    for warning in warnings:
        logger.warning(warning)
    if prep.provenance == CUSTOM:
        strong = check_strong(prep, basis, basis.cutoff, points)
        if not strong.passed:
            raise HypothesisViolation(f"preparation map is not strong: {strong.witness}")

    system = parse_system(spec) if system is None else list(system)
    differentials = ElementaryDifferentials(system)
    order = {tree: index for index, tree in enumerate(basis)}
    results: list[CounterTerm] = []
    for noise in range(spec.noise_count + 1):
        correction = dual_correction(prep, noise)
        for component in range(1, spec.component_count + 1):
            for tree, coefficient in sorted(correction, key=lambda item: (order.get(item[0], len(order)), item[0].key)):
                function = differentials(component, tree)
                if function == 0:
                    continue
                results.append(CounterTerm(component, noise, tree, coefficient, function))
    logger.info("%d counter-terms for %s (%s map)", len(results), spec.name, prep.provenance)
    return results


def _noise_symbol(noise: int) -> sympy.Symbol:
    return sympy.Symbol(f"xi_{noise}")


def renormalised_rhs(spec: EquationSpec, terms: Sequence[CounterTerm], component: int) -> sympy.Expr:
    """Σ_l f_l ξ_l + g + counter-terms of one component as a sympy expression."""
    data = parse_system(spec)[component - 1]
    expression = data.g + sum((data.f[noise] * _noise_symbol(noise) for noise in data.f), sympy.Integer(0))
    for term in terms:
        if term.component != component:
            continue
        factor = 1 if term.noise == 0 else _noise_symbol(term.noise)
        expression += term.coefficient_expr() * term.function * factor
    return expression


def render_latex(spec: EquationSpec, terms: Sequence[CounterTerm]) -> str:
    """One display line per component: (∂₀ − L^i)u_i = renormalised right-hand side."""
    lines = []
    for component in range(1, spec.component_count + 1):
        data = parse_system(spec)[component - 1]
        operator = sympy.latex(data.a) + r"\partial_{x_1}^2"
        if data.b != 0:
            operator += " + " + sympy.latex(data.b) + r"\partial_{x_1}"
        rhs = sympy.latex(renormalised_rhs(spec, terms, component))
        lines.append(rf"(\partial_{{x_0}} - ({operator})) {sympy.latex(state_symbol(component))} = {rhs}")
    return " \\\\\n".join(lines)


def terms_as_json(terms: Sequence[CounterTerm]) -> list[dict[str, Any]]:
    return [term.as_dict() for term in terms]


def evaluate_terms(
    terms: Sequence[CounterTerm],
    component: int,
    state: dict[sympy.Symbol, np.ndarray],
    coordinates: dict[sympy.Symbol, np.ndarray],
    noises: Sequence[np.ndarray] = (),
) -> np.ndarray:
    """Σ_τ c(x) F_i(τ)(u, ∂₁u) ξ_l on the grid for one component.

    ``coordinates`` maps X0 and X1 to mesh arrays of the grid shape. Terms of
    noise l > 0 are only summed when ``noises`` carries ξ_l.
    """
    shape = np.broadcast(*coordinates.values()).shape
    total = np.zeros(shape)
    for term in terms:
        if term.component != component or term.noise > len(noises):
            continue
        symbols = sorted(term.function.free_symbols, key=lambda symbol: symbol.name)
        func = sympy.lambdify(symbols, term.function, modules="numpy")
        values = func(*(state[symbol] for symbol in symbols)) if symbols else float(term.function)
        coefficient = term.coefficient
        if isinstance(coefficient, Fraction):
            coefficient = float(coefficient)
        elif isinstance(coefficient, sympy.Expr):
            coefficient = sympy.lambdify([X0, X1], coefficient, modules="numpy")(coordinates[X0], coordinates[X1])
        contribution = np.asarray(coefficient, dtype=float) * np.asarray(values, dtype=float)
        if term.noise:
            contribution = contribution * np.asarray(noises[term.noise - 1], dtype=float)
        total = total + contribution
    return total
