"""Elementary differentials F_i(τ) and the lifted-Taylor oracle.

For τ = X^k ζ_l ∏_j I_{a_j}(τ_j) with a_j = (𝔱_j, k_j),

    F_i(τ) = ∂^k D_{a_1} ⋯ D_{a_n} F_i^l · ∏_j F_{𝔱_j}(τ_j),   F_i(ζ_l) = F_i^l,

where D_a = ∂/∂Z_a and ∂^k = (∂^{(1,0)})^{k0} (∂^{(0,1)})^{k1} with
∂^e = Σ_a Z_{a+e} D_a. The state variables Z_(s, m) are the sympy symbols
``u{s}``, ``u{s}_x``, ``u{s}_tx`` ...
"""

from __future__ import annotations

import itertools
import logging
import math
from fractions import Fraction
from typing import Sequence

import sympy

from ..models.errors import SpecError
from ..models.lincomb import LinComb
from ..models.tree import UNIT, DecoratedTree, EdgeLabel, MultiIndex, NodeDeco, ZERO, scaled_norm
from . import trees
from .coproduct import lin_product
from .expressions import parse_state_symbol, state_symbol
from .rules import ParsedComponent

logger = logging.getLogger(__name__)


def total_derivative(expression: sympy.Expr, direction: MultiIndex) -> sympy.Expr:
    """∂^e F = Σ_a Z_{a+e} D_a F over the state variables F depends on."""
    result = sympy.Integer(0)
    for symbol in expression.free_symbols:
        decoded = parse_state_symbol(symbol)
        if decoded is None:
            continue
        sort, derivative = decoded
        shifted = (derivative[0] + direction[0], derivative[1] + direction[1])
        result += state_symbol(sort, shifted) * sympy.diff(expression, symbol)
    return result


def shift_operator(expression: sympy.Expr, k: MultiIndex) -> sympy.Expr:
    """∂^k as the iterated total derivative."""
    for _ in range(k[0]):
        expression = total_derivative(expression, (1, 0))
    for _ in range(k[1]):
        expression = total_derivative(expression, (0, 1))
    return expression


class ElementaryDifferentials:
    """F_i(τ) for a parsed system, memoised per (component, tree)."""

    def __init__(self, system: Sequence[ParsedComponent]) -> None:
        self.system = list(system)
        self._cache: dict[tuple[int, DecoratedTree], sympy.Expr] = {}

    def base(self, component: int, noise: int) -> sympy.Expr:
        if not 1 <= component <= len(self.system):
            raise SpecError(f"unknown component {component}")
        return self.system[component - 1].nonlinearity(noise)

    def __call__(self, component: int, tree: DecoratedTree) -> sympy.Expr:
        key = (component, tree)
        if key not in self._cache:
            self._cache[key] = self._compute(component, tree)
        return self._cache[key]

    def _compute(self, component: int, tree: DecoratedTree) -> sympy.Expr:
        expression = self.base(component, tree.root.noise)
        for edge, _ in tree.children:
            if edge.sort > len(self.system):
                raise SpecError(f"unknown edge label {edge}")
            expression = sympy.diff(expression, state_symbol(edge.sort, edge.derivative))
        expression = shift_operator(expression, tree.root.poly)
        for edge, child in tree.children:
            expression *= self(edge.sort, child)
        return sympy.expand(expression)


def elementary_differential(system: Sequence[ParsedComponent], component: int, tree: DecoratedTree) -> sympy.Expr:
    """One-shot F_component(τ)."""
    return ElementaryDifferentials(system)(component, tree)


def _fits(tree: DecoratedTree, max_nodes: int, max_poly: int) -> bool:
    return trees.tree_size(tree) <= max_nodes and all(
        scaled_norm(node.root.poly) <= max_poly for node in trees.iter_subtrees(tree)
    )


def _truncate(value: LinComb, max_nodes: int, max_poly: int) -> LinComb:
    return value.filter(lambda tree: not trees.vanishes(tree) and _fits(tree, max_nodes, max_poly))


def _state_variables(expression: sympy.Expr) -> list[sympy.Symbol]:
    return sorted(
        (symbol for symbol in expression.free_symbols if parse_state_symbol(symbol) is not None),
        key=lambda symbol: symbol.name,
    )


def _lifted_state(
    sort: int, derivative: MultiIndex, solution: LinComb, max_poly: int, max_nodes: int
) -> LinComb:
    """U_(sort, k) − Z_(sort, k)𝟏: the Taylor polynomial plus I_(sort, k)(Φ_sort)."""
    edge = EdgeLabel(sort, derivative)
    lifted = LinComb()
    for m0 in range(max_poly // 2 + 1):
        for m1 in range(max_poly - 2 * m0 + 1):
            if (m0, m1) == ZERO:
                continue
            coefficient = state_symbol(sort, (derivative[0] + m0, derivative[1] + m1)) / (
                math.factorial(m0) * math.factorial(m1)
            )
            lifted.add_term(trees.polynomial((m0, m1)), coefficient)
    for tree, coefficient in solution.terms.items():
        image = trees.planted(edge, tree)
        if not trees.vanishes(image) and trees.tree_size(image) <= max_nodes:
            lifted.add_term(image, coefficient)
    return lifted


def _compose(
    expression: sympy.Expr,
    perturbations: dict[sympy.Symbol, LinComb],
    max_nodes: int,
    max_poly: int,
) -> LinComb:
    """F(z + U′) = Σ_α ∂^α F(z)/α! ∏ (U′_v)^{α_v} as a truncated tree series."""
    variables = [symbol for symbol in _state_variables(expression) if perturbations.get(symbol)]
    result = LinComb.of(UNIT, expression)
    order_cap = max_nodes + max_poly
    powers: dict[tuple[sympy.Symbol, int], LinComb] = {}

    def power(symbol: sympy.Symbol, exponent: int) -> LinComb:
        if exponent == 0:
            return LinComb.of(UNIT)
        key = (symbol, exponent)
        if key not in powers:
            powers[key] = _truncate(lin_product(power(symbol, exponent - 1), perturbations[symbol]), max_nodes, max_poly)
        return powers[key]

    for order in range(1, order_cap + 1):
        for combination in itertools.combinations_with_replacement(variables, order):
            exponents = {symbol: combination.count(symbol) for symbol in set(combination)}
            derivative = expression
            weight = 1
            for symbol, exponent in exponents.items():
                derivative = sympy.diff(derivative, symbol, exponent)
                weight *= math.factorial(exponent)
            if derivative == 0:
                continue
            term = LinComb.of(UNIT, derivative / weight)
            for symbol, exponent in exponents.items():
                term = _truncate(lin_product(term, power(symbol, exponent)), max_nodes, max_poly)
            result = result + term
    return result


def lifted_expansion(
    system: Sequence[ParsedComponent], noise_count: int, max_nodes: int = 4, max_poly: int = 2
) -> dict[int, LinComb]:
    """Picard iteration Φ_𝔱 = Σ_l F_𝔱^l(U) ζ_l on truncated formal tree series.

    The coefficient of τ in Φ_i equals F_i(τ)/S(τ) for every τ the
    truncation keeps intact.
    """
    components = range(1, len(system) + 1)
    solution: dict[int, LinComb] = {component: LinComb() for component in components}
    for iteration in range(max_nodes + 1):
        updated: dict[int, LinComb] = {}
        for component in components:
            data = system[component - 1]
            total = LinComb()
            for noise in range(noise_count + 1):
                expression = data.nonlinearity(noise)
                if expression == 0:
                    continue
                perturbations = {}
                for symbol in _state_variables(expression):
                    sort, derivative = parse_state_symbol(symbol)
                    perturbations[symbol] = _lifted_state(sort, derivative, solution[sort], max_poly, max_nodes)
                series = _compose(expression, perturbations, max_nodes, max_poly)
                for tree, coefficient in series.terms.items():
                    rooted = DecoratedTree(NodeDeco(noise, tree.root.poly), tree.children)
                    if _fits(rooted, max_nodes, max_poly):
                        total.add_term(rooted, sympy.expand(coefficient))
            updated[component] = total
        logger.debug("lifted expansion iteration %d: %s", iteration, {key: len(value) for key, value in updated.items()})
        solution = updated
    return solution


def oracle_coefficient(expansion: dict[int, LinComb], component: int, tree: DecoratedTree) -> sympy.Expr:
    """S(τ) times the coefficient of τ in Φ_component."""
    coefficient = expansion.get(component, LinComb()).coefficient(tree)
    if isinstance(coefficient, Fraction):
        coefficient = sympy.Rational(coefficient.numerator, coefficient.denominator)
    return sympy.expand(coefficient * trees.symmetry_factor(tree))
