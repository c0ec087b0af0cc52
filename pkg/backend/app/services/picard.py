"""Picard iteration of the renormalised system and its finite-difference residual.

    (∂₀ − L^i) u_i = Σ_l f^i_l(u) ξ_l + g^i(u, ∂₁u) + counter-terms,

solved on the periodic grid by u ← c + K[H(u)] with the Green operators
of :mod:`green`. Since (∂₀ − L)K f = f − e^{G} f, the equation is met up to
the dropped smooth remainder, which the residual adds back.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np
import sympy

from ..models.equation_spec import EquationSpec
from ..models.errors import NumericalFailure
from ..models.grid import GridFunction, SpacetimeGrid
from .counterterms import CounterTerm, evaluate_terms
from .expressions import X0, X1, lambdify, sample_on_torus, state_symbol
from .green import GreenKernel
from .rules import ParsedComponent, parse_system

logger = logging.getLogger(__name__)

PICARD_ITERATIONS = 5


@dataclass(frozen=True, slots=True)
class PicardResult:
    """Iterates of one Picard run.

    屬性:
        solution: 最後一次迭代 u_N（每個分量一個陣列）
        previous: u_{N−1}，殘差中 e^{G} 項需要它
        increments: 每次迭代的 sup|u_{n+1} − u_n|
        initial: 常數起點 c_i
    """

    solution: tuple[np.ndarray, ...]  # u_N
    previous: tuple[np.ndarray, ...]  # u_{N−1}
    increments: tuple[float, ...]  # 迭代增量
    initial: tuple[float, ...]  # c_i

    def as_dict(self) -> dict[str, Any]:
        return {
            "iterations": len(self.increments),
            "increments": list(self.increments),
            "initial": list(self.initial),
            "sup": [float(np.max(np.abs(values))) for values in self.solution],
        }


class RenormalisedRhs:
    """H_i(u) = Σ_l f^i_l(u) ξ_l + g^i(u, ∂₁u) + counter-terms, on the grid."""

    def __init__(
        self,
        spec: EquationSpec,
        grid: SpacetimeGrid,
        noises: Sequence[GridFunction | np.ndarray],
        terms: Sequence[CounterTerm] = (),
        system: Sequence[ParsedComponent] | None = None,
    ) -> None:
        self.spec = spec
        self.grid = grid
        self.noises = [np.asarray(getattr(noise, "values", noise), dtype=float) for noise in noises]
        self.terms = list(terms)
        self.system = parse_system(spec) if system is None else list(system)
        count = spec.component_count
        self._symbols = [state_symbol(sort) for sort in range(1, count + 1)]
        self._symbols += [state_symbol(sort, (0, 1)) for sort in range(1, count + 1)]
        t_mesh, x_mesh = grid.mesh()
        self._coordinates = {X0: t_mesh, X1: x_mesh}

    def state(self, solution: Sequence[np.ndarray]) -> dict[sympy.Symbol, np.ndarray]:
        values = list(solution) + [self.grid.d_space(component) for component in solution]
        return dict(zip(self._symbols, values))

    def _evaluate(self, expression: sympy.Expr, state: dict[sympy.Symbol, np.ndarray]) -> np.ndarray:
        return lambdify(expression, self._symbols)(*(state[symbol] for symbol in self._symbols))

    def __call__(self, solution: Sequence[np.ndarray], with_counter_terms: bool = True) -> list[np.ndarray]:
        state = self.state(solution)
        result = []
        for component, parsed in enumerate(self.system, start=1):
            total = self._evaluate(parsed.g, state)
            for noise, expression in parsed.f.items():
                total = total + self._evaluate(expression, state) * self.noises[noise - 1]
            if with_counter_terms and self.terms:
                total = total + evaluate_terms(self.terms, component, state, self._coordinates, self.noises)
            result.append(total)
        return result


def picard_solution(
    rhs: RenormalisedRhs,
    greens: Mapping[int, GreenKernel],
    initial: Sequence[float],
    iterations: int = PICARD_ITERATIONS,
) -> PicardResult:
    """u_{n+1} = c + K[H(u_n)] from u_0 = c."""
    grid = rhs.grid
    current = [np.full(grid.shape, float(value)) for value in initial]
    previous = current
    increments = []
    for iteration in range(iterations):
        sources = rhs(current)
        updated = [value + greens[sort].apply(source) for sort, (value, source) in enumerate(zip(initial, sources), start=1)]
        increment = max(float(np.max(np.abs(new - old))) for new, old in zip(updated, current))
        if not np.isfinite(increment):
            raise NumericalFailure(f"Picard iteration diverged at step {iteration + 1}")
        increments.append(increment)
        logger.debug("Picard step %d: increment %.3e", iteration + 1, increment)
        previous, current = current, updated
    logger.info("Picard iteration: %d steps, last increment %.3e", iterations, increments[-1] if increments else 0.0)
    return PicardResult(tuple(current), tuple(previous), tuple(increments), tuple(float(value) for value in initial))


def finite_difference_operator(grid: SpacetimeGrid, coefficients: ParsedComponent, values: np.ndarray) -> np.ndarray:
    """(∂₀ − a∂₁² − b∂₁)u with periodic centred differences."""
    a = sample_on_torus(coefficients.a, grid.x_points)[None, :]
    b = sample_on_torus(coefficients.b, grid.x_points)[None, :]
    d0 = (np.roll(values, -1, axis=0) - np.roll(values, 1, axis=0)) / (2 * grid.dt)
    d1 = (np.roll(values, -1, axis=1) - np.roll(values, 1, axis=1)) / (2 * grid.dx)
    d11 = (np.roll(values, -1, axis=1) - 2 * values + np.roll(values, 1, axis=1)) / grid.dx**2
    return d0 - a * d11 - b * d1


def renormalized_residual(
    rhs: RenormalisedRhs,
    greens: Mapping[int, GreenKernel],
    result: PicardResult,
) -> float:
    """sup|(∂₀ − L)u − H(u) + e^{G}H(u_prev)| over components, by finite differences."""
    sources = rhs(result.solution)
    previous_sources = rhs(result.previous)
    worst = 0.0
    for sort, parsed in enumerate(rhs.system, start=1):
        values = result.solution[sort - 1]
        residual = (
            finite_difference_operator(rhs.grid, parsed, values)
            - sources[sort - 1]
            + greens[sort].remainder(previous_sources[sort - 1])
        )
        worst = max(worst, float(np.max(np.abs(residual))))
    logger.info("renormalised residual %.3e", worst)
    return worst
