"""Grid evaluation of the renormalised model (Π^R, g^R) for smooth noise.

Π̂^R is multiplicative with Π̂^R(X^k ζ_l) = y^k ξ_l and
Π̂^R(I_aτ) = D^aK * Π^Rτ, while Π^Rτ(y) = Π̂^R(R(y)τ)(y). Recentering uses
the standard basis of T⁺:

    (g_x)^{-1}(I⁺_aτ) = −Σ_{|m|_s < deg(I_aτ)} ((−x)^m/m!) (D^{a+m}K * Π_xτ)(x),
    Π_xτ = (Π ⊗ (g_x)^{-1})Δτ.

Planted polynomials vanish in the algebra, so Π̂(I_a X^k) is taken to be
zero as well.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from math import comb
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from ..models.errors import HypothesisViolation, SpecError
from ..models.grid import GridFunction, PolyField, SpacetimeGrid
from ..models.lincomb import LinComb
from ..models.report import CheckResult
from ..models.tree import UNIT, ZERO, DecoratedTree, DegreeAssignment, EdgeLabel, MultiIndex, NodeDeco, scaled_norm
from . import trees
from .coproduct import antipode_plus, coproduct, coproduct_plus, multi_indices_below
from .green import GreenKernel
from .preparation import PreparationMap, identity

logger = logging.getLogger(__name__)

GridIndex = tuple[int, int]


def _as_float(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return np.asarray(value, dtype=float)
    return float(value)


def _generator_tree(poly: MultiIndex = ZERO, children: tuple = ()) -> DecoratedTree:
    return DecoratedTree(NodeDeco(0, poly), children)


class ModelPair:
    """(Π^R, g^R) on a periodic grid, memoised per tree.

    屬性:
        grid: 時空格點
        noises: ξ_1..ξ_n0
        greens: 方程分量 → Green 核
        prep: 準備映射 R
    """

    def __init__(
        self,
        grid: SpacetimeGrid,
        noises: Sequence[GridFunction | np.ndarray],
        greens: Mapping[int, GreenKernel],
        prep: PreparationMap,
    ) -> None:
        self.grid = grid
        self.noises = [np.asarray(getattr(noise, "values", noise), dtype=float) for noise in noises]
        self.greens = dict(greens)
        self.prep = prep
        self.assignment: DegreeAssignment = prep.assignment
        if len(self.noises) < self.assignment.noise_count:
            raise SpecError(f"{self.assignment.noise_count} noises required, {len(self.noises)} given")
        for noise in self.noises:
            if noise.shape != grid.shape:
                raise SpecError(f"noise shape {noise.shape} does not match the grid {grid.shape}")
        self._pi: dict[DecoratedTree, PolyField] = {}
        self._pi_hat: dict[DecoratedTree, PolyField] = {}
        self._conv: dict[tuple[EdgeLabel, DecoratedTree], PolyField] = {}
        self._diag: dict[tuple[EdgeLabel, DecoratedTree], np.ndarray] = {}
        self._g_inverse: dict[DecoratedTree, np.ndarray] = {}
        self._g_inverse_at: dict[tuple[DecoratedTree, GridIndex, tuple[float, float]], float] = {}

    # Global model

    def _green(self, edge: EdgeLabel) -> GreenKernel:
        if edge.sort not in self.greens:
            raise SpecError(f"no Green kernel for sort {edge.sort}")
        return self.greens[edge.sort]

    def degree(self, tree: DecoratedTree) -> Fraction:
        return trees.degree(tree, self.assignment)

    def pi(self, tree: DecoratedTree) -> PolyField:
        """Π^Rτ = Σ_i λ_i(y) Π̂^R τ_i for R(y)τ = Σ_i λ_i(y) τ_i."""
        if tree not in self._pi:
            total = PolyField(self.grid)
            for image, coefficient in self.prep.apply(tree):
                total = total + self.pi_hat(image).scale(_as_float(coefficient))
            self._pi[tree] = total
        return self._pi[tree]

    def pi_hat(self, tree: DecoratedTree) -> PolyField:
        if tree not in self._pi_hat:
            if trees.vanishes(tree):
                self._pi_hat[tree] = PolyField(self.grid)
                return self._pi_hat[tree]
            field = PolyField.monomial(self.grid, tree.root.poly)
            if tree.root.noise:
                field = field.scale(self.noises[tree.root.noise - 1])
            for edge, child in tree.children:
                field = field * self.conv(edge, child)
            self._pi_hat[tree] = field
        return self._pi_hat[tree]

    def conv(self, edge: EdgeLabel, tree: DecoratedTree) -> PolyField:
        """D^aK * Π^Rτ."""
        key = (edge, tree)
        if key not in self._conv:
            if trees.is_polynomial(tree):
                self._conv[key] = PolyField(self.grid)
            else:
                self._conv[key] = self._green(edge).convolve(self.pi(tree), edge.derivative)
        return self._conv[key]

    # Recentering

    def diagonal_convolution(self, edge: EdgeLabel, tree: DecoratedTree) -> np.ndarray:
        """x ↦ (D^aK * Π_xτ)(x) = Σ_{Δτ} c (g_x)^{-1}(τ″)(D^aK * Πτ′)(x)."""
        key = (edge, tree)
        if key not in self._diag:
            total = np.zeros(self.grid.shape)
            for left, right, coefficient in coproduct(tree, self.assignment):
                if trees.is_polynomial(left):
                    continue
                total = total + float(coefficient) * self.g_inverse(right) * self.conv(edge, left).evaluate()
            self._diag[key] = total
        return self._diag[key]

    def g_inverse(self, tree: DecoratedTree) -> np.ndarray:
        """(g_x)^{-1} on a T⁺ tree, multiplicative over its root factorisation, as an array over x."""
        if tree not in self._g_inverse:
            t_mesh, x_mesh = self.grid.mesh()
            k = tree.root.poly
            value = (-t_mesh) ** k[0] * (-x_mesh) ** k[1]
            for edge, child in tree.children:
                value = value * self._g_inverse_generator(edge, child, t_mesh, x_mesh)
            self._g_inverse[tree] = value
        return self._g_inverse[tree]

    def _g_inverse_generator(self, edge: EdgeLabel, child: DecoratedTree, t_mesh: np.ndarray, x_mesh: np.ndarray) -> np.ndarray:
        bound = self.degree(trees.planted(edge, child))
        total = np.zeros(self.grid.shape)
        for m in multi_indices_below(bound):
            weight = (-t_mesh) ** m[0] * (-x_mesh) ** m[1] / trees.poly_factorial(m)
            total = total + weight * self.diagonal_convolution(edge.shifted(m), child)
        return -total

    def g_inverse_at(self, tree: DecoratedTree, index: GridIndex, coords: tuple[float, float]) -> float:
        """(g_p)^{-1}τ for the point p = ``coords`` lying over the grid point ``index``.

        Π is a function on the line with polynomial parts, so base points in a
        different period give different recentering constants.
        """
        key = (tree, index, coords)
        if key not in self._g_inverse_at:
            k = tree.root.poly
            value = (-coords[0]) ** k[0] * (-coords[1]) ** k[1]
            for edge, child in tree.children:
                bound = self.degree(trees.planted(edge, child))
                generator = 0.0
                for m in multi_indices_below(bound):
                    weight = (-coords[0]) ** m[0] * (-coords[1]) ** m[1] / trees.poly_factorial(m)
                    generator += weight * self._diagonal_at(edge.shifted(m), child, index, coords)
                value *= -generator
            self._g_inverse_at[key] = float(value)
        return self._g_inverse_at[key]

    def _diagonal_at(self, edge: EdgeLabel, tree: DecoratedTree, index: GridIndex, coords: tuple[float, float]) -> float:
        total = 0.0
        for left, right, coefficient in coproduct(tree, self.assignment):
            if trees.is_polynomial(left):
                continue
            inverse = self.g_inverse_at(right, index, coords)
            if inverse:
                total += float(coefficient) * inverse * self.conv(edge, left).value_at(index, coords)
        return total

    def g(self, tree: DecoratedTree) -> np.ndarray:
        """g_x = (g_x)^{-1} ∘ S⁺."""
        total = np.zeros(self.grid.shape)
        for image, coefficient in antipode_plus(tree, self.assignment):
            total = total + float(coefficient) * self.g_inverse(image)
        return total

    def recentered(self, tree: DecoratedTree, x: GridIndex) -> np.ndarray:
        """y ↦ (Π_xτ)(y) on the grid."""
        total = np.zeros(self.grid.shape)
        for left, right, coefficient in coproduct(tree, self.assignment):
            scalar = float(coefficient) * float(self.g_inverse(right)[x])
            if scalar:
                total = total + scalar * self.pi(left).evaluate(x)
        return total

    def recentered_direct(self, tree: DecoratedTree, x: GridIndex) -> np.ndarray:
        """Π_x^Rτ by the Taylor-subtracted recursion with |k|_s ≤ deg(I_aτ)."""
        cache: dict[DecoratedTree, PolyField] = {}
        return self._direct(tree, x, cache).evaluate(x)

    def _direct(self, tree: DecoratedTree, x: GridIndex, cache: dict[DecoratedTree, PolyField]) -> PolyField:
        if tree not in cache:
            total = PolyField(self.grid)
            for image, coefficient in self.prep.apply(tree):
                total = total + self._direct_hat(image, x, cache).scale(_as_float(coefficient))
            cache[tree] = total
        return cache[tree]

    def _direct_hat(self, tree: DecoratedTree, x: GridIndex, cache: dict[DecoratedTree, PolyField]) -> PolyField:
        centre = self.grid.point(x)
        if trees.vanishes(tree):
            return PolyField(self.grid)
        field = PolyField.centred_monomial(self.grid, tree.root.poly, centre)
        if tree.root.noise:
            field = field.scale(self.noises[tree.root.noise - 1])
        for edge, child in tree.children:
            inner = self._direct(child, x, cache)
            green = self._green(edge)
            planted = green.convolve(inner, edge.derivative)
            bound = self.degree(trees.planted(edge, child))
            k0 = 0
            while 2 * k0 <= bound:
                k1 = 0
                while 2 * k0 + k1 <= bound:
                    value = green.convolve(inner, (edge.derivative[0] + k0, edge.derivative[1] + k1)).value_at(x)
                    factor = value / trees.poly_factorial((k0, k1))
                    planted = planted - PolyField.centred_monomial(self.grid, (k0, k1), centre).scale(factor)
                    k1 += 1
                k0 += 1
            field = field * planted
        return field

    # Reexpansion

    def g_yx(self, tree: DecoratedTree, y: GridIndex, x: GridIndex) -> float:
        """g_yx = (g_x ⊗ (g_y)^{-1})Δ⁺ so that Π_x ĝ_yx = Π_y.

        y is read in the period nearest to x, the frame in which Π_x is evaluated.
        """
        near = self.grid.unwrapped(y, x)
        total = 0.0
        for left, right, coefficient in coproduct_plus(tree, self.assignment):
            total += float(coefficient) * float(self.g(left)[x]) * self.g_inverse_at(right, y, near)
        return total

    def reexpansion(self, tree: DecoratedTree, y: GridIndex, x: GridIndex) -> LinComb:
        """ĝ_yx τ = (Id ⊗ g_yx)Δτ."""
        result = LinComb()
        for left, right, coefficient in coproduct(tree, self.assignment):
            value = float(coefficient) * self.g_yx(right, y, x)
            if value:
                result.add_term(left, value)
        return result

    def shift(self, y: GridIndex, x: GridIndex) -> tuple[float, float]:
        """x − y with y read in the period nearest to x."""
        (x0, x1), (y0, y1) = self.grid.point(x), self.grid.unwrapped(y, x)
        return x0 - y0, x1 - y1

    def check_recursive_identity(self, y: GridIndex, x: GridIndex, edge: EdgeLabel, tree: DecoratedTree) -> float:
        """Max coefficient of ĝ_yx(I_aτ) − I_a(ĝ_yxτ) + Σ_ℓ (X + x − y)^ℓ/ℓ! Π_x(I_{a+ℓ}ĝ_yxτ)(y)."""
        planted = trees.planted(edge, tree)
        lhs = self.reexpansion(planted, y, x)
        expanded = self.reexpansion(tree, y, x)
        rhs = LinComb()
        for sigma, coefficient in expanded:
            image = trees.planted(edge, sigma)
            if not trees.vanishes(image):
                rhs.add_term(image, coefficient)
        d0, d1 = self.shift(y, x)
        for ell in multi_indices_below(self.degree(planted)):
            value = 0.0
            for sigma, coefficient in expanded:
                image = trees.planted(edge.shifted(ell), sigma)
                if not trees.vanishes(image):
                    value += coefficient * float(self.recentered(image, x)[y])
            if not value:
                continue
            for j0 in range(ell[0] + 1):
                for j1 in range(ell[1] + 1):
                    weight = comb(ell[0], j0) * comb(ell[1], j1) * d0 ** (ell[0] - j0) * d1 ** (ell[1] - j1)
                    rhs.add_term(trees.polynomial((j0, j1)), -value * weight / trees.poly_factorial(ell))
        residual = lhs - rhs
        return max((abs(float(coefficient)) for _, coefficient in residual), default=0.0)

    # Reconstruction

    def diagonal_hat(self, tree: DecoratedTree) -> np.ndarray:
        """x ↦ Π̂_x(τ)(x): only k = 0 roots and non-positive planted branches survive."""
        if tree.root.poly != ZERO or trees.vanishes(tree):
            return np.zeros(self.grid.shape)
        value = self.noises[tree.root.noise - 1].copy() if tree.root.noise else np.ones(self.grid.shape)
        for edge, child in tree.children:
            if self.degree(trees.planted(edge, child)) > 0:
                return np.zeros(self.grid.shape)
            value = value * self.diagonal_convolution(edge, child)
        return value

    def reconstruct(self, table: Mapping[DecoratedTree, Any], regularity: Fraction | float) -> np.ndarray:
        """(R v)(x) = Π̂_x(R(x)v(x))(x) for v(x) = Σ_τ v_τ(x)τ."""
        if regularity <= 0:
            raise HypothesisViolation(f"reconstruction needs positive regularity, got {regularity}")
        total = np.zeros(self.grid.shape)
        for tree, coefficient in table.items():
            for image, weight in self.prep.apply(tree):
                total = total + _as_float(coefficient) * _as_float(weight) * self.diagonal_hat(image)
        return total

    # Checks and reports

    def admissibility_error(self, edge: EdgeLabel, tree: DecoratedTree) -> float:
        """sup |Π^R(I_aτ) − D^aK * Π^Rτ|."""
        planted = trees.planted(edge, tree)
        difference = self.pi(planted).evaluate() - self.conv(edge, tree).evaluate()
        return float(np.max(np.abs(difference)))

    def bound_ratio(self, tree: DecoratedTree, x: GridIndex, small: float | None = None, large: float = 0.5) -> float:
        """max|Π_xτ| / ρ^{deg τ} on the shell ρ ≈ h over the same quantity at ρ ≈ large."""
        degree = float(self.degree(tree))
        small = self.grid.dx if small is None else small
        distance = self.grid.distance_from(x)
        values = np.abs(self.recentered(tree, x))

        def shell(radius: float) -> float:
            mask = (distance >= radius) & (distance < 1.5 * radius)
            if not np.any(mask):
                raise SpecError(f"no grid points at distance {radius:.3g}")
            return float(np.max(values[mask])) / radius**degree

        outer = shell(large)
        return shell(small) / outer if outer > 0 else 0.0

    def manifest(self, tree_list: Iterable[DecoratedTree]) -> list[dict[str, Any]]:
        rows = []
        for tree in tree_list:
            values = self.pi(tree).evaluate()
            rows.append(
                {
                    "tree": tree.to_text(),
                    "degree": str(self.degree(tree)),
                    "sup": float(np.max(np.abs(values))),
                    "mean": float(np.mean(values)),
                }
            )
        return rows


def canonical_model(
    grid: SpacetimeGrid,
    noises: Sequence[GridFunction | np.ndarray],
    greens: Mapping[int, GreenKernel],
    assignment: DegreeAssignment,
) -> ModelPair:
    """R = Id."""
    return ModelPair(grid, noises, greens, identity(assignment))


def renormalized_model(
    grid: SpacetimeGrid,
    noises: Sequence[GridFunction | np.ndarray],
    greens: Mapping[int, GreenKernel],
    prep: PreparationMap,
) -> ModelPair:
    return ModelPair(grid, noises, greens, prep)


def model_bound_report(
    model: ModelPair,
    tree_list: Iterable[DecoratedTree],
    points: Sequence[GridIndex],
    limit: float = 10.0,
) -> list[CheckResult]:
    """Bounded |Π_xτ(y)|/|y − x|^{deg τ} for every positive-degree tree."""
    results = []
    for tree in tree_list:
        if model.degree(tree) <= 0 or trees.is_polynomial(tree) or tree == UNIT:
            continue
        worst = max(model.bound_ratio(tree, point) for point in points)
        results.append(CheckResult(f"bound {tree.to_text()}", worst <= limit, worst))
        log = logger.debug if worst <= limit else logger.warning
        log("model bound ratio %.3g for %s", worst, tree.to_text())
    return results
