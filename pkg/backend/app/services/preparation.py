"""Preparation maps R(x,·) and their duals.

The dual is taken in the pairing ⟨τ, σ⟩ = S(τ)δ_{τσ}. For maps built from a
character, R_ℓ = (ℓ⊗Id)δ_r and R_ℓ*ρ = ρ + Σ_A ℓ(A)/S(A) ρ⋆A for bare-rooted
ρ (R_ℓ*ρ = ρ otherwise). Custom maps given by a table of images are dualised
by transposition over a finite basis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from ..models.character import COUNIT, Character
from ..models.errors import HypothesisViolation
from ..models.lincomb import LinComb, TensorSum, is_zero
from ..models.report import CheckResult
from ..models.tree import ZERO, DecoratedTree, DegreeAssignment
from . import trees
from .characters import char_apply_tensor, char_convolve, check_support
from .contraction import delta_r
from .coproduct import coproduct
from .grafting import graft

logger = logging.getLogger(__name__)

IDENTITY = "identity"
FROM_CHARACTER = "character"
CUSTOM = "custom"


@dataclass(frozen=True, slots=True)
class PreparationMap:
    """R(x,·) acting on T, with its dual R(x,·)*.

    屬性:
        assignment: 度數設定
        provenance: "identity"、"character" 或 "custom"
        character: δ_r 建構時使用的特徵 ℓ
        table: 自訂映射的像 τ → R τ（未列出的樹保持不變）
        dual_basis: 自訂映射轉置時使用的有限基底
    """

    assignment: DegreeAssignment  # 度數設定
    provenance: str = IDENTITY  # 來源
    character: Character = COUNIT  # ℓ
    table: Mapping[DecoratedTree, LinComb] = field(default_factory=dict)  # 自訂像
    dual_basis: tuple[DecoratedTree, ...] = ()  # 轉置基底

    @property
    def fixes_planted(self) -> bool:
        """R_ℓ never moves I_a(T) since B⁻ excludes planted trees."""
        if self.provenance != CUSTOM:
            return True
        return all(not trees.is_planted(tree) for tree in self.table)

    def apply(self, tree: DecoratedTree) -> LinComb:
        """R(x, τ)."""
        if self.provenance == FROM_CHARACTER:
            return char_apply_tensor(self.character, delta_r(tree, self.assignment))
        if self.provenance == CUSTOM and tree in self.table:
            return self.table[tree]
        return LinComb.of(tree)

    def apply_lincomb(self, value: LinComb) -> LinComb:
        return value.map_trees(self.apply)

    def apply_dual(self, tree: DecoratedTree) -> LinComb:
        """R(x, ·)*ρ."""
        if self.provenance == FROM_CHARACTER:
            result = LinComb.of(tree)
            if tree.root.noise != 0:
                return result
            for extracted in self.character.support:
                weight = self.character(extracted) / trees.symmetry_factor(extracted)
                for grafted, coefficient in graft(tree, extracted):
                    result.add_term(grafted, coefficient * weight)
            return result
        if self.provenance == CUSTOM:
            return dual_by_transposition(self, tree, self.dual_basis)
        return LinComb.of(tree)

    def apply_dual_lincomb(self, value: LinComb) -> LinComb:
        return value.map_trees(self.apply_dual)

    def at(self, index: tuple[int, ...] | int) -> PreparationMap:
        """Freeze grid-valued data at one x-grid point."""
        if self.provenance == FROM_CHARACTER:
            return PreparationMap(self.assignment, FROM_CHARACTER, self.character.at(index))
        if self.provenance == CUSTOM:
            frozen = {
                tree: LinComb(
                    (image, coefficient[index] if hasattr(coefficient, "shape") else coefficient)
                    for image, coefficient in value
                )
                for tree, value in self.table.items()
            }
            return PreparationMap(self.assignment, CUSTOM, table=frozen, dual_basis=self.dual_basis)
        return self


def identity(assignment: DegreeAssignment) -> PreparationMap:
    return PreparationMap(assignment)


def from_character(
    character: Character,
    assignment: DegreeAssignment,
    allowed: Iterable[DecoratedTree] | None = None,
) -> PreparationMap:
    """R_ℓ(x) = (ℓ(x,·)⊗Id)δ_r; ℓ must be supported on B⁻."""
    check_support(character, assignment, allowed)
    return PreparationMap(assignment, FROM_CHARACTER, character)


def custom_map(
    table: Mapping[DecoratedTree, LinComb],
    assignment: DegreeAssignment,
    basis: Sequence[DecoratedTree],
) -> PreparationMap:
    """Map given by an explicit table of images, identity off the table."""
    return PreparationMap(assignment, CUSTOM, table=dict(table), dual_basis=tuple(basis))


def dual_by_transposition(prep: PreparationMap, tree: DecoratedTree, basis: Iterable[DecoratedTree]) -> LinComb:
    """R*ρ = Σ_τ ⟨Rτ, ρ⟩/S(τ) τ over a finite basis."""
    result = LinComb()
    scale = trees.symmetry_factor(tree)
    for candidate in basis:
        coefficient = prep.apply(candidate).coefficient(tree)
        if not is_zero(coefficient):
            result.add_term(candidate, coefficient * Fraction(scale, trees.symmetry_factor(candidate)))
    return result


def pairing(left: LinComb, right: LinComb) -> Any:
    """⟨v, w⟩ = Σ_τ S(τ) v_τ w_τ."""
    total: Any = Fraction(0)
    for tree, coefficient in left.terms.items():
        other = right.coefficient(tree)
        if not is_zero(other):
            total = total + coefficient * other * trees.symmetry_factor(tree)
    return total


def _apply_left(prep: PreparationMap, tensor: TensorSum) -> TensorSum:
    return tensor.map_left(prep.apply)


def _coaction_of(value: LinComb, assignment: DegreeAssignment) -> TensorSum:
    result = TensorSum()
    for tree, coefficient in value.terms.items():
        for left, right, weight in coproduct(tree, assignment):
            result.add_term(left, right, weight * coefficient)
    return result


def _expansion_witness(prep: PreparationMap, tree: DecoratedTree) -> str | None:
    degree = trees.degree(tree, prep.assignment)
    noises = trees.noise_count(tree)
    for image, _ in prep.apply(tree) - LinComb.of(tree):
        if trees.degree(image, prep.assignment) < degree or trees.noise_count(image) >= noises:
            return f"{tree.to_text()} -> {image.to_text()}"
    return None


def check_preparation(
    prep: PreparationMap, basis: Iterable[DecoratedTree], points: Sequence[Any] = ()
) -> dict[str, CheckResult]:
    """Preparation-map axioms on the basis, frozen at each of ``points`` (or once)."""
    frozen_maps = [prep.at(point) for point in points] or [prep]
    tree_list = list(basis)
    results: dict[str, CheckResult] = {}

    def record(name: str, witness: str | None) -> None:
        if name not in results or results[name].passed:
            results[name] = CheckResult(name, witness is None, witness=witness)

    for frozen in frozen_maps:
        for tree in tree_list:
            image = frozen.apply(tree)
            if trees.is_polynomial(tree):
                record("fixes_polynomials", None if image == LinComb.of(tree) else tree.to_text())
                continue
            if trees.is_planted(tree):
                edge = tree.children[0][0]
                moved = image != LinComb.of(tree)
                name = "fixes_planted" if edge.derivative == ZERO else "fixes_derivative_planted"
                record(name, tree.to_text() if moved else None)
            record("expansion_form", _expansion_witness(frozen, tree))
            lhs = _apply_left(frozen, coproduct(tree, frozen.assignment))
            rhs = _coaction_of(image, frozen.assignment)
            record("commutation", None if lhs == rhs else tree.to_text())
    for name in ("fixes_polynomials", "fixes_planted", "fixes_derivative_planted", "expansion_form", "commutation"):
        results.setdefault(name, CheckResult(name, True))
    for result in results.values():
        if not result.passed:
            logger.warning("preparation check %s failed at %s", result.name, result.witness)
    return results


def check_strong(
    prep: PreparationMap,
    basis: Iterable[DecoratedTree],
    cutoff: Fraction,
    points: Sequence[Any] = (),
) -> CheckResult:
    """R*(σ⋆τ) = σ⋆(R*τ) for bare-rooted σ and τ in the basis with deg σ + deg τ < γ."""
    tree_list = list(basis)
    members = set(tree_list)
    frozen_maps = [prep.at(point) for point in points] or [prep]
    for point_index, frozen in enumerate(frozen_maps):
        for sigma in tree_list:
            if sigma.root.noise != 0 or trees.is_polynomial(sigma):
                continue
            for tau in tree_list:
                total = trees.degree(sigma, prep.assignment) + trees.degree(tau, prep.assignment)
                if total >= cutoff:
                    continue
                grafted = graft(sigma, tau)
                if prep.provenance == CUSTOM and any(tree not in members for tree, _ in grafted):
                    continue
                lhs = frozen.apply_dual_lincomb(grafted)
                rhs = frozen.apply_dual(tau).map_trees(lambda tree: graft(sigma, tree))
                if lhs != rhs:
                    witness = f"x#{point_index}, σ={sigma.to_text()}, τ={tau.to_text()}"
                    logger.warning("strong preparation identity fails: %s", witness)
                    return CheckResult("strong", False, witness=witness)
    return CheckResult("strong", True)


def require_hypotheses(prep: PreparationMap, basis: Iterable[DecoratedTree], points: Sequence[Any] = ()) -> list[str]:
    """Raise HypothesisViolation unless R fixes polynomials and I_{(𝔱,0)}(T).

    Returns warnings for derivative-labelled planted trees that R moves.
    """
    results = check_preparation(prep, basis, points)
    for name in ("fixes_polynomials", "fixes_planted"):
        if not results[name].passed:
            raise HypothesisViolation(f"preparation map does not satisfy {name}: {results[name].witness}")
    warnings = []
    if not results["fixes_derivative_planted"].passed:
        warnings.append(f"preparation map moves derivative-labelled planted tree {results['fixes_derivative_planted'].witness}")
    return warnings


def compose_characters(
    first: Character, second: Character, basis: Iterable[DecoratedTree], assignment: DegreeAssignment
) -> Character:
    """ℓ∘ℓ̄ so that R_{ℓ∘ℓ̄} = R_ℓ̄ ∘ R_ℓ."""
    return char_convolve(first, second, basis, assignment)


def check_group_law(
    first: Character, second: Character, basis: Iterable[DecoratedTree], assignment: DegreeAssignment
) -> CheckResult:
    """R_{ℓ∘ℓ̄}τ = R_ℓ̄(R_ℓτ) on every basis tree."""
    tree_list = list(basis)
    extracted = {left for tree in tree_list for left, _, _ in delta_r(tree, assignment)}
    domain = sorted(set(tree_list) | extracted)
    composite = PreparationMap(assignment, FROM_CHARACTER, compose_characters(first, second, domain, assignment))
    inner = PreparationMap(assignment, FROM_CHARACTER, first)
    outer = PreparationMap(assignment, FROM_CHARACTER, second)
    for tree in tree_list:
        if composite.apply(tree) != outer.apply_lincomb(inner.apply(tree)):
            return CheckResult("group_law", False, witness=tree.to_text())
    return CheckResult("group_law", True)
