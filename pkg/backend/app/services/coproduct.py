"""Coaction Δ: T → T⊗T⁺, coproduct Δ⁺ and antipode S⁺ on T⁺.

Conventions: ΔX_i = X_i⊗𝟏 + 𝟏⊗X_i, Δζ = ζ⊗𝟏, and

    Δ(I_aτ) = (I_a⊗Id)Δτ + Σ_{|ℓ|_s < deg(I_aτ)} X^ℓ/ℓ! ⊗ I⁺_{a+ℓ}τ

extended multiplicatively. Elements of T⁺ are trees with a bare root whose
branches all have positive degree. Planted polynomials I_a(X^k) are zero.
"""

from __future__ import annotations

import itertools
import logging
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterator

from ..models.errors import SpecError
from ..models.lincomb import LinComb, TensorSum
from ..models.tree import UNIT, DecoratedTree, DegreeAssignment, EdgeLabel, MultiIndex
from . import trees

logger = logging.getLogger(__name__)


def multi_indices_below(bound: Fraction) -> Iterator[MultiIndex]:
    """All ℓ ∈ ℕ² with |ℓ|_s < bound."""
    k0 = 0
    while 2 * k0 < bound:
        k1 = 0
        while 2 * k0 + k1 < bound:
            yield (k0, k1)
            k1 += 1
        k0 += 1


def sub_indices(k: MultiIndex) -> Iterator[MultiIndex]:
    """All m ≤ k componentwise."""
    return itertools.product(range(k[0] + 1), range(k[1] + 1))


def binomial(k: MultiIndex, m: MultiIndex) -> int:
    return comb(k[0], m[0]) * comb(k[1], m[1])


def tensor_product(left: TensorSum, right: TensorSum) -> TensorSum:
    """Slotwise product (a⊗b)(c⊗d) = ac⊗bd."""
    result = TensorSum()
    for a, b, first in left:
        for c, d, second in right:
            result.add_term(trees.product(a, c), trees.product(b, d), first * second)
    return result


def lin_product(left: LinComb, right: LinComb) -> LinComb:
    result = LinComb()
    for a, first in left.terms.items():
        for b, second in right.terms.items():
            result.add_term(trees.product(a, b), first * second)
    return result


def split_root(tree: DecoratedTree) -> tuple[DecoratedTree, list[DecoratedTree]]:
    """Factor τ = (X^k ζ_l) · ∏ I_{a_j}(τ_j) at the root."""
    return trees.noise(tree.root.noise, tree.root.poly), [trees.planted(edge, child) for edge, child in tree.children]


def _polynomial_coproduct(tree: DecoratedTree) -> TensorSum:
    """Δ(X^k ζ_l) = Σ_m binom(k,m) X^m ζ_l ⊗ X^{k−m}."""
    k = tree.root.poly
    result = TensorSum()
    for m in sub_indices(k):
        rest = (k[0] - m[0], k[1] - m[1])
        result.add_term(trees.noise(tree.root.noise, m), trees.polynomial(rest), Fraction(binomial(k, m)))
    return result


def _taylor_terms(edge: EdgeLabel, child: DecoratedTree, assignment: DegreeAssignment) -> TensorSum:
    """Σ_{|ℓ|_s < deg(I_aτ)} X^ℓ/ℓ! ⊗ I⁺_{a+ℓ}τ."""
    bound = trees.degree(trees.planted(edge, child), assignment)
    result = TensorSum()
    for ell in multi_indices_below(bound):
        result.add_term(
            trees.polynomial(ell),
            trees.planted(edge.shifted(ell), child),
            Fraction(1, trees.poly_factorial(ell)),
        )
    return result


@lru_cache(maxsize=None)
def coproduct(tree: DecoratedTree, assignment: DegreeAssignment) -> TensorSum:
    """Δτ for τ ∈ T."""
    if trees.vanishes(tree):
        return TensorSum()
    result = _polynomial_coproduct(tree)
    for edge, child in tree.children:
        branch = TensorSum()
        for left, right, coefficient in coproduct(child, assignment):
            image = trees.planted(edge, left)
            if not trees.vanishes(image):
                branch.add_term(image, right, coefficient)
        for left, right, coefficient in _taylor_terms(edge, child, assignment):
            branch.add_term(left, right, coefficient)
        result = tensor_product(result, branch)
    return result


def positive_tree(tree: DecoratedTree, assignment: DegreeAssignment) -> bool:
    """Membership of the basis of T⁺: bare root, every branch of positive degree."""
    if tree.root.noise != 0 or trees.vanishes(tree):
        return False
    return all(trees.degree(trees.planted(edge, child), assignment) > 0 for edge, child in tree.children)


def _require_positive(tree: DecoratedTree, assignment: DegreeAssignment) -> None:
    if not positive_tree(tree, assignment):
        raise SpecError(f"{tree.to_text()} is not an element of the positive structure")


@lru_cache(maxsize=None)
def coproduct_plus(tree: DecoratedTree, assignment: DegreeAssignment) -> TensorSum:
    """Δ⁺τ⁺ with both slots in T⁺."""
    _require_positive(tree, assignment)
    result = _polynomial_coproduct(tree)
    for edge, child in tree.children:
        branch = TensorSum()
        for left, right, coefficient in coproduct(child, assignment):
            image = trees.planted(edge, left)
            if positive_tree(image, assignment):
                branch.add_term(image, right, coefficient)
        for left, right, coefficient in _taylor_terms(edge, child, assignment):
            branch.add_term(left, right, coefficient)
        result = tensor_product(result, branch)
    return result


@lru_cache(maxsize=None)
def _antipode_generator(tree: DecoratedTree, assignment: DegreeAssignment) -> LinComb:
    """S⁺ on a single generator X_i or I⁺_aτ."""
    if not tree.children:
        sign = -1 if (tree.root.poly[0] + tree.root.poly[1]) % 2 else 1
        return LinComb.of(tree, Fraction(sign))
    result = LinComb.of(tree, Fraction(-1))
    for left, right, coefficient in coproduct_plus(tree, assignment):
        if left == tree or left == UNIT:
            continue
        result = result - lin_product(antipode_plus(left, assignment), LinComb.of(right, coefficient))
    return result


@lru_cache(maxsize=None)
def antipode_plus(tree: DecoratedTree, assignment: DegreeAssignment) -> LinComb:
    """S⁺τ⁺, multiplicative over the root factorisation."""
    _require_positive(tree, assignment)
    result = LinComb.of(UNIT)
    k = tree.root.poly
    for axis, power in enumerate(k):
        unit_poly = (1, 0) if axis == 0 else (0, 1)
        for _ in range(power):
            result = lin_product(result, _antipode_generator(trees.polynomial(unit_poly), assignment))
    for edge, child in tree.children:
        result = lin_product(result, _antipode_generator(trees.planted(edge, child), assignment))
    return result


def counit(tree: DecoratedTree) -> int:
    return trees.counit(tree)


def antipode_defect(tree: DecoratedTree, assignment: DegreeAssignment, side: str = "left") -> LinComb:
    """m(S⁺⊗Id)Δ⁺τ − ε(τ)𝟏 (or the right-sided twin); zero when S⁺ is an antipode."""
    total = LinComb()
    for left, right, coefficient in coproduct_plus(tree, assignment):
        if side == "left":
            piece = lin_product(antipode_plus(left, assignment), LinComb.of(right))
        else:
            piece = lin_product(LinComb.of(left), antipode_plus(right, assignment))
        total = total + piece.scale(coefficient)
    return total - LinComb.of(UNIT, Fraction(counit(tree)))

