"""Root extraction δ_r: extract one divergent subtree sharing the root.

For a rooted subtree A of τ the extracted factor keeps a share m_v of every
node's polynomial decoration and receives the derivative ε_e transferred from
each cut edge e (weight 1/ε!). The contracted tree τ/A has a bare root that
carries the remaining polynomial decorations, with every cut edge re-attached
under label a_e + ε_e.
"""

from __future__ import annotations

import itertools
import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

from ..models.lincomb import TensorSum
from ..models.tree import UNIT, DecoratedTree, DegreeAssignment, MultiIndex, NodeDeco, scaled_norm
from . import trees
from .coproduct import binomial, sub_indices

logger = logging.getLogger(__name__)


def extractable(tree: DecoratedTree, assignment: DegreeAssignment) -> bool:
    """Shape of B⁻: degree ≤ 0, at least one noise, not planted."""
    return (
        trees.noise_count(tree) >= 1
        and not trees.is_planted(tree)
        and not trees.vanishes(tree)
        and trees.degree(tree, assignment) <= 0
    )


def _rooted_subsets(children: dict[int, list[int]], node: int) -> list[frozenset[int]]:
    options = [frozenset((node,))]
    for child in children.get(node, ()):
        below = [frozenset()] + _rooted_subsets(children, child)
        options = [chosen | extra for chosen in options for extra in below]
    return options


def _transfers(count: int, budget: Fraction) -> Iterator[tuple[MultiIndex, ...]]:
    """Tuples (ε_1..ε_count) with Σ|ε_e|_s ≤ budget."""
    if budget < 0:
        return
    limit = int(math.floor(budget))
    single = [(k0, k1) for k0 in range(limit // 2 + 1) for k1 in range(limit - 2 * k0 + 1)]
    for combo in itertools.product(single, repeat=count):
        if sum(scaled_norm(eps) for eps in combo) <= budget:
            yield combo


@lru_cache(maxsize=None)
def delta_r(tree: DecoratedTree, assignment: DegreeAssignment, transfer: bool = True) -> TensorSum:
    """δ_r τ = 𝟏⊗τ + Σ_A A⊗τ/A over root subtrees A of B⁻ shape.

    ``transfer=False`` keeps every polynomial decoration inside A and moves
    no derivative across cut edges.
    """
    nodes = trees.flatten(tree)
    children: dict[int, list[int]] = {}
    for index, node in enumerate(nodes):
        if node.parent is not None:
            children.setdefault(node.parent, []).append(index)

    result = TensorSum()
    result.add_term(UNIT, tree, Fraction(1))

    for subset in _rooted_subsets(children, 0):
        members = sorted(subset)
        cut = [index for index, node in enumerate(nodes) if node.parent in subset and index not in subset]
        internal_gain = sum(
            assignment.beta - scaled_norm(nodes[index].edge.derivative) for index in members if index != 0
        )
        noise_part = sum((assignment.alpha(nodes[index].noise) for index in members), Fraction(0))
        shares = (
            itertools.product(*(sub_indices(nodes[index].poly) for index in members))
            if transfer
            else [tuple(nodes[index].poly for index in members)]
        )
        for share in shares:
            kept = dict(zip(members, share))
            base = noise_part + internal_gain + sum(scaled_norm(m) for m in share)
            transfers = _transfers(len(cut), -base) if transfer else ([((0, 0),) * len(cut)] if base <= 0 else [])
            for eps in transfers:
                _emit(result, nodes, members, cut, kept, eps, assignment, tree)
    return result


def _emit(
    result: TensorSum,
    nodes: list[trees.FlatNode],
    members: list[int],
    cut: list[int],
    kept: dict[int, MultiIndex],
    eps: tuple[MultiIndex, ...],
    assignment: DegreeAssignment,
    tree: DecoratedTree,
) -> None:
    received = {index: [0, 0] for index in members}
    for index, shift in zip(cut, eps):
        parent = nodes[index].parent
        received[parent][0] += shift[0]
        received[parent][1] += shift[1]

    position = {index: slot for slot, index in enumerate(members)}
    extracted_nodes = [
        trees.FlatNode(
            nodes[index].noise,
            (kept[index][0] + received[index][0], kept[index][1] + received[index][1]),
            None if nodes[index].parent is None else position[nodes[index].parent],
            nodes[index].edge,
        )
        for index in members
    ]
    extracted = trees.assemble(extracted_nodes)
    if extracted == UNIT or not extractable(extracted, assignment):
        return

    remaining = [0, 0]
    weight = Fraction(1)
    for index in members:
        remaining[0] += nodes[index].poly[0] - kept[index][0]
        remaining[1] += nodes[index].poly[1] - kept[index][1]
        weight *= binomial(nodes[index].poly, kept[index])
    branches = []
    for index, shift in zip(cut, eps):
        weight /= trees.poly_factorial(shift)
        branches.append((nodes[index].edge.shifted(shift), trees.assemble(nodes, index)))
    contracted = DecoratedTree(NodeDeco(0, (remaining[0], remaining[1])), tuple(branches))
    logger.debug("δ_r %s: %s ⊗ %s (%s)", tree.to_text(), extracted.to_text(), contracted.to_text(), weight)
    result.add_term(extracted, contracted, weight)
