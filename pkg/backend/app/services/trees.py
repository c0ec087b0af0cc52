"""Tree constructors and combinatorial statistics."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence, Union

from ..models.errors import SpecError
from ..models.tree import (
    ZERO,
    DecoratedTree,
    DegreeAssignment,
    EdgeLabel,
    MultiIndex,
    NodeDeco,
    UNIT,
    scaled_norm,
)

RawTree = Union[DecoratedTree, tuple]


def noise(index: int, poly: MultiIndex = ZERO) -> DecoratedTree:
    """The single-node tree X^poly ζ_index."""
    return DecoratedTree(NodeDeco(index, poly))


def polynomial(k: MultiIndex) -> DecoratedTree:
    """The tree X^k."""
    return DecoratedTree(NodeDeco(0, k))


def planted(edge: EdgeLabel, tree: DecoratedTree) -> DecoratedTree:
    """I_edge(tree) as a tree whose root is a bare ζ₀ node."""
    return DecoratedTree(NodeDeco(), ((edge, tree),))


def product(left: DecoratedTree, right: DecoratedTree) -> DecoratedTree:
    """Tree product: merge the roots, add polynomial exponents, join branches."""
    if left.root.noise and right.root.noise:
        raise SpecError("cannot multiply two noise-rooted trees")
    poly = (left.root.poly[0] + right.root.poly[0], left.root.poly[1] + right.root.poly[1])
    return DecoratedTree(NodeDeco(left.root.noise or right.root.noise, poly), left.children + right.children)


def canonicalize(raw: RawTree) -> DecoratedTree:
    """Canonical representative of a tree given with arbitrary child order.

    ``raw`` is a DecoratedTree or a nested tuple
    ``(noise, (k0, k1), [(sort, (d0, d1), raw_child), ...])``.
    """
    if isinstance(raw, DecoratedTree):
        return DecoratedTree(raw.root, tuple((edge, canonicalize(child)) for edge, child in raw.children))
    noise_index, poly, branches = raw
    return DecoratedTree(
        NodeDeco(noise_index, tuple(poly)),
        tuple((EdgeLabel(sort, tuple(deriv)), canonicalize(child)) for sort, deriv, child in branches),
    )


@lru_cache(maxsize=None)
def degree(tree: DecoratedTree, assignment: DegreeAssignment) -> Fraction:
    """deg(X^k ζ_l ∏ I_{a_j}τ_j) = |k|_s + α_l + Σ (deg τ_j + β − |a_j|_s)."""
    total = Fraction(scaled_norm(tree.root.poly)) + assignment.alpha(tree.root.noise)
    for edge, child in tree.children:
        total += degree(child, assignment) + assignment.beta - scaled_norm(edge.derivative)
    return total


def noise_count(tree: DecoratedTree) -> int:
    """|τ|_ζ: nodes whose noise index is not 0."""
    return (1 if tree.root.noise else 0) + sum(noise_count(child) for _, child in tree.children)


def tree_size(tree: DecoratedTree) -> int:
    return 1 + sum(tree_size(child) for _, child in tree.children)


def poly_factorial(k: MultiIndex) -> int:
    return math.factorial(k[0]) * math.factorial(k[1])


@lru_cache(maxsize=None)
def symmetry_factor(tree: DecoratedTree) -> int:
    """S(τ) = k! ∏_b m_b! S(τ_b)^{m_b} over distinct branches b of multiplicity m_b."""
    factor = poly_factorial(tree.root.poly)
    for (edge, child), group in itertools.groupby(tree.children):
        multiplicity = len(list(group))
        factor *= math.factorial(multiplicity) * symmetry_factor(child) ** multiplicity
    return factor


def is_planted(tree: DecoratedTree) -> bool:
    """True for I_a(τ): bare ζ₀ root with exactly one branch."""
    return tree.root == NodeDeco() and len(tree.children) == 1


def is_polynomial(tree: DecoratedTree) -> bool:
    """True for X^k (including 𝟏)."""
    return tree.root.noise == 0 and not tree.children


def vanishes(tree: DecoratedTree) -> bool:
    """True when τ contains a planted polynomial I_a(X^k), which is zero."""
    return any(is_polynomial(child) or vanishes(child) for _, child in tree.children)


def counit(tree: DecoratedTree) -> int:
    return 1 if tree == UNIT else 0


def iter_subtrees(tree: DecoratedTree) -> Iterator[DecoratedTree]:
    """Every node's subtree, root first."""
    yield tree
    for _, child in tree.children:
        yield from iter_subtrees(child)


@dataclass(slots=True)
class FlatNode:
    """Mutable node record used when trees are cut or grafted.

    屬性:
        noise: 噪聲索引
        poly: 多項式指數
        parent: 父節點索引（根為 None）
        edge: 從父節點連入的邊標籤
    """

    noise: int
    poly: MultiIndex
    parent: int | None = None
    edge: EdgeLabel | None = None


def flatten(tree: DecoratedTree) -> list[FlatNode]:
    """Pre-order node list with the root at index 0."""
    nodes: list[FlatNode] = []

    def visit(subtree: DecoratedTree, parent: int | None, edge: EdgeLabel | None) -> None:
        index = len(nodes)
        nodes.append(FlatNode(subtree.root.noise, subtree.root.poly, parent, edge))
        for child_edge, child in subtree.children:
            visit(child, index, child_edge)

    visit(tree, None, None)
    return nodes


def assemble(nodes: Sequence[FlatNode], root: int = 0) -> DecoratedTree:
    """Rebuild the canonical tree hanging below ``root``."""
    children: dict[int, list[int]] = {}
    for index, node in enumerate(nodes):
        if node.parent is not None:
            children.setdefault(node.parent, []).append(index)

    def build(index: int) -> DecoratedTree:
        node = nodes[index]
        return DecoratedTree(
            NodeDeco(node.noise, node.poly),
            tuple((nodes[child].edge, build(child)) for child in children.get(index, ())),
        )

    return build(root)


def _structure_preserving(source: list[FlatNode], target: list[FlatNode], mapping: Sequence[int]) -> bool:
    if mapping[0] != 0:
        return False
    for index, node in enumerate(source):
        image = target[mapping[index]]
        if (node.noise, node.poly, node.edge) != (image.noise, image.poly, image.edge):
            return False
        if node.parent is not None and image.parent != mapping[node.parent]:
            return False
    return True


def symmetry_factor_bruteforce(tree: DecoratedTree) -> int:
    """Independent S(τ): count decoration-preserving node permutations."""
    nodes = flatten(tree)
    automorphisms = sum(
        1 for mapping in itertools.permutations(range(len(nodes))) if _structure_preserving(nodes, nodes, mapping)
    )
    return automorphisms * math.prod(poly_factorial(node.poly) for node in nodes)


def isomorphic_bruteforce(left: DecoratedTree, right: DecoratedTree) -> bool:
    """Rooted isomorphism by exhaustive search over node bijections."""
    source, target = flatten(left), flatten(right)
    if len(source) != len(target):
        return False
    return any(_structure_preserving(source, target, mapping) for mapping in itertools.permutations(range(len(target))))
