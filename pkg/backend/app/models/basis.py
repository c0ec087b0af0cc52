"""Generated tree basis of the regularity structure up to a degree cutoff."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterator

from ..services import trees as tree_ops
from .tree import DecoratedTree, DegreeAssignment, EdgeLabel, NodeDeco


@dataclass(frozen=True, slots=True)
class Basis:
    """Sorted basis of T below the cutoff γ.

    屬性:
        trees: 依 (度數, 編碼) 排序的典範樹
        assignment: 度數設定
        cutoff: 截斷 γ
        components: 方程個數 k₀
    """

    trees: tuple[DecoratedTree, ...]  # 基底
    assignment: DegreeAssignment  # 度數
    cutoff: Fraction  # γ
    components: int = 1  # k₀
    _members: frozenset = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_members", frozenset(self.trees))

    def __iter__(self) -> Iterator[DecoratedTree]:
        return iter(self.trees)

    def __len__(self) -> int:
        return len(self.trees)

    def __contains__(self, tree: object) -> bool:
        return tree in self._members

    def degree(self, tree: DecoratedTree) -> Fraction:
        return tree_ops.degree(tree, self.assignment)

    def minus(self) -> tuple[DecoratedTree, ...]:
        """B⁻: deg ≤ 0, at least one noise, not planted."""
        return tuple(
            tree
            for tree in self.trees
            if tree_ops.noise_count(tree) >= 1 and not tree_ops.is_planted(tree) and self.degree(tree) <= 0
        )

    def positive(self) -> tuple[DecoratedTree, ...]:
        """Generators I⁺_a(τ) of T⁺ with τ a non-polynomial basis tree and deg(I_aτ) > 0."""
        generators: set[DecoratedTree] = set()
        for tree in self.trees:
            if tree_ops.is_planted(tree) or (tree.root.noise == 0 and not tree.children):
                continue
            bound = self.degree(tree) + self.assignment.beta
            for sort in range(1, self.components + 1):
                k0 = 0
                while 2 * k0 < bound:
                    k1 = 0
                    while 2 * k0 + k1 < bound:
                        edge = EdgeLabel(sort, (k0, k1))
                        generators.add(DecoratedTree(NodeDeco(), ((edge, tree),)))
                        k1 += 1
                    k0 += 1
        return tuple(sorted(generators, key=lambda tree: (self.degree(tree), tree.key)))

    def closure(self) -> tuple[DecoratedTree, ...]:
        """Basis trees together with every subtree and planted branch they contain."""
        seen: set[DecoratedTree] = set()

        def visit(tree: DecoratedTree) -> None:
            if tree in seen:
                return
            seen.add(tree)
            for edge, child in tree.children:
                visit(child)
                visit(DecoratedTree(NodeDeco(), ((edge, child),)))

        for tree in self.trees:
            visit(tree)
        return tuple(sorted(seen, key=lambda tree: (tree_ops.noise_count(tree), tree.key)))

    def as_dict(self) -> dict[str, Any]:
        negative = set(self.minus())
        return {
            "cutoff": str(self.cutoff),
            "alphas": [str(alpha) for alpha in self.assignment.alphas],
            "trees": [
                {
                    "tree": tree.to_text(),
                    "degree": str(self.degree(tree)),
                    "negative": tree in negative,
                }
                for tree in self.trees
            ],
        }
