"""Decorated rooted trees.

A tree is ``X^k ζ_l ∏_j I_{a_j}(τ_j)``: a root decoration (noise index ``l``,
polynomial exponent ``k``) and a multiset of planted branches, each hanging
from an edge label ``a = (sort, derivative)``. Children are sorted on
construction, so every instance is already in canonical form and equality is
rooted isomorphism.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import SpecError

MultiIndex = tuple[int, int]

ZERO: MultiIndex = (0, 0)
SCALING: MultiIndex = (2, 1)  # 時間方向權重 2、空間方向權重 1


def scaled_norm(k: MultiIndex) -> int:
    """Parabolic length |k|_s = 2 k0 + k1."""
    return SCALING[0] * k[0] + SCALING[1] * k[1]


@dataclass(frozen=True, slots=True, order=True)
class NodeDeco:
    """Root decoration of a tree.

    屬性:
        noise: 噪聲索引 l（0 代表 ζ₀ = 𝟏）
        poly: 多項式裝飾 X^k 的指數 (k0, k1)
    """

    noise: int = 0  # 噪聲索引
    poly: MultiIndex = ZERO  # 多項式指數

    def __post_init__(self) -> None:
        if self.noise < 0 or min(self.poly) < 0:
            raise SpecError(f"invalid node decoration ({self.noise}, {self.poly})")


@dataclass(frozen=True, slots=True, order=True)
class EdgeLabel:
    """Edge label a = (sort, derivative) of an integration edge I_a."""

    sort: int  # 對應第幾個方程的 (∂₀ − L)⁻¹
    derivative: MultiIndex = ZERO  # 邊上的導數

    def __post_init__(self) -> None:
        if self.sort < 1 or min(self.derivative) < 0:
            raise SpecError(f"invalid edge label ({self.sort}, {self.derivative})")

    def shifted(self, k: MultiIndex) -> EdgeLabel:
        """Return the label a + k."""
        return EdgeLabel(self.sort, (self.derivative[0] + k[0], self.derivative[1] + k[1]))


Branch = tuple[EdgeLabel, "DecoratedTree"]


@dataclass(frozen=True, slots=True, eq=False)
class DecoratedTree:
    """Canonical decorated rooted tree.

    屬性:
        root: 根節點裝飾
        children: 已排序的 (邊標籤, 子樹) 元組
    """

    root: NodeDeco = NodeDeco()
    children: tuple[Branch, ...] = ()
    _key: tuple = field(init=False, repr=False)
    _hash: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.children, key=lambda branch: (branch[0], branch[1]._key)))
        key = (
            self.root.noise,
            self.root.poly,
            tuple((edge.sort, edge.derivative, child._key) for edge, child in ordered),
        )
        object.__setattr__(self, "children", ordered)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    @property
    def key(self) -> tuple:
        """Nested tuple encoding; equal keys mean isomorphic trees."""
        return self._key

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DecoratedTree):
            return NotImplemented
        return self._hash == other._hash and self._key == other._key

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: DecoratedTree) -> bool:
        return self._key < other._key

    def __repr__(self) -> str:
        return f"DecoratedTree({self.to_text()!r})"

    def to_text(self) -> str:
        """Render with the tree grammar, e.g. ``X^(0,1) z1 I[1,(0,0)](z1)``."""
        parts: list[str] = []
        if self.root.poly != ZERO:
            parts.append(f"X^({self.root.poly[0]},{self.root.poly[1]})")
        parts.append(f"z{self.root.noise}")
        for edge, child in self.children:
            k0, k1 = edge.derivative
            parts.append(f"I[{edge.sort},({k0},{k1})]({child.to_text()})")
        return " ".join(parts)

    def with_root(self, noise: int | None = None, poly: MultiIndex | None = None) -> DecoratedTree:
        """Copy with a replaced root decoration."""
        return DecoratedTree(
            NodeDeco(self.root.noise if noise is None else noise, self.root.poly if poly is None else poly),
            self.children,
        )

    def with_children(self, children: Iterable[Branch]) -> DecoratedTree:
        """Copy with a replaced branch multiset."""
        return DecoratedTree(self.root, tuple(children))


UNIT = DecoratedTree()


@dataclass(frozen=True, slots=True)
class DegreeAssignment:
    """Noise regularities and kernel gain.

    屬性:
        alphas: α_1..α_n0（α₀ = 0 隱含）
        beta: 每條積分邊的增益 β（熱方程為 2）
    """

    alphas: tuple[Fraction, ...]  # 噪聲正則性
    beta: Fraction = Fraction(2)  # 核增益

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise SpecError("kernel gain beta must be positive")

    @classmethod
    def from_mapping(cls, degrees: dict[int, Fraction | int | str], beta: Fraction | int = 2) -> DegreeAssignment:
        """Build from ``{l: α_l}`` with l = 1..n0 contiguous."""
        count = max(degrees, default=0)
        missing = [index for index in range(1, count + 1) if index not in degrees]
        if missing:
            raise SpecError(f"noise degrees missing for indices {missing}")
        return cls(tuple(Fraction(degrees[index]) for index in range(1, count + 1)), Fraction(beta))

    @property
    def noise_count(self) -> int:
        return len(self.alphas)

    def alpha(self, noise: int) -> Fraction:
        """Degree of ζ_noise; raises SpecError for unknown indices."""
        if noise == 0:
            return Fraction(0)
        if not 1 <= noise <= len(self.alphas):
            raise SpecError(f"unknown noise index {noise}")
        return self.alphas[noise - 1]
