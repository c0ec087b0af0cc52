"""Finite formal sums of trees and of tree pairs.

Coefficients may be exact rationals, floats, sympy expressions or numpy arrays
(one value per grid point); anything supporting ``+``, ``-`` and ``*`` works.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Mapping

import numpy as np

from .tree import DecoratedTree

Coefficient = Any


def is_zero(value: Coefficient) -> bool:
    """Exact zero test across the supported coefficient rings."""
    if isinstance(value, np.ndarray):
        return not np.any(value)
    if hasattr(value, "expand"):  # sympy 表達式
        return value.expand() == 0
    return value == 0


class LinComb:
    """Formal sum Σ c_τ τ over canonical trees; zero terms are never stored."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[DecoratedTree, Coefficient] | Iterable[tuple[DecoratedTree, Coefficient]] = ()) -> None:
        self.terms: dict[DecoratedTree, Coefficient] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for tree, coefficient in items:
            self.add_term(tree, coefficient)

    @classmethod
    def of(cls, tree: DecoratedTree, coefficient: Coefficient = Fraction(1)) -> LinComb:
        return cls(((tree, coefficient),))

    def add_term(self, tree: DecoratedTree, coefficient: Coefficient) -> None:
        """In-place accumulation used while building a sum."""
        if tree in self.terms:
            coefficient = self.terms[tree] + coefficient
        if is_zero(coefficient):
            self.terms.pop(tree, None)
        else:
            self.terms[tree] = coefficient

    def coefficient(self, tree: DecoratedTree) -> Coefficient:
        return self.terms.get(tree, Fraction(0))

    def scale(self, factor: Coefficient) -> LinComb:
        return LinComb((tree, coefficient * factor) for tree, coefficient in self.terms.items())

    def map_trees(self, func: Callable[[DecoratedTree], LinComb]) -> LinComb:
        """Linear extension of ``func``."""
        result = LinComb()
        for tree, coefficient in self.terms.items():
            for image, weight in func(tree).terms.items():
                result.add_term(image, weight * coefficient)
        return result

    def filter(self, keep: Callable[[DecoratedTree], bool]) -> LinComb:
        return LinComb((tree, coefficient) for tree, coefficient in self.terms.items() if keep(tree))

    def __add__(self, other: LinComb) -> LinComb:
        result = LinComb(self.terms)
        for tree, coefficient in other.terms.items():
            result.add_term(tree, coefficient)
        return result

    def __neg__(self) -> LinComb:
        return self.scale(-1)

    def __sub__(self, other: LinComb) -> LinComb:
        return self + (-other)

    def __iter__(self) -> Iterator[tuple[DecoratedTree, Coefficient]]:
        return iter(sorted(self.terms.items(), key=lambda item: item[0].key))

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinComb):
            return NotImplemented
        return not (self - other).terms

    def __repr__(self) -> str:
        inner = " + ".join(f"{coefficient}·[{tree.to_text()}]" for tree, coefficient in self)
        return f"LinComb({inner or '0'})"


class TensorSum:
    """Formal sum of tree pairs Σ c (τ′ ⊗ τ″)."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[tuple[DecoratedTree, DecoratedTree], Coefficient]] = ()) -> None:
        self.terms: dict[tuple[DecoratedTree, DecoratedTree], Coefficient] = {}
        for pair, coefficient in terms:
            self.add_term(pair[0], pair[1], coefficient)

    def add_term(self, left: DecoratedTree, right: DecoratedTree, coefficient: Coefficient) -> None:
        pair = (left, right)
        if pair in self.terms:
            coefficient = self.terms[pair] + coefficient
        if is_zero(coefficient):
            self.terms.pop(pair, None)
        else:
            self.terms[pair] = coefficient

    def map_left(self, func: Callable[[DecoratedTree], LinComb]) -> TensorSum:
        result = TensorSum()
        for (left, right), coefficient in self.terms.items():
            for image, weight in func(left).terms.items():
                result.add_term(image, right, weight * coefficient)
        return result

    def map_right(self, func: Callable[[DecoratedTree], LinComb]) -> TensorSum:
        result = TensorSum()
        for (left, right), coefficient in self.terms.items():
            for image, weight in func(right).terms.items():
                result.add_term(left, image, weight * coefficient)
        return result

    def __iter__(self) -> Iterator[tuple[DecoratedTree, DecoratedTree, Coefficient]]:
        ordered = sorted(self.terms.items(), key=lambda item: (item[0][0].key, item[0][1].key))
        return iter((left, right, coefficient) for (left, right), coefficient in ordered)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TensorSum):
            return NotImplemented
        keys = set(self.terms) | set(other.terms)
        return all(is_zero(self.terms.get(k, 0) - other.terms.get(k, 0)) for k in keys)

    def __repr__(self) -> str:
        inner = " + ".join(f"{c}·[{l.to_text()}]⊗[{r.to_text()}]" for l, r, c in self)
        return f"TensorSum({inner or '0'})"
