"""Space-time dependent characters on the negative-degree trees."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

from .tree import UNIT, DecoratedTree


@dataclass(frozen=True, slots=True)
class Character:
    """ℓ(x, ·): finite support on B⁻, ℓ(x, 𝟏) = 1, zero elsewhere.

    屬性:
        values: 樹 → 係數；常數（Fraction/float）或格點陣列（每個 x 一個值）
        label: 報告中使用的名稱
    """

    values: Mapping[DecoratedTree, Any] = field(default_factory=dict)  # 支撐集上的值
    label: str = "character"  # 名稱

    def __call__(self, tree: DecoratedTree) -> Any:
        if tree == UNIT:
            return Fraction(1)
        return self.values.get(tree, Fraction(0))

    @property
    def support(self) -> tuple[DecoratedTree, ...]:
        return tuple(sorted(self.values))

    def is_grid_valued(self) -> bool:
        return any(isinstance(value, np.ndarray) for value in self.values.values())

    def at(self, index: tuple[int, ...] | int) -> Character:
        """Freeze grid-valued coefficients at one grid point."""
        return Character(
            {tree: (value[index] if isinstance(value, np.ndarray) else value) for tree, value in self.values.items()},
            self.label,
        )

    def as_dict(self) -> dict[str, Any]:
        payload = {}
        for tree in self.support:
            value = self.values[tree]
            if isinstance(value, np.ndarray):
                payload[tree.to_text()] = {"mean": float(np.mean(value)), "min": float(np.min(value)), "max": float(np.max(value))}
            else:
                payload[tree.to_text()] = str(value)
        return {"label": self.label, "values": payload}


COUNIT = Character({}, "counit")
