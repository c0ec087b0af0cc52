"""Character arithmetic driven by δ_r."""

from __future__ import annotations

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable

import numpy as np
import sympy

from ..models.character import Character
from ..models.errors import HypothesisViolation, SpecError
from ..models.lincomb import LinComb, TensorSum, is_zero
from ..models.tree import UNIT, DecoratedTree, DegreeAssignment
from .contraction import delta_r, extractable
from .expressions import parse_expression, sample_on_grid
from .tree_codec import parse_tree

logger = logging.getLogger(__name__)


def check_support(character: Character, assignment: DegreeAssignment, allowed: Iterable[DecoratedTree] | None = None) -> None:
    """Raise HypothesisViolation when ℓ is supported outside B⁻."""
    permitted = None if allowed is None else set(allowed)
    for tree in character.support:
        if not extractable(tree, assignment) or (permitted is not None and tree not in permitted):
            raise HypothesisViolation(f"character {character.label} is supported on {tree.to_text()}, outside B⁻")


def char_apply_tensor(character: Character, tensor: TensorSum) -> LinComb:
    """(ℓ⊗Id) t = Σ ℓ(τ′) c τ″."""
    result = LinComb()
    for left, right, coefficient in tensor:
        value = character(left)
        if isinstance(value, Fraction) and value == 0:
            continue
        result.add_term(right, value * coefficient)
    return result


def char_convolve(
    first: Character,
    second: Character,
    trees: Iterable[DecoratedTree],
    assignment: DegreeAssignment,
) -> Character:
    """(ℓ∘ℓ̄)(τ) = Σ ℓ(A) ℓ̄(τ/A) over δ_r τ, evaluated on ``trees``."""
    values: dict[DecoratedTree, Any] = {}
    for tree in trees:
        if tree == UNIT or not extractable(tree, assignment):
            continue
        total: Any = Fraction(0)
        for left, right, coefficient in delta_r(tree, assignment):
            total = total + first(left) * second(right) * coefficient
        if not is_zero(total):
            values[tree] = total
    return Character(values, f"{first.label}∘{second.label}")


def char_inverse(character: Character, trees: Iterable[DecoratedTree], assignment: DegreeAssignment) -> Character:
    """ℓ⁻¹ with ℓ∘ℓ⁻¹ = counit, solved recursively over δ_r."""
    cache: dict[DecoratedTree, Any] = {UNIT: Fraction(1)}

    def inverse(tree: DecoratedTree) -> Any:
        if tree in cache:
            return cache[tree]
        if not extractable(tree, assignment):
            return Fraction(0)
        total: Any = Fraction(0)
        for left, right, coefficient in delta_r(tree, assignment):
            if left == UNIT:
                continue
            total = total - character(left) * inverse(right) * coefficient
        cache[tree] = total
        return total

    values = {tree: inverse(tree) for tree in trees if tree != UNIT}
    return Character({tree: value for tree, value in values.items() if not is_zero(value)}, f"{character.label}⁻¹")


def _character_value(raw: Any) -> Any:
    if isinstance(raw, (int, Fraction)):
        return Fraction(raw)
    text = str(raw).strip()
    try:
        return Fraction(text)
    except ValueError:
        return parse_expression(text, ["x0", "x1"])


def character_from_payload(payload: dict[str, Any], label: str = "character") -> Character:
    """Build ℓ from ``{"entries": [{"tree": "...", "value": "1/2" | "cos(x1)"}]}``."""
    entries = payload.get("entries")
    if not isinstance(entries, list):
        raise SpecError("character payload needs an 'entries' list")
    values: dict[DecoratedTree, Any] = {}
    for entry in entries:
        if not isinstance(entry, dict) or "tree" not in entry or "value" not in entry:
            raise SpecError(f"malformed character entry {entry!r}")
        tree = parse_tree(str(entry["tree"]))
        value = _character_value(entry["value"])
        if not is_zero(value):
            values[tree] = values.get(tree, Fraction(0)) + value
    return Character(values, str(payload.get("label", label)))


def load_character(path: Path | str) -> Character:
    """Read a JSON character file."""
    path = Path(path)
    if not path.is_file():
        raise SpecError(f"character file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise SpecError(f"character file {path} must hold an object")
    return character_from_payload(payload, path.stem)


def character_on_grid(character: Character, t_points: np.ndarray, x_points: np.ndarray) -> Character:
    """Sample expression-valued entries on the (x0, x1) grid; rationals stay exact."""
    values = {}
    for tree, value in character.values.items():
        if isinstance(value, sympy.Expr) and value.free_symbols:
            values[tree] = sample_on_grid(value, t_points, x_points)
        elif isinstance(value, sympy.Expr):
            values[tree] = float(value)
        else:
            values[tree] = value
    return Character(values, character.label)
