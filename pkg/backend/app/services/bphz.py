"""BPHZ characters read off the renormalised model.

ℓ(x, τ) = −E[(Π^{R_ℓ}τ)(x)] is solved inductively over B⁻ ordered by noise
count and size: the values already fixed on smaller trees determine Π^{R_ℓ}τ,
and since δ_r τ contains τ⊗𝟏 the new value cancels the mean exactly.
"""

from __future__ import annotations

import logging
from typing import Mapping, Sequence

import numpy as np
from tqdm import tqdm

from ..models.basis import Basis
from ..models.character import Character
from ..models.grid import GridFunction, SpacetimeGrid
from ..models.tree import DecoratedTree, scaled_norm
from . import trees
from .green import GreenKernel
from .model_evaluator import ModelPair
from .preparation import from_character
from .sample_pool import SamplePool

logger = logging.getLogger(__name__)

ZERO_FLOOR = 1e-14


def _poly_weight(tree: DecoratedTree) -> int:
    return sum(scaled_norm(node.root.poly) for node in trees.iter_subtrees(tree))


def extraction_order(basis: Basis) -> list[DecoratedTree]:
    """B⁻ ordered so that every proper left factor of δ_r τ precedes τ."""
    return sorted(
        basis.minus(),
        key=lambda tree: (trees.noise_count(tree), trees.tree_size(tree), _poly_weight(tree), tree.key),
    )


def empirical_mean(values: Sequence[np.ndarray]) -> np.ndarray:
    """Mean accumulated in sample order."""
    total = np.zeros_like(values[0])
    for value in values:
        total = total + value
    return total / len(values)


def bphz_character(
    basis: Basis,
    grid: SpacetimeGrid,
    samples: Sequence[Sequence[GridFunction]],
    greens: Mapping[int, GreenKernel],
    max_workers: int = 1,
    spatial_average: bool = False,
    show_progress: bool = False,
) -> Character:
    """ℓ on B⁻ from one or more noise realisations.

    Args:
        basis: 產生的基底，B⁻ 取自 basis.minus()
        grid: 時空格點
        samples: 每個樣本一組 ξ_1..ξ_n0
        greens: 分量 → Green 核
        max_workers: 平行評估樣本的 worker 數
        spatial_average: 對平移不變的噪聲取格點平均，ℓ 成為常數
        show_progress: 顯示 tqdm 進度

    Returns:
        以格點陣列（或常數）為值的 Character
    """
    if not samples:
        raise ValueError("at least one noise sample is required")
    pool: SamplePool = SamplePool(max_workers)
    values: dict[DecoratedTree, object] = {}
    order = extraction_order(basis)
    for tree in tqdm(order, desc="bphz", unit="tree", leave=False, disable=not show_progress):
        prep = from_character(Character(dict(values), "bphz"), basis.assignment)

        def evaluate(noises: Sequence[GridFunction], tree: DecoratedTree = tree, prep=prep) -> np.ndarray:
            return ModelPair(grid, noises, greens, prep).pi(tree).evaluate()

        mean = empirical_mean(pool.map(evaluate, samples))
        value = -float(np.mean(mean)) if spatial_average else -mean
        size = abs(value) if spatial_average else float(np.max(np.abs(value)))
        if size < ZERO_FLOOR:
            logger.debug("bphz: %s has vanishing mean", tree.to_text())
            continue
        values[tree] = value
        logger.debug("bphz: ℓ(%s) of size %.3e", tree.to_text(), size)
    logger.info("bphz character on %d of %d trees from %d samples", len(values), len(order), len(samples))
    return Character(values, "bphz")


def renormalised_means(
    character: Character,
    basis: Basis,
    grid: SpacetimeGrid,
    samples: Sequence[Sequence[GridFunction]],
    greens: Mapping[int, GreenKernel],
) -> dict[DecoratedTree, float]:
    """sup_x |E[Π^{R_ℓ}τ(x)]| per tree of B⁻, zero for a BPHZ character."""
    prep = from_character(character, basis.assignment)
    models = [ModelPair(grid, noises, greens, prep) for noises in samples]
    return {
        tree: float(np.max(np.abs(empirical_mean([model.pi(tree).evaluate() for model in models]))))
        for tree in extraction_order(basis)
    }
