"""Grafting product σ ⋆ τ.

For σ = X^k ∏_i I_{a_i}(σ_i) every branch is attached to a node v of τ; a
branch may hand a derivative ℓ_i ≤ a_i to the polynomial decoration of v
(edge becomes a_i − ℓ_i, node loses ℓ_i, multinomial weight). Finally X^k is
spread over the original nodes of τ with weight k!/∏ k_v!.
"""

from __future__ import annotations

import itertools
import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

from ..models.errors import SpecError
from ..models.lincomb import LinComb
from ..models.tree import ZERO, DecoratedTree, EdgeLabel, MultiIndex
from . import trees
from .coproduct import sub_indices

logger = logging.getLogger(__name__)


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered ways of writing ``total`` as ``parts`` naturals."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _multinomial(total: int, pieces: list[int]) -> int:
    value = math.factorial(total)
    for piece in pieces:
        value //= math.factorial(piece)
    return value // math.factorial(total - sum(pieces))


def _spreads(poly: MultiIndex, size: int) -> list[tuple[tuple[MultiIndex, ...], int]]:
    """Ways of spreading X^k over ``size`` nodes with their multinomial weights."""
    if poly == ZERO:
        return [((ZERO,) * size, 1)]
    result = []
    for split0 in compositions(poly[0], size):
        for split1 in compositions(poly[1], size):
            weight = _multinomial(poly[0], list(split0)) * _multinomial(poly[1], list(split1))
            result.append((tuple(zip(split0, split1)), weight))
    return result


def _lowered(base: list[trees.FlatNode], sites: tuple[int, ...], ells: tuple[MultiIndex, ...]) -> tuple[list[MultiIndex], int] | None:
    """Node polynomials after the hand-offs, with their weight, or None if a node is overdrawn."""
    given: dict[int, list[MultiIndex]] = {}
    for site, ell in zip(sites, ells):
        if ell != ZERO:
            given.setdefault(site, []).append(ell)
    polys = [node.poly for node in base]
    weight = 1
    for site, pieces in given.items():
        poly = polys[site]
        spent = (sum(ell[0] for ell in pieces), sum(ell[1] for ell in pieces))
        if spent[0] > poly[0] or spent[1] > poly[1]:
            return None
        weight *= _multinomial(poly[0], [ell[0] for ell in pieces]) * _multinomial(poly[1], [ell[1] for ell in pieces])
        polys[site] = (poly[0] - spent[0], poly[1] - spent[1])
    return polys, weight


def _attach(nodes: list[trees.FlatNode], site: int, edge: EdgeLabel, subtree: DecoratedTree) -> None:
    offset = len(nodes)
    for node in trees.flatten(subtree):
        if node.parent is None:
            nodes.append(trees.FlatNode(node.noise, node.poly, site, edge))
        else:
            nodes.append(trees.FlatNode(node.noise, node.poly, node.parent + offset, node.edge))


@lru_cache(maxsize=None)
def graft(sigma: DecoratedTree, tau: DecoratedTree) -> LinComb:
    """σ ⋆ τ; σ must have a bare (noise-free) root. The result is shared, do not mutate it."""
    if sigma.root.noise != 0:
        raise SpecError(f"grafting needs a noise-free root, got {sigma.to_text()}")
    base = trees.flatten(tau)
    branches = list(sigma.children)
    size = len(base)
    # Hand-offs a branch can make at each site on its own.
    choices = [
        [tuple(ell for ell in sub_indices(edge.derivative) if ell[0] <= node.poly[0] and ell[1] <= node.poly[1]) for node in base]
        for edge, _ in branches
    ]
    spreads = _spreads(sigma.root.poly, size)
    result = LinComb()

    for sites in itertools.product(range(size), repeat=len(branches)):
        for ells in itertools.product(*(choices[branch][site] for branch, site in enumerate(sites))):
            lowered = _lowered(base, sites, ells)
            if lowered is None:
                continue
            polys, weight = lowered
            for shares, spread in spreads:
                nodes = [
                    trees.FlatNode(node.noise, (polys[i][0] + shares[i][0], polys[i][1] + shares[i][1]), node.parent, node.edge)
                    for i, node in enumerate(base)
                ]
                for (edge, subtree), site, ell in zip(branches, sites, ells):
                    lowered_edge = EdgeLabel(edge.sort, (edge.derivative[0] - ell[0], edge.derivative[1] - ell[1]))
                    _attach(nodes, site, lowered_edge, subtree)
                grafted = trees.assemble(nodes)
                if not trees.vanishes(grafted):
                    result.add_term(grafted, Fraction(weight * spread))
    return result


def graft_lincomb(sigma: DecoratedTree, value: LinComb) -> LinComb:
    """σ ⋆ (Σ c τ), linear in the right argument."""
    return value.map_trees(lambda tree: graft(sigma, tree))
