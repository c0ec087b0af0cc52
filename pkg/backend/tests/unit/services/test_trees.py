"""Unit tests for tree constructors, statistics and the tree codecs."""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction

import numpy as np
import pytest

from backend.app.models.errors import SpecError, TreeSyntaxError
from backend.app.models.tree import UNIT, DecoratedTree, EdgeLabel, NodeDeco, scaled_norm
from backend.app.services import trees
from backend.app.services.tree_codec import parse_tree, print_tree, tree_from_json, tree_to_json

EDGE = EdgeLabel(1)


def test_parse_tree_reads_cherry(cherry: DecoratedTree) -> None:
    """Test that the cherry is ζ₁ with one planted ζ₁."""
    assert cherry.root == NodeDeco(1)
    assert cherry.children == ((EDGE, trees.noise(1)),)
    assert print_tree(cherry) == "z1 I[1,(0,0)](z1)"


def test_parse_tree_ignores_whitespace() -> None:
    assert parse_tree(" X^( 0 , 1 ) z1  I[1,(0,1)]( z1 ) ") == parse_tree("X^(0,1) z1 I[1,(0,1)](z1)")


@pytest.mark.parametrize(
    ("text", "position"),
    [
        ("z", 1),
        ("z1 I[1,(0,0)](z1", 16),
        ("z1 extra", 3),
    ],
)
def test_parse_tree_reports_position(text: str, position: int) -> None:
    with pytest.raises(TreeSyntaxError) as info:
        parse_tree(text)
    assert info.value.position == position


def test_parse_tree_rejects_sort_zero() -> None:
    with pytest.raises(TreeSyntaxError):
        parse_tree("z1 I[0,(0,0)](z1)")


def test_tree_json_round_trip() -> None:
    tree = parse_tree("X^(1,0) z0 I[1,(0,1)](z1) I[1,(0,0)](z1 I[1,(0,0)](z1))")
    assert tree_from_json(tree_to_json(tree)) == tree


def test_tree_from_json_rejects_missing_fields() -> None:
    with pytest.raises(SpecError):
        tree_from_json({"poly": [0, 0]})


def test_degree_of_cherry(cherry: DecoratedTree, she_assignment) -> None:
    """deg(ζ I(ζ)) = 2α + 2 with α = −8/5."""
    assert trees.degree(cherry, she_assignment) == Fraction(-6, 5)
    assert trees.degree(trees.planted(EDGE, trees.noise(1)), she_assignment) == Fraction(2, 5)
    assert trees.degree(trees.noise(1, (0, 1)), she_assignment) == Fraction(-3, 5)


def test_product_merges_roots(cherry: DecoratedTree) -> None:
    product = trees.product(trees.polynomial((0, 1)), cherry)
    assert product == parse_tree("X^(0,1) z1 I[1,(0,0)](z1)")
    assert trees.product(UNIT, cherry) == cherry


def test_product_of_two_noises_raises() -> None:
    with pytest.raises(SpecError):
        trees.product(trees.noise(1), trees.noise(1))


def test_canonicalize_nested_tuples() -> None:
    raw = (0, (0, 0), [(1, (0, 1), (1, (0, 0), [])), (1, (0, 0), (1, (0, 0), []))])
    assert trees.canonicalize(raw) == parse_tree("z0 I[1,(0,0)](z1) I[1,(0,1)](z1)")


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("z1", 1),
        ("X^(0,2) z1", 2),
        ("z0 I[1,(0,0)](z1) I[1,(0,0)](z1)", 2),
        ("z0 I[1,(0,0)](z1 I[1,(0,0)](z1)) I[1,(0,0)](z1 I[1,(0,0)](z1))", 2),
        ("z0 I[1,(0,0)](z1) I[1,(0,0)](z1) I[1,(0,0)](z1)", 6),
        ("z0 I[1,(0,0)](z1) I[1,(0,1)](z1)", 1),
    ],
)
def test_symmetry_factor_matches_bruteforce(text: str, expected: int) -> None:
    tree = parse_tree(text)
    assert trees.symmetry_factor(tree) == expected
    assert trees.symmetry_factor_bruteforce(tree) == expected


def test_isomorphism_agrees_with_equality() -> None:
    left = parse_tree("z0 I[1,(0,1)](z1) I[1,(0,0)](z1 I[1,(0,0)](z1))")
    right = parse_tree("z0 I[1,(0,0)](z1 I[1,(0,0)](z1)) I[1,(0,1)](z1)")
    other = parse_tree("z0 I[1,(0,0)](z1) I[1,(0,1)](z1 I[1,(0,0)](z1))")
    assert left == right and trees.isomorphic_bruteforce(left, right)
    assert left != other and not trees.isomorphic_bruteforce(left, other)


def test_flatten_and_assemble_are_inverse(cherry: DecoratedTree) -> None:
    nodes = trees.flatten(cherry)
    assert [node.parent for node in nodes] == [None, 0]
    assert trees.assemble(nodes) == cherry
    assert trees.assemble(nodes, 1) == trees.noise(1)


def test_vanishing_and_shape_predicates(cherry: DecoratedTree) -> None:
    assert trees.vanishes(parse_tree("z1 I[1,(0,0)](z0)"))
    assert not trees.vanishes(cherry)
    assert trees.is_planted(trees.planted(EDGE, cherry))
    assert trees.is_polynomial(trees.polynomial((1, 0)))
    assert trees.noise_count(cherry) == 2
    assert trees.tree_size(cherry) == 2
    assert trees.counit(UNIT) == 1 and trees.counit(cherry) == 0


def _random_raw(rng: np.random.Generator, budget: int) -> tuple[tuple, int]:
    """Nested-tuple tree with at most ``budget`` nodes, branches in random order."""
    poly = (int(rng.integers(0, 2)), int(rng.integers(0, 3)))
    branches = []
    used = 1
    while used < budget and rng.random() < 0.6:
        child, size = _random_raw(rng, budget - used)
        branches.append((1, (0, int(rng.integers(0, 2))), child))
        used += size
    return (int(rng.integers(0, 2)), poly, branches), used


def _reversed(raw: tuple) -> tuple:
    noise_index, poly, branches = raw
    return noise_index, poly, [(sort, deriv, _reversed(child)) for sort, deriv, child in reversed(branches)]


def _random_trees(seed: int, count: int, budget: int = 6) -> list[tuple[tuple, DecoratedTree]]:
    rng = np.random.default_rng(seed)
    result = []
    for _ in range(count):
        raw, _ = _random_raw(rng, budget)
        result.append((raw, trees.canonicalize(raw)))
    return result


def test_random_trees_survive_both_codecs() -> None:
    for _, tree in _random_trees(7, 100):
        assert parse_tree(print_tree(tree)) == tree, print_tree(tree)
        assert tree_from_json(tree_to_json(tree)) == tree, print_tree(tree)


def test_canonicalize_is_idempotent_and_order_free() -> None:
    for raw, tree in _random_trees(8, 100):
        assert trees.canonicalize(tree) == tree
        assert trees.canonicalize(_reversed(raw)) == tree


@pytest.mark.slow
def test_equality_matches_isomorphism_on_small_trees(she_basis) -> None:
    """Trees of up to six nodes are equal exactly when they are isomorphic."""
    groups: dict[tuple, list[DecoratedTree]] = defaultdict(list)
    for tree in she_basis.closure():
        if trees.tree_size(tree) <= 6:
            signature = sorted((node.root.noise, node.root.poly, len(node.children)) for node in trees.iter_subtrees(tree))
            groups[tuple(signature)].append(tree)
    assert groups
    for members in groups.values():
        for left in members:
            for right in members:
                assert (left == right) == trees.isomorphic_bruteforce(left, right), (print_tree(left), print_tree(right))


def test_degree_is_additive_and_shifted_by_planting(she_assignment) -> None:
    """deg(τσ) = deg τ + deg σ and deg I_a τ = deg τ + β − |a|_s."""
    sample = [tree for _, tree in _random_trees(9, 60, budget=5)]
    for left, right in zip(sample, reversed(sample)):
        if left.root.noise and right.root.noise:
            continue
        total = trees.degree(left, she_assignment) + trees.degree(right, she_assignment)
        assert trees.degree(trees.product(left, right), she_assignment) == total
    for tree in sample:
        for derivative in ((0, 0), (0, 1), (1, 0)):
            shifted = trees.degree(tree, she_assignment) + she_assignment.beta - scaled_norm(derivative)
            assert trees.degree(trees.planted(EdgeLabel(1, derivative), tree), she_assignment) == shifted
