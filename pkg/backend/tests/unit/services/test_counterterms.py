"""Unit tests for elementary differentials and renormalised counter-terms."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
import sympy

from backend.app.models.character import Character
from backend.app.models.equation_spec import EquationSpec
from backend.app.models.errors import HypothesisViolation
from backend.app.models.lincomb import LinComb
from backend.app.models.tree import DecoratedTree
from backend.app.services.counterterms import (
    counter_terms,
    dual_correction,
    evaluate_terms,
    render_latex,
    renormalised_rhs,
    terms_as_json,
)
from backend.app.services.elementary import (
    ElementaryDifferentials,
    elementary_differential,
    lifted_expansion,
    oracle_coefficient,
    shift_operator,
    total_derivative,
)
from backend.app.services.expressions import X0, X1, state_symbol
from backend.app.services.preparation import custom_map, from_character, identity
from backend.app.services.rules import generate_basis, parse_system
from backend.app.services.tree_codec import parse_tree

U1 = state_symbol(1)
U1_X = state_symbol(1, (0, 1))
XI_1 = sympy.Symbol("xi_1")


def _system(**component) -> list:
    payload = {"components": [{"a": "1", "b": "0", **component}], "noises": [{"alpha": "-3/2"}], "cutoff": "1"}
    return parse_system(EquationSpec.from_payload(payload))


def test_total_derivative_shifts_state_variables() -> None:
    assert total_derivative(U1**2, (0, 1)) == 2 * U1 * U1_X
    assert shift_operator(U1, (1, 1)) == state_symbol(1, (1, 1))


@pytest.mark.parametrize(
    ("component", "text", "expected"),
    [
        ({"f": {1: "u1"}}, "z1 I[1,(0,0)](z1)", U1),
        ({"f": {1: "u1"}}, "X^(0,1) z1", U1_X),
        ({"f": {1: "u1^2"}}, "z1 I[1,(0,0)](z1) I[1,(0,0)](z1)", 2 * U1**4),
        ({"f": {1: "1"}, "g": "u1_x^2"}, "z0 I[1,(0,1)](z1) I[1,(0,1)](z1)", sympy.Integer(2)),
        ({"f": {1: "sin(u1)"}}, "z1 I[1,(0,0)](z1)", sympy.cos(U1) * sympy.sin(U1)),
    ],
)
def test_elementary_differentials(component: dict, text: str, expected: sympy.Expr) -> None:
    value = elementary_differential(_system(**component), 1, parse_tree(text))
    assert sympy.simplify(value - expected) == 0


@pytest.mark.parametrize(
    ("component", "texts"),
    [
        ({"f": {1: "u1"}}, ["z1", "z1 I[1,(0,0)](z1)", "X^(0,1) z1", "z1 I[1,(0,0)](X^(0,1) z1)"]),
        ({"f": {1: "u1^2"}}, ["z1 I[1,(0,0)](z1) I[1,(0,0)](z1)", "z1 I[1,(0,0)](z1 I[1,(0,0)](z1))"]),
        ({"f": {1: "1"}, "g": "u1_x^2"}, ["z0 I[1,(0,1)](z1) I[1,(0,1)](z1)", "X^(0,1) z0 I[1,(0,1)](z1)"]),
    ],
)
def test_elementary_differentials_match_lifted_expansion(component: dict, texts: list[str]) -> None:
    """F_i(τ) equals S(τ) times the coefficient of τ in the lifted Picard series."""
    system = _system(**component)
    expansion = lifted_expansion(system, noise_count=1, max_nodes=3, max_poly=1)
    for text in texts:
        tree = parse_tree(text)
        difference = oracle_coefficient(expansion, 1, tree) - elementary_differential(system, 1, tree)
        assert sympy.simplify(difference) == 0, text


@pytest.mark.slow
def test_lifted_expansion_matches_every_tree_up_to_five_nodes() -> None:
    """f = u², g = u u_x: every tree of the truncated series carries F_1(τ)/S(τ)."""
    system = _system(f={1: "u1^2"}, g="u1*u1_x")
    expansion = lifted_expansion(system, noise_count=1, max_nodes=5, max_poly=1)
    differentials = ElementaryDifferentials(system)
    tree_list = [tree for tree, _ in expansion[1]]
    assert len(tree_list) > 100
    mismatches = [
        tree.to_text()
        for tree in tree_list
        if sympy.expand(oracle_coefficient(expansion, 1, tree) - differentials(1, tree)) != 0
    ]
    assert mismatches == []


def test_she_counter_term(she_spec: EquationSpec, cherry: DecoratedTree) -> None:
    """ℓ on ζI(ζ) renormalises the SHE by ℓ·f′f = ℓ·u."""
    basis = generate_basis(she_spec)
    prep = from_character(Character({cherry: Fraction(3)}), basis.assignment, basis.minus())
    terms = counter_terms(she_spec, prep, basis)
    assert len(terms) == 1
    (term,) = terms
    assert (term.component, term.noise, term.tree, term.coefficient) == (1, 0, cherry, Fraction(3))
    assert term.function == U1
    assert sympy.simplify(renormalised_rhs(she_spec, terms, 1) - (U1 * XI_1 + 3 * U1)) == 0
    assert terms_as_json(terms)[0] == {
        "tree": "z1 I[1,(0,0)](z1)",
        "symmetryFactor": 1,
        "component": 1,
        "noise": 0,
        "coefficient": "3",
        "function": "u1",
    }


def test_identity_map_has_no_counter_terms(she_spec: EquationSpec) -> None:
    basis = generate_basis(she_spec)
    assert counter_terms(she_spec, identity(basis.assignment), basis) == []
    assert r"\xi_{1}" in render_latex(she_spec, [])


def test_gkpz_counter_term_divides_by_symmetry(gkpz_spec: EquationSpec) -> None:
    """The 1/S(τ) of the dual cancels the 2 of F(τ) for ζ₀I′(ζ)I′(ζ)."""
    basis = generate_basis(gkpz_spec)
    tree = parse_tree("z0 I[1,(0,1)](z1) I[1,(0,1)](z1)")
    prep = from_character(Character({tree: Fraction(5)}), basis.assignment, basis.minus())
    assert dual_correction(prep, 0) == LinComb.of(tree, Fraction(5, 2))
    (term,) = counter_terms(gkpz_spec, prep, basis)
    assert term.symmetry_factor == 2
    assert term.coefficient == Fraction(5, 2)
    assert term.function == 2


def test_custom_map_moving_planted_tree_is_rejected(she_spec: EquationSpec) -> None:
    basis = generate_basis(she_spec)
    planted = parse_tree("z0 I[1,(0,0)](z1)")
    prep = custom_map({planted: LinComb({planted: Fraction(1), parse_tree("z0"): Fraction(1)})}, basis.assignment, basis)
    with pytest.raises(HypothesisViolation):
        counter_terms(she_spec, prep, basis)


def test_evaluate_terms_on_grid(she_spec: EquationSpec, cherry: DecoratedTree, small_grid) -> None:
    basis = generate_basis(she_spec)
    prep = from_character(Character({cherry: Fraction(3), parse_tree("z1"): Fraction(1, 2)}), basis.assignment)
    terms = counter_terms(she_spec, prep, basis)
    t_mesh, x_mesh = small_grid.mesh()
    state = {U1: np.full(small_grid.shape, 2.0)}
    values = evaluate_terms(terms, 1, state, {X0: t_mesh, X1: x_mesh})
    # 3·u + (1/2)·u with u = 2
    np.testing.assert_allclose(values, 7.0)
