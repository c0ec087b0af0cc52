"""Rule extraction, spec validation and basis generation.

A node of component 𝔱 is either a noise ζ_l (when f^𝔱_l ≠ 0) or a bare ζ₀
(when g^𝔱 ≠ 0). Its outgoing edges I_{(s, e)} are those of the state
variables the coefficient depends on: u_s gives e = (0,0), ∂₁u_s gives
e = (0,1). Fan-in is bounded by the polynomial degree of the coefficient
(unbounded for non-polynomial coefficients unless ``max_fan_in`` is set).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np
import sympy
from tqdm import tqdm

from ..models.basis import Basis
from ..models.equation_spec import EquationSpec
from ..models.errors import SpecError
from ..models.report import Diagnostic
from ..models.tree import ZERO, DecoratedTree, DegreeAssignment, EdgeLabel, MultiIndex, NodeDeco, scaled_norm
from . import trees
from .expressions import parse_expression, parse_state_symbol, sample_on_torus, state_symbol

logger = logging.getLogger(__name__)

MAX_ROUNDS = 64  # 固定點輪數上限
MAX_TREES = 50000  # 單一分量的樹數上限
SUBCRITICAL_ITERATIONS = 50
ELLIPTICITY_SAMPLES = 512
ELLIPTICITY_FLOOR = 1e-6


@dataclass(frozen=True, slots=True)
class ParsedComponent:
    """Sympy forms of one equation's data.

    屬性:
        a: 擴散係數（x1 的函數）
        b: 漂移係數（x1 的函數）
        f: 噪聲索引 → f_l(u)
        g: g(u, ∂₁u)
    """

    a: sympy.Expr
    b: sympy.Expr
    f: dict[int, sympy.Expr]
    g: sympy.Expr

    def nonlinearity(self, noise: int) -> sympy.Expr:
        """F^noise: g for noise 0, f_noise otherwise, zero when absent."""
        if noise == 0:
            return self.g
        return self.f.get(noise, sympy.Integer(0))


@dataclass(frozen=True, slots=True)
class NodeType:
    """One admissible node shape for trees of a component.

    屬性:
        component: 分量 𝔱
        noise: 噪聲索引（0 為 ζ₀）
        edges: 可用的出邊標籤
        fan_in: 子節點上限（None 表示無上限）
        allow_poly: 是否允許多項式裝飾
    """

    component: int  # 分量
    noise: int  # 噪聲索引
    edges: tuple[EdgeLabel, ...]  # 出邊
    fan_in: int | None  # 子節點上限
    allow_poly: bool  # 多項式裝飾

    @property
    def needs_child(self) -> bool:
        return self.noise == 0


@dataclass(frozen=True, slots=True)
class Rule:
    """All node types of a system plus the polynomial bound."""

    node_types: tuple[NodeType, ...]
    components: int
    max_poly_degree: int = 2

    def types_for(self, component: int) -> tuple[NodeType, ...]:
        return tuple(node for node in self.node_types if node.component == component)

    def edge_labels(self) -> tuple[EdgeLabel, ...]:
        return tuple(sorted({edge for node in self.node_types for edge in node.edges}))


def state_variables(component_count: int, with_gradient: bool) -> list[str]:
    names = [state_symbol(sort).name for sort in range(1, component_count + 1)]
    if with_gradient:
        names += [state_symbol(sort, (0, 1)).name for sort in range(1, component_count + 1)]
    return names


def parse_system(spec: EquationSpec) -> list[ParsedComponent]:
    """Parse every coefficient expression of the spec with the whitelisted grammar."""
    count = spec.component_count
    parsed = []
    for component in spec.components:
        parsed.append(
            ParsedComponent(
                a=parse_expression(component.a, ["x1"]),
                b=parse_expression(component.b, ["x1"]),
                f={index: parse_expression(text, state_variables(count, False)) for index, text in component.f.items()},
                g=parse_expression(component.g, state_variables(count, True)),
            )
        )
    return parsed


def _fan_in(expression: sympy.Expr, cap: int | None) -> int | None:
    symbols = sorted(expression.free_symbols, key=lambda symbol: symbol.name)
    degree: int | None = None
    if not symbols:
        degree = 0
    elif expression.is_polynomial(*symbols):
        degree = int(sympy.Poly(expression, *symbols).total_degree())
    if cap is None:
        return degree
    return cap if degree is None else min(degree, cap)


def _edges(expression: sympy.Expr) -> tuple[EdgeLabel, ...]:
    edges = set()
    for symbol in expression.free_symbols:
        decoded = parse_state_symbol(symbol)
        if decoded is not None:
            edges.add(EdgeLabel(*decoded))
    return tuple(sorted(edges))


def build_rule(spec: EquationSpec, parsed: list[ParsedComponent] | None = None) -> Rule:
    """Node types per component derived from the dependencies of f and g."""
    parsed = parse_system(spec) if parsed is None else parsed
    node_types = []
    for component, data in enumerate(parsed, start=1):
        for noise in range(0, spec.noise_count + 1):
            expression = sympy.expand(data.nonlinearity(noise))
            if expression == 0:
                continue
            edges = _edges(expression)
            node_types.append(
                NodeType(
                    component=component,
                    noise=noise,
                    edges=edges,
                    fan_in=_fan_in(expression, spec.max_fan_in),
                    allow_poly=bool(edges),
                )
            )
    return Rule(tuple(node_types), spec.component_count, spec.max_poly_degree)


def poly_indices(max_degree: int) -> list[MultiIndex]:
    """Polynomial exponents with |k|_s ≤ max_degree."""
    return [(k0, k1) for k0 in range(max_degree // 2 + 1) for k1 in range(max_degree - 2 * k0 + 1)]


def subcriticality(rule: Rule, assignment: DegreeAssignment) -> dict[int, Fraction]:
    """Lower bounds L_𝔱 of right-hand-side tree degrees.

    Fixed point of L_𝔱 = min over node types of α_l + p·min(0, min_e(2 + L_s − |e|_s)).
    Raises SpecError unless every L_𝔱 > −2, i.e. every solution regularity
    ρ_𝔱 = 2 + L_𝔱 is positive.
    """
    components = range(1, rule.components + 1)
    bounds = {
        component: min((assignment.alpha(node.noise) for node in rule.types_for(component)), default=Fraction(0))
        for component in components
    }
    for _ in range(SUBCRITICAL_ITERATIONS):
        updated = {}
        for component in components:
            lowest = Fraction(0)
            for node in rule.types_for(component):
                gain = min(
                    (assignment.beta + bounds[edge.sort] - scaled_norm(edge.derivative) for edge in node.edges),
                    default=Fraction(0),
                )
                if gain < 0 and node.fan_in is None:
                    raise SpecError(
                        f"component {component}: unbounded fan-in with negative edge gain ({gain}) for noise {node.noise}"
                    )
                node_degree = assignment.alpha(node.noise) + (node.fan_in or 0) * min(Fraction(0), gain)
                lowest = min(lowest, node_degree)
            updated[component] = lowest
        failing = [component for component, bound in updated.items() if bound <= -assignment.beta]
        if failing:
            raise SpecError(f"system is not subcritical: solution regularity non-positive for components {failing}")
        if updated == bounds:
            return bounds
        bounds = updated
    raise SpecError("system is not subcritical: degree lower bounds do not stabilise")


def _branch_pool(
    node: NodeType, previous: dict[int, frozenset[DecoratedTree]], assignment: DegreeAssignment
) -> list[tuple[Fraction, EdgeLabel, DecoratedTree]]:
    pool = []
    for edge in node.edges:
        for child in previous.get(edge.sort, ()):
            contribution = trees.degree(child, assignment) + assignment.beta - scaled_norm(edge.derivative)
            pool.append((contribution, edge, child))
    pool.sort(key=lambda item: (item[0], item[1], item[2].key))
    return pool


def _grow(
    node: NodeType,
    poly: MultiIndex,
    pool: list[tuple[Fraction, EdgeLabel, DecoratedTree]],
    bound: Fraction,
    assignment: DegreeAssignment,
    out: set[DecoratedTree],
) -> None:
    base = assignment.alpha(node.noise) + scaled_norm(poly)
    slots = node.fan_in
    if slots is not None and poly != ZERO:
        slots -= 1
    if slots is not None and slots < 0:
        return

    def visit(start: int, chosen: list[tuple[EdgeLabel, DecoratedTree]], partial: Fraction, left: int | None) -> None:
        if partial < bound and (chosen or not node.needs_child):
            out.add(DecoratedTree(NodeDeco(node.noise, poly), tuple(chosen)))
            if len(out) > MAX_TREES:
                raise SpecError("non-terminating basis generation: tree count exceeded")
        if left == 0:
            return
        for index in range(start, len(pool)):
            contribution, edge, child = pool[index]
            rest = 0 if left is None else left - 1
            reachable = partial + contribution + rest * min(Fraction(0), contribution)
            if reachable >= bound:
                if contribution >= 0:
                    break
                continue
            chosen.append((edge, child))
            visit(index, chosen, partial + contribution, None if left is None else left - 1)
            chosen.pop()

    visit(0, [], base, slots)


def right_hand_side_trees(
    rule: Rule, assignment: DegreeAssignment, bound: Fraction, show_progress: bool = False
) -> dict[int, frozenset[DecoratedTree]]:
    """Trees of every component with degree < bound, built by fixed-point rounds."""
    current: dict[int, frozenset[DecoratedTree]] = {component: frozenset() for component in range(1, rule.components + 1)}
    rounds = tqdm(range(MAX_ROUNDS), desc="basis rounds", disable=not show_progress)
    for round_index in rounds:
        updated = {}
        for component in current:
            found: set[DecoratedTree] = set()
            for node in rule.types_for(component):
                pool = _branch_pool(node, current, assignment)
                polys = poly_indices(rule.max_poly_degree) if node.allow_poly else [ZERO]
                for poly in polys:
                    _grow(node, poly, pool, bound, assignment, found)
            updated[component] = frozenset(found)
        logger.debug("basis round %d: %s", round_index, {key: len(value) for key, value in updated.items()})
        if updated == current:
            rounds.close()
            return current
        current = updated
    raise SpecError(f"non-terminating basis generation after {MAX_ROUNDS} rounds")


def generate_basis(spec: EquationSpec, cutoff: Fraction | None = None, show_progress: bool = False) -> Basis:
    """All conforming trees with deg < γ: polynomials, right-hand-side trees and planted trees."""
    gamma = spec.cutoff_value if cutoff is None else Fraction(cutoff)
    assignment = spec.degree_assignment()
    rule = build_rule(spec)
    lower = subcriticality(rule, assignment)
    floor = min(Fraction(0), min(lower.values(), default=Fraction(0)))
    bound = max(gamma, gamma - floor - 1)
    produced = right_hand_side_trees(rule, assignment, bound, show_progress)

    collected: set[DecoratedTree] = set()
    for k in poly_indices(rule.max_poly_degree):
        if scaled_norm(k) < gamma:
            collected.add(trees.polynomial(k))
    for component_trees in produced.values():
        collected.update(tree for tree in component_trees if trees.degree(tree, assignment) < gamma)
    for edge in rule.edge_labels():
        for child in produced.get(edge.sort, ()):
            candidate = trees.planted(edge, child)
            if trees.degree(candidate, assignment) < gamma:
                collected.add(candidate)

    ordered = tuple(sorted(collected, key=lambda tree: (trees.degree(tree, assignment), tree.key)))
    logger.info("generated %d basis trees below cutoff %s for %s", len(ordered), gamma, spec.name)
    return Basis(ordered, assignment, gamma, spec.component_count)


def _conforms_rhs(tree: DecoratedTree, rule: Rule, component: int) -> bool:
    for node in rule.types_for(component):
        if node.noise != tree.root.noise:
            continue
        if node.needs_child and not tree.children:
            continue
        if tree.root.poly != ZERO and (not node.allow_poly or scaled_norm(tree.root.poly) > rule.max_poly_degree):
            continue
        used = len(tree.children) + (1 if tree.root.poly != ZERO else 0)
        if node.fan_in is not None and used > node.fan_in:
            continue
        if all(edge in node.edges and _conforms_rhs(child, rule, edge.sort) for edge, child in tree.children):
            return True
    return False


def conforms(tree: DecoratedTree, rule: Rule) -> bool:
    """Whether the tree is a polynomial, a right-hand-side tree or a planted one."""
    if trees.is_polynomial(tree):
        return scaled_norm(tree.root.poly) <= rule.max_poly_degree
    if trees.is_planted(tree):
        edge, child = tree.children[0]
        return edge in rule.edge_labels() and _conforms_rhs(child, rule, edge.sort)
    return any(
        _conforms_rhs(tree, rule, component) for component in range(1, rule.components + 1)
    )


def _dependency_diagnostics(spec: EquationSpec) -> list[Diagnostic]:
    diagnostics = []
    count = spec.component_count
    for index, component in enumerate(spec.components, start=1):
        checks: Iterable[tuple[str, str, list[str]]] = [
            ("a", component.a, ["x1"]),
            ("b", component.b, ["x1"]),
            ("g", component.g, state_variables(count, True)),
        ] + [(f"f{noise}", text, state_variables(count, False)) for noise, text in component.f.items()]
        for label, text, variables in checks:
            try:
                parse_expression(text, variables)
            except SpecError as exc:
                diagnostics.append(Diagnostic(f"expression:{index}:{label}", False, str(exc)))
    return diagnostics


def validate_spec(spec: EquationSpec) -> list[Diagnostic]:
    """Ellipticity, admissible dependencies, subcriticality and cutoff sanity."""
    diagnostics = _dependency_diagnostics(spec)
    if diagnostics:
        return diagnostics
    parsed = parse_system(spec)
    points = np.linspace(0.0, 2.0 * np.pi, ELLIPTICITY_SAMPLES, endpoint=False)
    for index, data in enumerate(parsed, start=1):
        values = sample_on_torus(data.a, points)
        minimum = float(np.min(values))
        if not np.all(np.isfinite(values)) or minimum <= ELLIPTICITY_FLOOR:
            diagnostics.append(Diagnostic("ellipticity", False, f"component {index}: min a = {minimum:.3g} on the torus"))
        else:
            diagnostics.append(Diagnostic("ellipticity", True, f"component {index}: min a = {minimum:.3g}"))

    try:
        bounds = subcriticality(build_rule(spec, parsed), spec.degree_assignment())
    except SpecError as exc:
        diagnostics.append(Diagnostic("subcriticality", False, str(exc)))
    else:
        summary = ", ".join(f"ρ_{component} = {2 + bound}" for component, bound in bounds.items())
        diagnostics.append(Diagnostic("subcriticality", True, summary or "no noise-driven components"))

    gamma = spec.cutoff_value
    if gamma > 2:
        diagnostics.append(Diagnostic("cutoff", False, f"cutoff {gamma} is large; the basis may be big", "warning"))
    else:
        diagnostics.append(Diagnostic("cutoff", True, f"cutoff {gamma}"))
    for diagnostic in diagnostics:
        if not diagnostic.passed:
            logger.warning("spec %s: %s failed: %s", spec.name, diagnostic.check, diagnostic.message)
    return diagnostics


def require_valid(spec: EquationSpec) -> None:
    """Raise SpecError on the first failing error-level diagnostic."""
    for diagnostic in validate_spec(spec):
        if not diagnostic.passed and diagnostic.severity == "error":
            raise SpecError(f"{diagnostic.check}: {diagnostic.message}")
