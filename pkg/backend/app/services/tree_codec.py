"""Text and JSON codecs for decorated trees.

Grammar::

    tree  := ("X^" pair)? "z" int branch*
    branch := "I[" int "," pair "](" tree ")"
    pair  := "(" int "," int ")"

Whitespace between tokens is ignored.
"""

from __future__ import annotations

from typing import Any

from ..models.errors import SpecError, TreeSyntaxError
from ..models.tree import DecoratedTree, EdgeLabel, NodeDeco


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def skip_space(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, token: str) -> bool:
        self.skip_space()
        return self.text.startswith(token, self.pos)

    def expect(self, token: str) -> None:
        if not self.peek(token):
            raise TreeSyntaxError(f"expected {token!r}", self.pos)
        self.pos += len(token)

    def integer(self) -> int:
        self.skip_space()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise TreeSyntaxError("expected integer", start)
        return int(self.text[start:self.pos])

    def pair(self) -> tuple[int, int]:
        self.expect("(")
        first = self.integer()
        self.expect(",")
        second = self.integer()
        self.expect(")")
        return first, second

    def tree(self) -> DecoratedTree:
        poly = (0, 0)
        if self.peek("X^"):
            self.expect("X^")
            poly = self.pair()
        self.expect("z")
        noise_index = self.integer()
        branches: list[tuple[EdgeLabel, DecoratedTree]] = []
        while self.peek("I["):
            self.expect("I[")
            start = self.pos
            sort = self.integer()
            self.expect(",")
            derivative = self.pair()
            self.expect("]")
            self.expect("(")
            child = self.tree()
            self.expect(")")
            try:
                edge = EdgeLabel(sort, derivative)
            except SpecError as exc:
                raise TreeSyntaxError(str(exc), start) from exc
            branches.append((edge, child))
        return DecoratedTree(NodeDeco(noise_index, poly), tuple(branches))


def parse_tree(text: str) -> DecoratedTree:
    """Parse the tree grammar; raises TreeSyntaxError with the failing position."""
    parser = _Parser(text)
    tree = parser.tree()
    parser.skip_space()
    if parser.pos != len(text):
        raise TreeSyntaxError("unexpected trailing input", parser.pos)
    return tree


def print_tree(tree: DecoratedTree) -> str:
    return tree.to_text()


def tree_to_json(tree: DecoratedTree) -> dict[str, Any]:
    """Nested object mirroring the tree fields."""
    return {
        "noise": tree.root.noise,
        "poly": list(tree.root.poly),
        "children": [
            {"sort": edge.sort, "derivative": list(edge.derivative), "tree": tree_to_json(child)}
            for edge, child in tree.children
        ],
    }


def tree_from_json(payload: dict[str, Any]) -> DecoratedTree:
    try:
        return DecoratedTree(
            NodeDeco(int(payload["noise"]), tuple(payload.get("poly", (0, 0)))),
            tuple(
                (EdgeLabel(int(branch["sort"]), tuple(branch.get("derivative", (0, 0)))), tree_from_json(branch["tree"]))
                for branch in payload.get("children", ())
            ),
        )
    except (KeyError, TypeError) as exc:
        raise SpecError(f"malformed tree JSON: {exc}") from exc
