"""Penn-bracketed constituency trees: parsing, rendering, navigation.

A tree node is either an interior node (label + ordered children) or a
leaf (label = POS tag, text = token). Leaves may carry the index of the
token they annotate. Trees are treated as immutable once built; editing
(see treequery) always produces a new tree.
"""

from __future__ import annotations

from typing import Iterator, Optional

# Treebank escapes accepted in leaf text. Labels are kept verbatim
# (the POS tag for "(" is itself "-LRB-").
_TEXT_UNESCAPE = {"-LRB-": "(", "-RRB-": ")"}
_TEXT_ESCAPE = {"(": "-LRB-", ")": "-RRB-"}


class PtbSyntaxError(ValueError):
    """Malformed bracketing; carries the character offset of the fault."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class ForeignNodeError(ValueError):
    """A node was passed that does not belong to the tree."""


class Node:
    """One tree node. ``text`` is set on leaves only."""

    __slots__ = ("label", "children", "text", "token_index")

    def __init__(
        self,
        label: str,
        children: Optional[list["Node"]] = None,
        text: Optional[str] = None,
        token_index: Optional[int] = None,
    ):
        if not label:
            raise ValueError("node label must be nonempty")
        if children and text is not None:
            raise ValueError("a node cannot have both children and text")
        self.label = label
        self.children = list(children) if children else []
        self.text = text
        self.token_index = token_index

    @property
    def is_leaf(self) -> bool:
        return self.text is not None

    def leaves(self) -> list["Node"]:
        if self.is_leaf:
            return [self]
        out: list[Node] = []
        stack = list(reversed(self.children))
        while stack:
            n = stack.pop()
            if n.is_leaf:
                out.append(n)
            else:
                stack.extend(reversed(n.children))
        return out

    def walk(self) -> Iterator["Node"]:
        """Preorder traversal (document order)."""
        yield self
        for child in self.children:
            yield from child.walk()

    def clone(self) -> "Node":
        if self.is_leaf:
            return Node(self.label, text=self.text, token_index=self.token_index)
        return Node(self.label, children=[c.clone() for c in self.children])

    def __eq__(self, other: object) -> bool:
        # Structural equality; token_index is annotation metadata and
        # intentionally ignored (round-tripping through text drops it).
        if not isinstance(other, Node):
            return NotImplemented
        return (
            self.label == other.label
            and self.text == other.text
            and self.children == other.children
        )

    def __hash__(self):
        return id(self)

    def __repr__(self):
        return f"Node({render_ptb(self)!r})"


class ParseTree:
    """A rooted tree plus cached navigation maps (parents, order, spans)."""

    def __init__(self, root: Node):
        self.root = root
        self._nodes: Optional[list[Node]] = None
        self._order: Optional[dict[int, int]] = None
        self._parents: Optional[dict[int, Node]] = None
        self._leaves: Optional[list[Node]] = None
        self._spans: Optional[dict[int, tuple[int, int]]] = None

    def _build(self) -> None:
        nodes: list[Node] = []
        parents: dict[int, Node] = {}
        for node in self.root.walk():
            nodes.append(node)
            for child in node.children:
                parents[id(child)] = node
        self._nodes = nodes
        self._parents = parents
        self._order = {id(n): i for i, n in enumerate(nodes)}
        leaves = [n for n in nodes if n.is_leaf]
        self._leaves = leaves
        leaf_pos = {id(n): i for i, n in enumerate(leaves)}
        spans: dict[int, tuple[int, int]] = {}

        def span(node: Node) -> tuple[int, int]:
            if node.is_leaf:
                s = leaf_pos[id(node)]
                spans[id(node)] = (s, s)
                return s, s
            lo = None
            hi = None
            for child in node.children:
                c_lo, c_hi = span(child)
                lo = c_lo if lo is None else min(lo, c_lo)
                hi = c_hi if hi is None else max(hi, c_hi)
            spans[id(node)] = (lo, hi)  # type: ignore[arg-type]
            return lo, hi  # type: ignore[return-value]

        span(self.root)
        self._spans = spans

    def nodes(self) -> list[Node]:
        if self._nodes is None:
            self._build()
        return self._nodes  # type: ignore[return-value]

    def leaves(self) -> list[Node]:
        if self._leaves is None:
            self._build()
        return self._leaves  # type: ignore[return-value]

    def contains(self, node: Node) -> bool:
        if self._order is None:
            self._build()
        return id(node) in self._order  # type: ignore[operator]

    def order(self, node: Node) -> int:
        """Preorder index of a node within this tree."""
        if self._order is None:
            self._build()
        try:
            return self._order[id(node)]  # type: ignore[index]
        except KeyError:
            raise ForeignNodeError("node does not belong to this tree") from None

    def parent(self, node: Node) -> Optional[Node]:
        if self._parents is None:
            self._build()
        if not self.contains(node):
            raise ForeignNodeError("node does not belong to this tree")
        return self._parents.get(id(node))  # type: ignore[union-attr]

    def span(self, node: Node) -> tuple[int, int]:
        """(first, last) leaf position covered by the node."""
        if self._spans is None:
            self._build()
        try:
            return self._spans[id(node)]  # type: ignore[index]
        except KeyError:
            raise ForeignNodeError("node does not belong to this tree") from None

    def path(self, node: Node) -> tuple[int, ...]:
        """Child-index path from the root down to the node."""
        if not self.contains(node):
            raise ForeignNodeError("node does not belong to this tree")
        rev: list[int] = []
        current = node
        while True:
            parent = self.parent(current)
            if parent is None:
                break
            rev.append(child_index(parent, current))
            current = parent
        return tuple(reversed(rev))

    def at_path(self, path: tuple[int, ...]) -> Node:
        node = self.root
        for index in path:
            node = node.children[index]
        return node

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParseTree):
            return NotImplemented
        return self.root == other.root

    def __hash__(self):
        return id(self)

    def __repr__(self):
        return f"ParseTree({render_ptb(self.root)!r})"


def parse_ptb(text: str) -> ParseTree:
    """Parse a Penn-bracketed string into a tree.

    Exactly one root is required; imbalance, empty labels, and stray
    material raise PtbSyntaxError with the offending offset.
    """
    pos = 0
    n = len(text)

    def skip_ws() -> None:
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def read_atom() -> str:
        nonlocal pos
        start = pos
        while pos < n and not text[pos].isspace() and text[pos] not in "()":
            pos += 1
        return text[start:pos]

    def read_node() -> Node:
        nonlocal pos
        if pos >= n or text[pos] != "(":
            raise PtbSyntaxError("expected '('", pos)
        open_at = pos
        pos += 1
        skip_ws()
        label = read_atom()
        if not label:
            raise PtbSyntaxError("empty node label", pos)
        children: list[Node] = []
        words: list[str] = []
        while True:
            skip_ws()
            if pos >= n:
                raise PtbSyntaxError("unbalanced '(': end of input", open_at)
            if text[pos] == ")":
                pos += 1
                break
            if text[pos] == "(":
                children.append(read_node())
            else:
                words.append(read_atom())
        if children and words:
            raise PtbSyntaxError("mixed words and subtrees under one node", open_at)
        if len(words) > 1:
            raise PtbSyntaxError("leaf with more than one word", open_at)
        if words:
            return Node(label, text=_TEXT_UNESCAPE.get(words[0], words[0]))
        if not children:
            raise PtbSyntaxError("node without children or word", open_at)
        return Node(label, children=children)

    skip_ws()
    root = read_node()
    skip_ws()
    if pos < n:
        raise PtbSyntaxError("trailing material after root", pos)
    return ParseTree(root)


def render_ptb(tree) -> str:
    """Render a tree (or node) to the normalized bracketed form."""
    node = tree.root if isinstance(tree, ParseTree) else tree

    def render(n: Node) -> str:
        if n.is_leaf:
            return f"({n.label} {_TEXT_ESCAPE.get(n.text, n.text)})"
        inner = " ".join(render(c) for c in n.children)
        return f"({n.label} {inner})"

    return render(node)


def leaf_yield(tree: ParseTree, node: Optional[Node] = None) -> str:
    """Space-joined leaf texts of the subtree rooted at ``node``."""
    if node is None:
        node = tree.root
    elif not tree.contains(node):
        raise ForeignNodeError("node does not belong to this tree")
    return " ".join(leaf.text for leaf in node.leaves())


def child_index(parent: Node, child: Node) -> int:
    """Position of ``child`` under ``parent`` by identity (node equality
    is structural, so equal twins must not be conflated)."""
    for i, candidate in enumerate(parent.children):
        if candidate is child:
            return i
    raise ForeignNodeError("node is not a child of the given parent")


def leaf(label: str, text: str, token_index: Optional[int] = None) -> Node:
    return Node(label, text=text, token_index=token_index)


def interior(label: str, *children: Node) -> Node:
    return Node(label, children=list(children))
