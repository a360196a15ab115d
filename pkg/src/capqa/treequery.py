"""Tree-pattern matching and tree surgery over constituency trees.

Patterns are tregex-style: a node description plus relation clauses that
all constrain the same head node, with parentheses for grouping and "|"
for alternatives. Edit scripts are ordered command lists (delete, prune,
relabel, insert, move) whose targets are the capture names bound by a
pattern match. Matching and editing are pure: the input tree is never
modified.

Supported relations::

    A < B    A immediately dominates B          A > B    inverse
    A << B   A properly dominates B             A >> B   inverse
    A . B    A's last leaf immediately precedes B's first leaf
    A , B    inverse of .
    A .. B   all leaves of A precede all leaves of B
    A ,, B   inverse of ..
    A $ B    A and B share a parent, A != B
    A $.. B  sisters, A before B                A $,, B  inverse

A node description is a literal label, a /regex/ (re.search semantics),
or the wildcard __; it may be prefixed with "!" (negated) and suffixed
with "=name" (capture). A relation may be prefixed with "!" (no such
related node exists); captures inside a negated relation are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .ptb import Node, ParseTree, child_index, parse_ptb, render_ptb

RELATIONS = ("$..", "$,,", "<<", ">>", "..", ",,", "<", ">", ".", ",", "$")

_LABEL_RE = re.compile(r"[A-Za-z0-9_$'&^+-]+")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
# Used to detect a malformed relation token for error reporting.
_REL_JUNK_RE = re.compile(r"[<>.,$][<>.,$?*&%^~=]*")


class PatternSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class EditError(ValueError):
    """An edit command could not be applied."""


@dataclass(frozen=True)
class NodeTest:
    kind: str  # "label" | "regex" | "any"
    value: str = ""
    negated: bool = False
    capture: Optional[str] = None
    regex: Optional[re.Pattern] = field(default=None, compare=False)

    def matches(self, node: Node) -> bool:
        if self.kind == "any":
            ok = True
        elif self.kind == "label":
            ok = node.label == self.value
        else:
            ok = bool(self.regex.search(node.label))  # type: ignore[union-attr]
        return not ok if self.negated else ok


@dataclass(frozen=True)
class RelationClause:
    op: str
    arg: "Pattern"
    negated: bool = False


@dataclass(frozen=True)
class PatternSeq:
    test: NodeTest
    clauses: tuple[RelationClause, ...] = ()


@dataclass(frozen=True)
class Pattern:
    """One or more alternative sequences; a node matches if any does."""

    alternatives: tuple[PatternSeq, ...]
    source: str = ""
    captures: frozenset[str] = frozenset()


@dataclass(frozen=True)
class MatchBinding:
    root: Node
    captures: dict[str, Node] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Node:
        return self.captures[name]


class _PatternParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.names: list[str] = []

    def error(self, message: str, position: Optional[int] = None) -> PatternSyntaxError:
        return PatternSyntaxError(message, self.pos if position is None else position)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> Pattern:
        pattern = self.parse_alternatives(in_negation=False)
        if not self.at_end():
            raise self.error(f"unexpected input {self.text[self.pos:]!r}")
        return Pattern(pattern.alternatives, source=self.text, captures=frozenset(self.names))

    def parse_alternatives(self, in_negation: bool) -> Pattern:
        seqs = [self.parse_seq(in_negation)]
        while self.peek() == "|":
            self.pos += 1
            seqs.append(self.parse_seq(in_negation))
        return Pattern(tuple(seqs))

    def parse_seq(self, in_negation: bool) -> PatternSeq:
        test = self.parse_node_test(in_negation)
        clauses: list[RelationClause] = []
        while True:
            self.skip_ws()
            if self.pos >= len(self.text) or self.text[self.pos] in ")|":
                break
            clauses.append(self.parse_clause(in_negation))
        return PatternSeq(test, tuple(clauses))

    def parse_clause(self, in_negation: bool) -> RelationClause:
        negated = False
        if self.peek() == "!":
            self.pos += 1
            negated = True
            self.skip_ws()
        start = self.pos
        op = None
        for candidate in RELATIONS:
            if self.text.startswith(candidate, self.pos):
                follow = self.pos + len(candidate)
                nxt = self.text[follow] if follow < len(self.text) else " "
                if nxt in "<>.,$?*&%^~=":
                    continue  # longer junk run: report below
                op = candidate
                self.pos = follow
                break
        if op is None:
            junk = _REL_JUNK_RE.match(self.text, start)
            if junk:
                raise self.error(f"unknown relation {junk.group(0)!r}", start)
            raise self.error("expected a relation operator", start)
        arg = self.parse_arg(in_negation or negated)
        return RelationClause(op, arg, negated)

    def parse_arg(self, in_negation: bool) -> Pattern:
        if self.peek() == "(":
            self.pos += 1
            inner = self.parse_alternatives(in_negation)
            self.skip_ws()
            if self.pos >= len(self.text) or self.text[self.pos] != ")":
                raise self.error("unbalanced '(' in pattern")
            self.pos += 1
            return inner
        test = self.parse_node_test(in_negation)
        return Pattern((PatternSeq(test),))

    def parse_node_test(self, in_negation: bool) -> NodeTest:
        self.skip_ws()
        negated = False
        if self.pos < len(self.text) and self.text[self.pos] == "!":
            negated = True
            self.pos += 1
            self.skip_ws()
        start = self.pos
        if self.pos >= len(self.text):
            raise self.error("expected a node description")
        ch = self.text[self.pos]
        if ch == "/":
            value = self.read_regex()
            try:
                compiled = re.compile(value)
            except re.error as exc:
                raise self.error(f"bad regex /{value}/: {exc}", start) from None
            kind = "regex"
        else:
            m = _LABEL_RE.match(self.text, self.pos)
            if not m:
                raise self.error(f"expected a node description, found {ch!r}")
            value = m.group(0)
            self.pos = m.end()
            compiled = None
            kind = "any" if value == "__" else "label"
        capture = None
        if self.pos < len(self.text) and self.text[self.pos] == "=":
            self.pos += 1
            m = _NAME_RE.match(self.text, self.pos)
            if not m:
                raise self.error("expected a capture name after '='")
            capture = m.group(0)
            self.pos = m.end()
            if in_negation:
                raise self.error(f"capture ={capture} inside a negated relation", start)
            if capture in self.names:
                raise self.error(f"duplicate capture ={capture}", start)
            self.names.append(capture)
        return NodeTest(kind, value, negated, capture, compiled)

    def read_regex(self) -> str:
        # /.../ with \/ escaping the delimiter
        assert self.text[self.pos] == "/"
        self.pos += 1
        out: list[str] = []
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "\\" and self.pos + 1 < len(self.text) and self.text[self.pos + 1] == "/":
                out.append("/")
                self.pos += 2
                continue
            if ch == "/":
                self.pos += 1
                return "".join(out)
            out.append(ch)
            self.pos += 1
        raise self.error("unterminated regex")


def compile_pattern(text: str) -> Pattern:
    """Compile a pattern string; raises PatternSyntaxError with offset."""
    return _PatternParser(text).parse()


def _related(tree: ParseTree, node: Node, op: str) -> Iterable[Node]:
    if op == "<":
        return node.children
    if op == ">":
        parent = tree.parent(node)
        return [parent] if parent is not None else []
    if op == "<<":
        return [n for n in node.walk() if n is not node]
    if op == ">>":
        out = []
        current = tree.parent(node)
        while current is not None:
            out.append(current)
            current = tree.parent(current)
        return out
    if op == "$" or op == "$.." or op == "$,,":
        parent = tree.parent(node)
        if parent is None:
            return []
        siblings = parent.children
        index = child_index(parent, node)
        if op == "$":
            return [s for s in siblings if s is not node]
        if op == "$..":
            return siblings[index + 1 :]
        return siblings[:index]
    lo, hi = tree.span(node)
    if op == ".":
        return [n for n in tree.nodes() if tree.span(n)[0] == hi + 1]
    if op == ",":
        return [n for n in tree.nodes() if tree.span(n)[1] == lo - 1]
    if op == "..":
        return [n for n in tree.nodes() if tree.span(n)[0] > hi]
    if op == ",,":
        return [n for n in tree.nodes() if tree.span(n)[1] < lo]
    raise ValueError(f"unknown relation {op!r}")


def _match_pattern(tree: ParseTree, pattern: Pattern, node: Node) -> list[dict[str, Node]]:
    results: list[dict[str, Node]] = []
    seen: set[tuple] = set()
    for seq in pattern.alternatives:
        for binding in _match_seq(tree, seq, node):
            key = tuple(sorted((k, id(v)) for k, v in binding.items()))
            if key not in seen:
                seen.add(key)
                results.append(binding)
    return results


def _match_seq(tree: ParseTree, seq: PatternSeq, node: Node) -> list[dict[str, Node]]:
    if not seq.test.matches(node):
        return []
    base: dict[str, Node] = {}
    if seq.test.capture:
        base[seq.test.capture] = node
    assignments = [base]
    for clause in seq.clauses:
        targets = _related(tree, node, clause.op)
        if clause.negated:
            if any(_match_pattern(tree, clause.arg, t) for t in targets):
                return []
            continue
        merged: list[dict[str, Node]] = []
        for target in targets:
            for sub in _match_pattern(tree, clause.arg, target):
                for assignment in assignments:
                    merged.append({**assignment, **sub})
        if not merged:
            return []
        assignments = merged
    return assignments


def find_all(tree: ParseTree, pattern: Union[Pattern, str]) -> list[MatchBinding]:
    """All matches in document order of the matched root; deterministic.

    Every distinct capture assignment is reported, so overlapping matches
    all appear; callers deduplicate if they need to.
    """
    if isinstance(pattern, str):
        pattern = compile_pattern(pattern)
    matches: list[tuple[tuple, MatchBinding]] = []
    seen: set[tuple] = set()
    for node in tree.nodes():
        for binding in _match_pattern(tree, pattern, node):
            key = (id(node),) + tuple(sorted((k, id(v)) for k, v in binding.items()))
            if key in seen:
                continue
            seen.add(key)
            sort_key = (tree.order(node),) + tuple(
                tree.order(binding[name]) for name in sorted(binding)
            )
            matches.append((sort_key, MatchBinding(node, binding)))
    matches.sort(key=lambda pair: pair[0])
    return [m for _, m in matches]


# ---------------------------------------------------------------------------
# Edit scripts


@dataclass(frozen=True)
class EditCommand:
    op: str  # delete | prune | relabel | insert | move
    target: str = ""  # capture name (delete/prune/relabel/move)
    label: str = ""  # relabel
    subtree: str = ""  # insert: PTB source of the new subtree
    position: str = ""  # insert/move: first-child | last-child | before | after
    anchor: str = ""  # insert/move: capture name

    def render(self) -> str:
        if self.op in ("delete", "prune"):
            return f"{self.op} {self.target}"
        if self.op == "relabel":
            return f"relabel {self.target} {self.label}"
        if self.op == "insert":
            return f"insert {self.subtree} {self.position} {self.anchor}"
        return f"move {self.target} {self.position} {self.anchor}"


@dataclass(frozen=True)
class EditScript:
    commands: tuple[EditCommand, ...]
    source: str = ""


_POSITIONS = ("first-child", "last-child", "before", "after")


def parse_script(text: str) -> EditScript:
    """Parse an edit script: one command per line, blank lines ignored.

    Commands::

        delete NAME
        prune NAME
        relabel NAME LABEL
        insert (PTB SUBTREE) POSITION NAME
        move NAME POSITION NAME
    """
    commands: list[EditCommand] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        op, _, rest = line.partition(" ")
        rest = rest.strip()
        if op in ("delete", "prune"):
            if not rest or " " in rest:
                raise EditError(f"{op} expects one capture name: {line!r}")
            commands.append(EditCommand(op, target=rest))
        elif op == "relabel":
            parts = rest.split()
            if len(parts) != 2:
                raise EditError(f"relabel expects NAME LABEL: {line!r}")
            commands.append(EditCommand(op, target=parts[0], label=parts[1]))
        elif op == "insert":
            if not rest.startswith("("):
                raise EditError(f"insert expects a bracketed subtree: {line!r}")
            depth = 0
            end = -1
            for i, ch in enumerate(rest):
                if ch == "(":
                    depth += 1
                elif ch == ")":
                    depth -= 1
                    if depth == 0:
                        end = i
                        break
            if end < 0:
                raise EditError(f"unbalanced subtree in insert: {line!r}")
            subtree = rest[: end + 1]
            parts = rest[end + 1 :].split()
            if len(parts) != 2 or parts[0] not in _POSITIONS:
                raise EditError(f"insert expects POSITION NAME after subtree: {line!r}")
            commands.append(
                EditCommand(op, subtree=subtree, position=parts[0], anchor=parts[1])
            )
        elif op == "move":
            parts = rest.split()
            if len(parts) != 3 or parts[1] not in _POSITIONS:
                raise EditError(f"move expects NAME POSITION NAME: {line!r}")
            commands.append(
                EditCommand(op, target=parts[0], position=parts[1], anchor=parts[2])
            )
        else:
            raise EditError(f"unknown edit command {op!r}")
    return EditScript(tuple(commands), source=text)


class _Surgery:
    """Mutable working state for one apply_edits call."""

    def __init__(self, root: Node):
        self.root = root
        self.rebuild()

    def rebuild(self) -> None:
        self.parents: dict[int, Node] = {}
        for node in self.root.walk():
            for child in node.children:
                self.parents[id(child)] = node

    def attached(self, node: Node) -> bool:
        current = node
        while current is not self.root:
            parent = self.parents.get(id(current))
            if parent is None:
                return False
            current = parent
        return True

    def require(self, node: Node, name: str) -> None:
        if not self.attached(node):
            raise EditError(f"edit references node ={name} removed by an earlier command")

    def detach(self, node: Node) -> None:
        parent = self.parents.get(id(node))
        if parent is None:
            raise EditError("cannot detach the root")
        del parent.children[child_index(parent, node)]
        del self.parents[id(node)]

    def place(self, node: Node, position: str, anchor: Node) -> None:
        if position in ("before", "after"):
            parent = self.parents.get(id(anchor))
            if parent is None:
                raise EditError("cannot insert beside the root")
            index = child_index(parent, anchor)
            if position == "after":
                index += 1
            parent.children.insert(index, node)
            self.parents[id(node)] = parent
        else:
            if anchor.is_leaf:
                raise EditError("cannot add children to a leaf")
            if position == "first-child":
                anchor.children.insert(0, node)
            else:
                anchor.children.append(node)
            self.parents[id(node)] = anchor


def apply_edits(
    tree: ParseTree, script: Union[EditScript, str], binding: MatchBinding
) -> ParseTree:
    """Apply an edit script to a tree under a match binding.

    Returns a new tree; the input is unmodified. Commands run in order
    and later commands see earlier edits.
    """
    new_tree, _ = apply_edits_mapped(tree, script, binding)
    return new_tree


def apply_edits_mapped(
    tree: ParseTree, script: Union[EditScript, str], binding: MatchBinding
) -> tuple[ParseTree, dict[int, Node]]:
    """apply_edits plus the id(old node) -> new node correspondence."""
    if isinstance(script, str):
        script = parse_script(script)
    for name, node in binding.captures.items():
        if not tree.contains(node):
            raise EditError(f"binding ={name} does not belong to the tree")

    mapping: dict[int, Node] = {}

    def clone(node: Node) -> Node:
        copy = (
            Node(node.label, text=node.text, token_index=node.token_index)
            if node.is_leaf
            else Node(node.label, children=[clone(c) for c in node.children])
        )
        mapping[id(node)] = copy
        return copy

    work = _Surgery(clone(tree.root))
    names = {name: mapping[id(node)] for name, node in binding.captures.items()}

    def resolve(name: str) -> Node:
        if name not in names:
            raise EditError(f"edit references undeclared capture ={name}")
        node = names[name]
        work.require(node, name)
        return node

    for command in script.commands:
        if command.op == "delete":
            work.detach(resolve(command.target))
        elif command.op == "prune":
            node = resolve(command.target)
            parent = work.parents.get(id(node))
            work.detach(node)
            while parent is not None and not parent.children:
                grand = work.parents.get(id(parent))
                if grand is None:
                    raise EditError("prune removed the entire tree")
                work.detach(parent)
                parent = grand
        elif command.op == "relabel":
            resolve(command.target).label = command.label
        elif command.op == "insert":
            try:
                fresh = parse_ptb(command.subtree).root
            except ValueError as exc:
                raise EditError(f"bad insert subtree: {exc}") from None
            anchor = resolve(command.anchor)
            work.place(fresh, command.position, anchor)
            for node in fresh.walk():
                for child in node.children:
                    work.parents[id(child)] = node
        elif command.op == "move":
            node = resolve(command.target)
            anchor = resolve(command.anchor)
            if anchor is node or any(n is anchor for n in node.walk()):
                raise EditError("move would create a cycle (anchor inside moved subtree)")
            work.detach(node)
            work.place(node, command.position, anchor)
        else:  # pragma: no cover - parse_script rejects unknown ops
            raise EditError(f"unknown edit command {command.op!r}")

    for node in work.root.walk():
        if not node.is_leaf and not node.children:
            raise EditError(f"edit left interior node {node.label!r} without children")
    return ParseTree(work.root), mapping


# ---------------------------------------------------------------------------
# Anchored patterns: build a pattern whose first match binds a chosen node.


class AnchorError(ValueError):
    """No pattern could be built that selects the node as first match."""


def _desc(label: str) -> str:
    if _LABEL_RE.fullmatch(label) and label != "__":
        return label
    escaped = re.escape(label).replace("/", r"\/")
    return f"/^{escaped}$/"


def _step_desc(tree: ParseTree, node: Node, chain: int, capture: Optional[str]) -> str:
    """Description of ``node`` with up to ``chain`` left-adjacency links."""
    parts = _desc(node.label) + (f"={capture}" if capture else "")
    current = node
    links = []
    for _ in range(chain):
        parent = tree.parent(current)
        if parent is None:
            break
        index = child_index(parent, current)
        if index == 0:
            break
        prev = parent.children[index - 1]
        links.append(prev)
        current = prev
    if not links:
        return parts
    # nest: X , (P1 , (P2 ...))
    inner = _desc(links[-1].label)
    for prev in reversed(links[:-1]):
        inner = f"{_desc(prev.label)} , ({inner})"
    return f"{parts} , ({inner})"


def _path_pattern(tree: ParseTree, target: Node, capture: str, chain: int) -> str:
    path: list[Node] = [target]
    current = target
    while True:
        parent = tree.parent(current)
        if parent is None:
            break
        path.append(parent)
        current = parent
    path.reverse()  # root ... target
    expr = _step_desc(tree, target, chain, capture)
    for ancestor in reversed(path[:-1]):
        step = _step_desc(tree, ancestor, chain if ancestor is not path[0] else 0, None)
        if ancestor is path[0]:
            expr = f"{step}=r !> __ < ({expr})"
        else:
            expr = f"{step} < ({expr})"
    if target is path[0]:  # target is the root itself
        expr = f"{_desc(target.label)}={capture} !> __"
        return expr
    return expr


def anchor_pattern(tree: ParseTree, target: Node, capture: str = "t") -> str:
    """Pattern that binds ``target`` as =``capture`` in the first match.

    The pattern is pinned at the root (captured as =r) and verified
    against the tree; progressively longer left-sibling context is added
    until the first match is the target.
    """
    if not tree.contains(target):
        raise AnchorError("target does not belong to the tree")
    for chain in (0, 1, 2, 4, 8):
        pattern = _path_pattern(tree, target, capture, chain)
        matches = find_all(tree, pattern)
        if matches and matches[0].captures.get(capture) is target:
            return pattern
    raise AnchorError(f"cannot build a first-match pattern for {render_ptb(target)!r}")
