import random

import pytest

from capqa.ptb import ParseTree, parse_ptb, render_ptb
from capqa.treequery import (
    AnchorError,
    EditError,
    PatternSyntaxError,
    anchor_pattern,
    apply_edits,
    compile_pattern,
    find_all,
    parse_script,
)
from test_ptb import random_tree

LUMEN = "(NP (DT the) (NN lumen))"
GALLSTONES = "(S (NP (NNS gallstones)) (VP (VBP are) (ADJP (JJ present))))"


# ---------------------------------------------------------------------------
# Pattern grammar


def test_compile_basic_patterns():
    assert compile_pattern("NP << NN").source == "NP << NN"
    pattern = compile_pattern("VP < (VBZ=v . NP=obj)")
    assert pattern.captures == {"v", "obj"}


def test_unknown_relation():
    with pytest.raises(PatternSyntaxError, match="unknown relation '<\\?'"):
        compile_pattern("NP <? NN")


def test_duplicate_capture_rejected():
    with pytest.raises(PatternSyntaxError, match="duplicate capture"):
        compile_pattern("NP=x < NN=x")


def test_capture_inside_negation_rejected():
    with pytest.raises(PatternSyntaxError, match="negated"):
        compile_pattern("NP !< NN=x")


@pytest.mark.parametrize("bad", ["", "NP <", "(NP < NN", "NP < /unclosed", "/ba(d/ < NN"])
def test_malformed_patterns(bad):
    with pytest.raises(PatternSyntaxError):
        compile_pattern(bad)


# ---------------------------------------------------------------------------
# find_all on the spec trees


def test_wildcard_matches_every_node():
    tree = parse_ptb(LUMEN)
    assert len(find_all(tree, "__")) == 3


def test_immediate_dominance():
    tree = parse_ptb(LUMEN)
    matches = find_all(tree, "NP < NN")
    assert len(matches) == 1
    assert matches[0].root is tree.root


def test_immediate_precedence():
    tree = parse_ptb(LUMEN)
    matches = find_all(tree, "DT . NN")
    assert len(matches) == 1
    assert matches[0].root.label == "DT"


def test_regex_and_negation():
    tree = parse_ptb(GALLSTONES)
    assert len(find_all(tree, "/^VB/")) == 1
    assert {m.root.label for m in find_all(tree, "!/^(S|NP|VP|ADJP)$/")} == {
        "NNS", "VBP", "JJ",
    }
    # relation negation: leaves dominate nothing
    leaves = find_all(tree, "__ !< __")
    assert all(m.root.is_leaf for m in leaves)
    assert len(leaves) == 3


def test_disjunction():
    tree = parse_ptb(GALLSTONES)
    matches = find_all(tree, "NNS | JJ")
    assert [m.root.label for m in matches] == ["NNS", "JJ"]


def test_capture_enumeration_order():
    tree = parse_ptb("(VP (NP (NN a)) (NP (NN b)))")
    matches = find_all(tree, "VP < NP=x")
    texts = [m["x"].leaves()[0].text for m in matches]
    assert texts == ["a", "b"]


def test_sister_precedence():
    tree = parse_ptb(GALLSTONES)
    assert len(find_all(tree, "NP $.. VP")) == 1
    assert len(find_all(tree, "VP $.. NP")) == 0
    assert len(find_all(tree, "VP $,, NP")) == 1
    assert len(find_all(tree, "NP $ VP")) == 1


def test_determinism():
    tree = parse_ptb(GALLSTONES)
    pattern = "__=a << __=b"
    first = [(m.root.label, m["b"].label) for m in find_all(tree, pattern)]
    second = [(m.root.label, m["b"].label) for m in find_all(tree, pattern)]
    assert first == second


# ---------------------------------------------------------------------------
# Brute-force oracle: relation semantics from first principles


def oracle_maps(tree: ParseTree):
    parents = {}
    order = []

    def walk(node, parent):
        order.append(node)
        parents[id(node)] = parent
        for child in node.children:
            walk(child, node)

    walk(tree.root, None)
    leaves = [n for n in order if n.is_leaf]
    leaf_pos = {id(n): i for i, n in enumerate(leaves)}

    def span(node):
        ls = [leaf_pos[id(l)] for l in node.leaves()]
        return min(ls), max(ls)

    return parents, order, span


def oracle_relation(tree, a, b, op) -> bool:
    parents, order, span = oracle_maps(tree)
    if op == "<":
        return any(c is b for c in a.children)
    if op == ">":
        return parents[id(a)] is b
    if op == "<<":
        n = parents[id(b)]
        while n is not None:
            if n is a:
                return True
            n = parents[id(n)]
        return False
    if op == ">>":
        return oracle_relation(tree, b, a, "<<")
    if op == ".":
        return span(a)[1] + 1 == span(b)[0]
    if op == ",":
        return span(b)[1] + 1 == span(a)[0]
    if op == "..":
        return span(a)[1] < span(b)[0]
    if op == ",,":
        return span(b)[1] < span(a)[0]
    if op == "$":
        return (
            a is not b
            and parents[id(a)] is not None
            and parents[id(a)] is parents[id(b)]
        )
    if op == "$..":
        if not oracle_relation(tree, a, b, "$"):
            return False
        positions = {id(c): i for i, c in enumerate(parents[id(a)].children)}
        return positions[id(a)] < positions[id(b)]
    if op == "$,,":
        return oracle_relation(tree, b, a, "$..")
    raise AssertionError(op)


ALL_RELATIONS = ["<", ">", "<<", ">>", ".", ",", "..", ",,", "$", "$..", "$,,"]


@pytest.mark.parametrize("op", ALL_RELATIONS)
def test_relations_match_brute_force(op):
    rng = random.Random(hash(op) & 0xFFFF)
    for _ in range(120):
        tree = random_tree(rng, max_depth=4, max_leaves=6)
        pattern = f"__=a {op} __=b"
        found = {
            (id(m["a"]), id(m["b"])) for m in find_all(tree, pattern)
        }
        expected = {
            (id(a), id(b))
            for a in tree.nodes()
            for b in tree.nodes()
            if oracle_relation(tree, a, b, op)
        }
        assert found == expected, f"{op} mismatch on {render_ptb(tree)}"


# ---------------------------------------------------------------------------
# Edit scripts


def test_relabel():
    tree = parse_ptb(LUMEN)
    m = find_all(tree, "NP=n")[0]
    out = apply_edits(tree, "relabel n WHNP", m)
    assert render_ptb(out) == "(WHNP (DT the) (NN lumen))"
    assert render_ptb(tree) == LUMEN  # input untouched


def test_delete():
    tree = parse_ptb(LUMEN)
    m = find_all(tree, "NP < DT=d")[0]
    out = apply_edits(tree, "delete d", m)
    assert render_ptb(out) == "(NP (NN lumen))"


def test_move_fronts_object():
    tree = parse_ptb(
        "(S (NP (NNS gallstones)) (VP (VBP fill) (NP (DT the) (NN lumen))))"
    )
    m = find_all(tree, "S=s < (NP=subj $.. (VP < NP=obj))")[0]
    out = apply_edits(tree, "move obj before subj", m)
    expected = parse_ptb(
        "(S (NP (DT the) (NN lumen)) (NP (NNS gallstones)) (VP (VBP fill)))"
    )
    assert out == expected


def test_insert_positions():
    tree = parse_ptb(LUMEN)
    m = find_all(tree, "NP=n < NN=noun")[0]
    first = apply_edits(tree, "insert (JJ big) first-child n", m)
    assert render_ptb(first) == "(NP (JJ big) (DT the) (NN lumen))"
    before = apply_edits(tree, "insert (JJ big) before noun", m)
    assert render_ptb(before) == "(NP (DT the) (JJ big) (NN lumen))"
    after = apply_edits(tree, "insert (. ?) after noun", m)
    assert render_ptb(after) == "(NP (DT the) (NN lumen) (. ?))"


def test_prune_removes_empty_ancestors():
    tree = parse_ptb("(S (NP (PP (NN x))) (VP (VBZ is)))")
    m = find_all(tree, "NN=x")[0]
    out = apply_edits(tree, "prune x", m)
    assert render_ptb(out) == "(S (VP (VBZ is)))"


def test_ordered_commands_see_earlier_edits():
    tree = parse_ptb("(VP (VBZ shows) (NP (NN necrosis)))")
    m = find_all(tree, "VP < VBZ=v")[0]
    out = apply_edits(tree, "insert (VBZ does) before v\ninsert (VB show) after v\ndelete v", m)
    assert render_ptb(out) == "(VP (VBZ does) (VB show) (NP (NN necrosis)))"


def test_reference_to_deleted_node_fails():
    tree = parse_ptb(LUMEN)
    m = find_all(tree, "NP < DT=d")[0]
    with pytest.raises(EditError, match="removed by an earlier command"):
        apply_edits(tree, "delete d\nrelabel d XX", m)


def test_move_cycle_rejected():
    tree = parse_ptb(GALLSTONES)
    m = find_all(tree, "VP=vp < VBP=v")[0]
    with pytest.raises(EditError, match="cycle"):
        apply_edits(tree, "move vp last-child v", m)


def test_empty_interior_rejected():
    tree = parse_ptb("(S (NP (NN x)) (VP (VBZ is)))")
    m = find_all(tree, "NP < NN=x")[0]
    with pytest.raises(EditError, match="without children"):
        apply_edits(tree, "delete x", m)


def test_binding_must_come_from_same_tree():
    tree = parse_ptb(LUMEN)
    other = parse_ptb(LUMEN)
    m = find_all(other, "DT=d")[0]
    with pytest.raises(EditError, match="does not belong"):
        apply_edits(tree, "delete d", m)


def test_script_parse_errors():
    for bad in ("explode x", "relabel x", "insert x before y", "move a sideways b"):
        with pytest.raises(EditError):
            parse_script(bad)


def test_edit_locality():
    rng = random.Random(7)
    for _ in range(50):
        tree = random_tree(rng, max_depth=4, max_leaves=8)
        nodes = [n for n in tree.nodes() if n is not tree.root and not n.is_leaf]
        targets = [n for n in nodes if len(tree.parent(n).children) > 1]
        if not targets:
            continue
        target = rng.choice(targets)
        pattern = anchor_pattern(tree, target)
        out = apply_edits(tree, "relabel t ZZZ", find_all(tree, pattern)[0])
        # every node outside the edited subtree is structurally unchanged
        touched = tree.path(target)
        for node in tree.nodes():
            path = tree.path(node)
            if path[: len(touched)] == touched:
                continue
            if len(path) < len(touched) and touched[: len(path)] == path:
                continue  # ancestor of the edit
            assert out.at_path(path) == node


# ---------------------------------------------------------------------------
# Anchored patterns


def test_anchor_pattern_picks_second_pp():
    tree = parse_ptb(
        "(VP (VBZ is) (PP (IN on) (NP (NN top))) (PP (IN in) (NP (NN view))))"
    )
    target = tree.root.children[2]
    pattern = anchor_pattern(tree, target)
    match = find_all(tree, pattern)[0]
    assert match["t"] is target
    assert match["r"] is tree.root


def test_anchor_pattern_every_node():
    rng = random.Random(11)
    for _ in range(40):
        tree = random_tree(rng, max_depth=4, max_leaves=8)
        for node in tree.nodes():
            try:
                pattern = anchor_pattern(tree, node)
            except AnchorError:
                continue
            assert find_all(tree, pattern)[0].captures["t"] is node
