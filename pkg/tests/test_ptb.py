import random

import pytest

from capqa.ptb import (
    ForeignNodeError,
    Node,
    ParseTree,
    PtbSyntaxError,
    leaf,
    leaf_yield,
    parse_ptb,
    render_ptb,
)

GALLSTONES = "(S (NP (NNS gallstones)) (VP (VBP are) (ADJP (JJ present))))"


def test_minimal_tree():
    tree = parse_ptb("(NP (DT the) (NN lumen))")
    assert len(tree.nodes()) == 3
    assert leaf_yield(tree) == "the lumen"


def test_hand_constructed_yield():
    tree = parse_ptb(GALLSTONES)
    # independent oracle: walk leaves directly
    texts = []
    stack = [tree.root]
    while stack:
        node = stack.pop(0)
        if node.is_leaf:
            texts.append(node.text)
        else:
            stack = node.children + stack
    assert leaf_yield(tree) == " ".join(texts) == "gallstones are present"


def test_imbalance_is_syntax_error():
    with pytest.raises(PtbSyntaxError):
        parse_ptb("(NP (DT the)")


@pytest.mark.parametrize(
    "bad",
    ["", "NP", "(NP)", "( (NP (NN x)))", "(NP (NN x)) (NP (NN y))", "(NP (NN a b))", "()"],
)
def test_malformed_inputs(bad):
    with pytest.raises(PtbSyntaxError):
        parse_ptb(bad)


def test_syntax_error_carries_offset():
    with pytest.raises(PtbSyntaxError) as err:
        parse_ptb("(NP (DT the) (NN lumen)) junk")
    assert err.value.position == 25


def test_render_single_leaf():
    assert render_ptb(ParseTree(leaf("NN", "cell"))) == "(NN cell)"


def test_render_round_trip():
    tree = parse_ptb(GALLSTONES)
    assert parse_ptb(render_ptb(tree)) == tree


def test_unary_chain_preserved():
    src = "(NP (NP (NN x)))"
    assert render_ptb(parse_ptb(src)) == src


def test_normalizes_whitespace():
    tree = parse_ptb("( NP\n  (DT the)\t(NN lumen) )")
    assert render_ptb(tree) == "(NP (DT the) (NN lumen))"


def test_paren_escapes_decode_and_encode():
    tree = parse_ptb("(NP (-LRB- -LRB-) (NN x) (-RRB- -RRB-))")
    texts = [l.text for l in tree.leaves()]
    assert texts == ["(", "x", ")"]
    assert render_ptb(tree) == "(NP (-LRB- -LRB-) (NN x) (-RRB- -RRB-))"


def test_unicode_preserved():
    src = "(NP (JJ µ-sized) (NN lésion))"
    assert render_ptb(parse_ptb(src)) == src


def test_leaf_yield_subtree():
    tree = parse_ptb("(S (NP (DT the) (NN lumen)) (VP (VBZ is)))")
    np = tree.root.children[0]
    assert leaf_yield(tree, np) == "the lumen"
    assert leaf_yield(tree, np.children[0]) == "the"


def test_leaf_yield_foreign_node():
    tree = parse_ptb(GALLSTONES)
    with pytest.raises(ForeignNodeError):
        leaf_yield(tree, leaf("NN", "stranger"))


def test_parents_spans_paths():
    tree = parse_ptb(GALLSTONES)
    vp = tree.root.children[1]
    assert tree.parent(vp) is tree.root
    assert tree.parent(tree.root) is None
    assert tree.span(vp) == (1, 2)
    assert tree.path(vp) == (1,)
    assert tree.at_path((1, 0)) is vp.children[0]


def test_equality_ignores_token_index():
    a = parse_ptb(GALLSTONES)
    b = parse_ptb(GALLSTONES)
    for i, l in enumerate(a.leaves()):
        l.token_index = i
    assert a == b


def random_tree(rng: random.Random, max_depth: int = 6, max_leaves: int = 12) -> ParseTree:
    labels = ["S", "NP", "VP", "PP", "A", "B"]
    words = ["alpha", "beta", "gamma", "delta", "x", "y2"]
    budget = rng.randint(1, max_leaves)

    def build(depth: int) -> tuple[Node, int]:
        nonlocal budget
        if depth >= max_depth or budget <= 1 or rng.random() < 0.35:
            budget -= 1
            return Node(rng.choice(labels), text=rng.choice(words)), 1
        children = []
        used = 0
        for _ in range(rng.randint(1, 3)):
            if budget <= 0:
                break
            child, n = build(depth + 1)
            children.append(child)
            used += n
        if not children:
            budget -= 1
            return Node(rng.choice(labels), text=rng.choice(words)), 1
        return Node(rng.choice(labels), children=children), used

    root, _ = build(0)
    return ParseTree(root)


def test_round_trip_random_trees():
    rng = random.Random(47)
    for _ in range(1000):
        tree = random_tree(rng)
        rendered = render_ptb(tree)
        again = parse_ptb(rendered)
        assert again == tree
        assert render_ptb(again) == rendered
