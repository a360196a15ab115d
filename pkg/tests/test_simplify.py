from collections import Counter

from capqa.simplify import simplify, simplify_tree
from capqa.treequery import find_all
from conftest import GOLDEN_PARSES, sentence_from_parse


def texts(simples):
    return [s.text for s in simples]


def test_identity_fixpoint():
    simples = simplify(sentence_from_parse(GOLDEN_PARSES["gallstones_two"]))
    assert texts(simples) == ["Two gallstones are present in the lumen."]
    assert simples[0].source_rule == "identity"
    assert simples[0].rule_id == "identity"


def test_coordination_split():
    parse = (
        "(S (S (NP (DT The) (NN mucosa)) (VP (VBZ is) (ADJP (VBN ulcerated))))"
        " (CC and) (S (NP (DT the) (NN wall)) (VP (VBZ is) (ADJP (VBN thickened)))) (. .))"
    )
    simples = simplify(sentence_from_parse(parse))
    assert texts(simples) == ["The mucosa is ulcerated.", "The wall is thickened."]
    assert {s.source_rule for s in simples} == {"coordination_split"}
    assert {s.rule_id for s in simples} == {"R1"}


def test_coordination_token_conservation():
    parse = (
        "(S (S (NP (DT The) (NN mucosa)) (VP (VBZ is) (ADJP (VBN ulcerated))))"
        " (CC and) (S (NP (DT the) (NN wall)) (VP (VBZ is) (ADJP (VBN thickened)))) (. .))"
    )
    tree = sentence_from_parse(parse).tree()
    outputs = simplify_tree(tree)
    content = lambda t: Counter(
        l.text for l in t.root.leaves() if l.label not in (",", ".", "CC", ":")
    )
    combined = Counter()
    for s in outputs:
        combined += content(s.tree)
    assert combined == content(tree) - Counter({"and": 1})


def test_appositive():
    parse = (
        "(S (NP (NP (DT The) (NN tumor)) (, ,) (NP (DT a) (NN lymphoma)) (, ,))"
        " (VP (VBZ infiltrates) (NP (DT the) (NN node))) (. .))"
    )
    simples = simplify(sentence_from_parse(parse))
    assert texts(simples) == [
        "The tumor infiltrates the node.",
        "The tumor is a lymphoma.",
    ]
    assert [s.source_rule for s in simples] == ["appositive", "appositive"]


def test_appositive_plural_copula():
    parse = (
        "(S (NP (NP (DT The) (NNS cells)) (, ,) (NP (JJ malignant) (NNS lymphocytes)) (, ,))"
        " (VP (VBP line) (NP (DT the) (NN duct))) (. .))"
    )
    simples = simplify(sentence_from_parse(parse))
    assert "The cells are malignant lymphocytes." in texts(simples)


def test_coordinated_np_is_not_appositive():
    parse = (
        "(S (NP (NP (DT The) (NN stroma)) (, ,) (NP (DT the) (NN lumen)) (CC and)"
        " (NP (DT the) (NN wall))) (VP (VBP are) (ADJP (JJ normal))) (. .))"
    )
    simples = simplify(sentence_from_parse(parse))
    assert len(simples) == 1 and simples[0].source_rule == "identity"


def test_relative_clause():
    parse = (
        "(S (NP (NP (DT The) (NNS cells)) (, ,) (SBAR (WHNP (WDT which))"
        " (S (VP (VBP line) (NP (DT the) (NN duct))))) (, ,))"
        " (VP (VBP are) (ADJP (JJ columnar))) (. .))"
    )
    simples = simplify(sentence_from_parse(parse))
    assert texts(simples) == ["The cells are columnar.", "The cells line the duct."]
    assert simples[1].source_rule == "relative_clause"


def test_object_relative_passes_through():
    parse = (
        "(S (NP (NP (DT The) (NN lesion)) (, ,) (SBAR (WHNP (WDT which))"
        " (S (NP (DT the) (NN surgeon)) (VP (VBD removed)))) (, ,))"
        " (VP (VBZ is) (ADJP (JJ benign))) (. .))"
    )
    simples = simplify(sentence_from_parse(parse))
    assert len(simples) == 1 and simples[0].source_rule == "identity"


def test_postnominal_participial():
    parse = (
        "(S (NP (NP (JJ chronic) (NN inflammation)) (, ,) (VP (VBG showing)"
        " (NP (DT the) (JJ characteristic) (NNS features)))) (VP (VBZ is) (ADJP (JJ present))) (. .))"
    )
    simples = simplify(sentence_from_parse(parse))
    assert texts(simples) == [
        "Chronic inflammation is present.",
        "Chronic inflammation is showing the characteristic features.",
    ]
    assert simples[1].source_rule == "participial"


def test_clause_final_participial():
    simples = simplify(sentence_from_parse(GOLDEN_PARSES["whose"]))
    assert texts(simples) == [
        "The tumor cells and their nuclei are fairly uniform.",
        "The tumor cells and their nuclei are giving a monotonous appearance.",
    ]


def test_restrictive_participial_untouched():
    simples = simplify(sentence_from_parse(GOLDEN_PARSES["how"]))
    assert len(simples) == 1 and simples[0].source_rule == "identity"


def test_nested_rules_reach_fixpoint():
    # coordination whose left conjunct carries an appositive
    parse = (
        "(S (S (NP (NP (DT The) (NN tumor)) (, ,) (NP (DT a) (NN lymphoma)) (, ,))"
        " (VP (VBZ infiltrates) (NP (DT the) (NN node))))"
        " (CC and) (S (NP (DT the) (NN capsule)) (VP (VBZ is) (ADJP (JJ intact)))) (. .))"
    )
    simples = simplify(sentence_from_parse(parse))
    assert texts(simples) == [
        "The capsule is intact.",
        "The tumor infiltrates the node.",
        "The tumor is a lymphoma.",
    ] or texts(simples) == [
        "The tumor infiltrates the node.",
        "The tumor is a lymphoma.",
        "The capsule is intact.",
    ]


def test_outputs_keep_subject_predicate_shape():
    for name in ("what", "where", "when", "how_many", "whose", "how", "fig5"):
        for simple in simplify(sentence_from_parse(GOLDEN_PARSES[name])):
            assert simple.tree.root.label == "S"
            assert find_all(simple.tree, "S !> __ < (NP $.. VP)"), simple.text


def test_output_count_at_least_one():
    for parse in GOLDEN_PARSES.values():
        assert len(simplify(sentence_from_parse(parse))) >= 1


def test_identity_output_textually_equals_input():
    sentence = sentence_from_parse(GOLDEN_PARSES["how_many"])
    simples = simplify(sentence)
    assert simples[0].text == sentence.text
