"""Shared fixtures: annotated sentences built from hand-written parses."""

from __future__ import annotations

import pytest

from capqa.corpus import (
    AnnotatedSentence,
    CaptionRecord,
    Corpus,
    EntitySpan,
    ImageRef,
    Provenance,
    QAPair,
    Token,
)
from capqa.ptb import parse_ptb
from capqa.textnorm import detokenize


def sentence_from_parse(parse: str, entities=()) -> AnnotatedSentence:
    """Build an AnnotatedSentence whose tokens/offsets come from the parse."""
    tree = parse_ptb(parse)
    leaves = tree.leaves()
    text = detokenize([l.text for l in leaves])
    tokens = []
    cursor = 0
    for leaf in leaves:
        start = text.index(leaf.text, cursor)
        end = start + len(leaf.text)
        tokens.append(Token(leaf.text, leaf.label, start, end))
        cursor = end
    return AnnotatedSentence(
        text=text,
        tokens=tuple(tokens),
        entities=tuple(EntitySpan(*e) for e in entities),
        parse=parse,
    )


# Hand-written constituency parses for the golden caption sentences.
GOLDEN_PARSES: dict[str, str] = {
    "what": (
        "(S (NP (NP (DT The) (NN end)) (PP (IN of) (NP (DT the) (JJ long) (NN bone))))"
        " (VP (VBZ is) (VP (VBN expanded) (PP (IN in) (NP (NP (DT the) (NN region))"
        " (PP (IN of) (NP (NN epiphysis))))))) (. .))"
    ),
    "where": (
        "(S (NP (DT The) (JJ left) (NN ventricle)) (VP (VBZ is)"
        " (PP (IN on) (NP (DT the) (JJR lower) (NN right)))"
        " (PP (IN in) (NP (NP (DT this) (JJ apical) (JJ four-chamber) (NN view))"
        " (PP (IN of) (NP (DT the) (NN heart)))))) (. .))"
    ),
    "when": (
        "(S (PP (IN After) (NP (NP (CD 1) (NN year)) (PP (IN of) (NP (NN abstinence)))))"
        " (, ,) (NP (JJS most) (NNS scars)) (VP (VBP are) (ADJP (VBN gone))) (. .))"
    ),
    "how_many": (
        "(S (NP (CD Two) (JJ multi-faceted) (NNS gallstones)) (VP (VBP are)"
        " (ADJP (JJ present)) (PP (IN in) (NP (DT the) (NN lumen)))) (. .))"
    ),
    "whose": (
        "(S (NP (NP (DT The) (NN tumor) (NNS cells)) (CC and) (NP (PRP$ their) (NNS nuclei)))"
        " (VP (VBP are) (ADJP (RB fairly) (JJ uniform)) (, ,)"
        " (S (VP (VBG giving) (NP (DT a) (JJ monotonous) (NN appearance))))) (. .))"
    ),
    "how": (
        "(S (NP (NP (DT The) (JJ trabecular) (NN bone)) (VP (VBG forming)"
        " (NP (DT the) (NN marrow) (NN space)))) (VP (VBZ shows)"
        " (NP (NP (NNS trabeculae)) (PP (IN with) (NP (NP (JJ osteoclastic) (NN activity))"
        " (PP (IN at) (NP (DT the) (NNS margins))))))) (. .))"
    ),
    "fig5": (
        "(S (NP (NN Microscopy)) (VP (VBZ shows) (NP (NP (JJ coagulative) (NN necrosis))"
        " (PP (IN of) (NP (NP (DT the) (JJ affected) (NN bowel) (NN wall)) (CC and)"
        " (NP (JJ thrombosed) (NNS vessels)))))) (. .))"
    ),
    "serum": (
        "(S (NP (NN Serum) (NN electrophoresis)) (VP (VBZ shows)"
        " (NP (JJ normal) (NN serum) (NN pattern))) (. .))"
    ),
    "gallstones_two": (
        "(S (NP (CD Two) (NNS gallstones)) (VP (VBP are) (ADJP (JJ present))"
        " (PP (IN in) (NP (DT the) (NN lumen)))) (. .))"
    ),
    "passive": (
        "(S (NP (DT The) (NN lesion)) (VP (VBZ is) (VP (VBN shown)"
        " (PP (IN in) (NP (DT the) (JJ upper) (NN field))))) (. .))"
    ),
}

GOLDEN_ENTITIES = {"when": ((1, 4, "DATE"),)}

# Question each golden sentence must regenerate, keyed by category.
GOLDEN_QUESTIONS = {
    "what": "What is expanded in the region of epiphysis?",
    "where": "Where is the left ventricle in this apical four-chamber view of the heart?",
    "when": "When are most scars gone?",
    "how_many": "How many multi-faceted gallstones are present in the lumen?",
    "whose": "The tumor cells and whose nuclei are fairly uniform, giving a monotonous appearance?",
    "how": "How does the trabecular bone forming the marrow space show trabeculae?",
}
GOLDEN_CATEGORY = {
    "what": "what",
    "where": "where",
    "when": "when",
    "how_many": "how_much_many",
    "whose": "whose",
    "how": "how",
}


def golden_sentence(name: str) -> AnnotatedSentence:
    return sentence_from_parse(GOLDEN_PARSES[name], GOLDEN_ENTITIES.get(name, ()))


def golden_tree(name: str):
    return golden_sentence(name).tree()


@pytest.fixture
def golden_corpus(tmp_path) -> Corpus:
    """One image+caption per golden sentence (used for end-to-end runs)."""
    images = []
    captions = []
    for i, name in enumerate(GOLDEN_PARSES):
        sentence = golden_sentence(name)
        images.append(ImageRef(f"img{i}", "textbook", f"images/{name}.jpg", page=i + 1))
        captions.append(
            CaptionRecord(f"cap{i}-{name}", f"img{i}", sentence.text, (sentence,))
        )
    return Corpus(tuple(images), tuple(captions))


def make_qa(qa_id="q1", image_id="img0", qtype="what", question="What is present?",
            answer="lumen", caption_id="cap0", rule_id="identity/open_what",
            status="generated", sentence_index=0) -> QAPair:
    return QAPair(
        qa_id, image_id, qtype, question, answer,
        Provenance(caption_id, sentence_index, rule_id), status,
    )


@pytest.fixture
def tiny_corpus() -> Corpus:
    sentence = sentence_from_parse(GOLDEN_PARSES["gallstones_two"])
    return Corpus(
        images=(ImageRef("img0", "web", "images/a.jpg"),),
        captions=(CaptionRecord("cap0", "img0", sentence.text, (sentence,)),),
    )
