"""Turn simplified declarative sentences into yes/no and open questions.

Every transformation is carried out through the tree-query engine as an
ordered list of (pattern, edit script) steps, so each generated question
carries a replayable trace: applying its steps to the source tree
reproduces the question tree exactly.

Generation outline: lowercase the sentence-initial token, remove or
substitute the answer phrase, split the finite verb into do-support
auxiliary + base form when needed, front the auxiliary before the
subject, front the question phrase, and swap the final period for "?".
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Union

from .corpus import Corpus, EntitySpan, Provenance, QAPair
from .ptb import Node, ParseTree, child_index, leaf, leaf_yield, parse_ptb, render_ptb
from .simplify import SimpleSentence, simplify
from .textnorm import capitalize_first, decapitalize_word, detokenize
from .treequery import (
    AnchorError,
    EditError,
    anchor_pattern,
    apply_edits_mapped,
    compile_pattern,
    find_all,
)


class TransduceError(ValueError):
    """A sentence could not be transformed into a question."""


class NoFiniteVerbError(TransduceError):
    pass


# ---------------------------------------------------------------------------
# Rule catalog: named patterns and edit-script templates. A JSON catalog
# file with the same keys may override any entry at startup.

DEFAULT_CATALOG: dict[str, str] = {
    # patterns
    "first_leaf": "__=w !,, __ !<< __",
    "finite_clause": "S=s !> __ < (NP=subj $.. (VP=vp < /^(MD|VBZ|VBD|VBP)$/=v))",
    "subject_clause": "__=s !> __ < (NP=subj $.. VP=vp)",
    "final_punct": "__=s !> __ < /^\\.$/=p",
    "root": "__=r !> __",
    "skip_adverbial": "SBAR=sbar < IN=i",
    "skip_participial": "NP < (/^,$/ . (VP < /^VB[GN]$/))",
    # edit-script templates
    "lowercase_first": "insert {word} after w\ndelete w",
    "decompose": "insert {aux} before v\ninsert {base} after v\ndelete v",
    "invert": "move v before subj",
    "question_mark": "insert (. ?) after p\ndelete p",
    "append_question_mark": "insert (. ?) last-child r",
    "substitute": "insert {phrase} before t\ndelete t",
    "delete_phrase": "delete t",
    "front": "move t first-child r",
    "insert_front": "insert {phrase} first-child r",
}

QUESTION_PHRASES = {
    "what": "(WHNP (WP what))",
    "where": "(WHADVP (WRB where))",
    "when": "(WHADVP (WRB when))",
    "how": "(WHADVP (WRB how))",
    "whose": "(WP$ whose)",
    "how_many": "(WHADJP (WRB how) (JJ many))",
    "how_much": "(WHADJP (WRB how) (JJ much))",
}

CATEGORY_PRIORITY = {"when": 1, "how_much_many": 2, "whose": 3, "where": 4, "how": 5, "what": 6}

_FINITE_LABELS = ("MD", "VBZ", "VBD", "VBP")
_BE_FINITE = frozenset(("is", "are", "was", "were", "am"))
_HAVE_FINITE = frozenset(("has", "have", "had"))
_DO_FINITE = frozenset(("does", "do", "did"))
_POSSESSIVES = frozenset(("its", "their", "his", "her"))
_TEMPORAL_PREPS = frozenset(("in", "during", "before", "after", "at", "on", "by", "since", "over"))
_STAGE_NOUNS = frozenset(("stage", "stages", "period", "periods", "phase", "phases"))
_WHERE_PREPS = frozenset(("within", "inner", "inside"))
_HOW_PREPS = frozenset(("using", "via", "with", "through"))


def load_rule_catalog(path: Optional[Union[str, Path]] = None) -> dict[str, str]:
    """Built-in rules, optionally overridden by a JSON catalog file."""
    catalog = dict(DEFAULT_CATALOG)
    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        unknown = sorted(set(data) - set(DEFAULT_CATALOG))
        if unknown:
            raise TransduceError(f"unknown rule catalog entries: {unknown}")
        catalog.update(data)
    return catalog


# ---------------------------------------------------------------------------
# Morphology: finite lexical verb -> do-support auxiliary + base form.

_IRREGULAR_BASE = {
    "is": "be", "was": "be", "were": "be", "has": "have", "had": "have",
    "does": "do", "did": "do", "goes": "go", "went": "go",
    "showed": "show", "gave": "give", "took": "take", "saw": "see",
    "arose": "arise", "became": "become", "began": "begin", "fell": "fall",
    "found": "find", "grew": "grow", "lay": "lie", "lies": "lie", "led": "lead",
    "underwent": "undergo", "ran": "run", "came": "come", "made": "make",
    "kept": "keep", "held": "hold", "brought": "bring", "thought": "think",
    "stood": "stand", "meant": "mean", "built": "build", "felt": "feel",
    "lost": "lose", "drew": "draw", "wrote": "write", "left": "leave",
}

# -ed forms whose base keeps a final "e"; suffix rules cover the rest.
_ED_E_RESTORE_SUFFIXES = (
    "at", "it", "iz", "ys", "os", "us", "ut", "ir", "ur", "anc", "enc",
    "erv", "olv", "eas", "aus", "uc", "ibl", "rg", "dg", "in", "ang",
)


def verb_base(word: str, pos: str) -> str:
    w = word.lower()
    if w in _IRREGULAR_BASE:
        return _IRREGULAR_BASE[w]
    if pos == "VBZ":
        if w.endswith("ies") and len(w) > 4:
            return w[:-3] + "y"
        if w.endswith(("sses", "shes", "ches", "xes", "zes", "oes")):
            return w[:-2]
        if w.endswith("s") and not w.endswith("ss"):
            return w[:-1]
        return w
    if pos in ("VBD", "VBN"):
        if w.endswith("ied") and len(w) > 4:
            return w[:-3] + "y"
        if w.endswith("ed"):
            stem = w[:-2]
            if len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] not in "aeiouls":
                return stem[:-1]
            if stem.endswith(_ED_E_RESTORE_SUFFIXES):
                return stem + "e"
            return stem
    return w


def do_auxiliary(pos: str) -> str:
    return {"VBZ": "does", "VBD": "did"}.get(pos, "do")


# ---------------------------------------------------------------------------
# Traces and transform machinery


@dataclass(frozen=True)
class RuleStep:
    pattern: str
    script: str


@dataclass(frozen=True)
class RuleTrace:
    rule_id: str
    steps: tuple[RuleStep, ...]


@dataclass(frozen=True)
class AnswerPhrase:
    node: Node
    category: str
    question_phrase: str


@dataclass(frozen=True)
class GeneratedQA:
    qa: QAPair
    source_tree: ParseTree
    question_tree: ParseTree
    trace: RuleTrace


def replay(tree: ParseTree, trace: RuleTrace) -> ParseTree:
    """Re-apply a trace: each step takes the first match of its pattern."""
    current = tree
    for step in trace.steps:
        matches = find_all(current, compile_pattern(step.pattern))
        if not matches:
            raise TransduceError(f"replay: pattern matched nothing: {step.pattern}")
        current, _ = apply_edits_mapped(current, step.script, matches[0])
    return current


class _Transform:
    """Current tree + accumulated steps + nodes tracked across edits."""

    def __init__(self, tree: ParseTree, catalog: dict[str, str]):
        self.tree = tree
        self.catalog = catalog
        self.steps: list[RuleStep] = []
        self.tracked: dict[str, Node] = {}

    def apply(self, pattern: str, script: str) -> None:
        matches = find_all(self.tree, compile_pattern(pattern))
        if not matches:
            raise TransduceError(f"pattern matched nothing: {pattern}")
        new_tree, mapping = apply_edits_mapped(self.tree, script, matches[0])
        self.tree = new_tree
        self.tracked = {k: mapping.get(id(n), n) for k, n in self.tracked.items()}
        self.steps.append(RuleStep(pattern, script))

    def apply_anchored(self, target: Node, script: str, extra_clauses: str = "") -> None:
        pattern = anchor_pattern(self.tree, target, "t")
        if extra_clauses:
            pattern = f"{pattern} {extra_clauses}"
            matches = find_all(self.tree, compile_pattern(pattern))
            if not matches or matches[0].captures.get("t") is not target:
                raise TransduceError("anchored pattern lost its target")
        self.apply(pattern, script)

    def lowercase_first(self) -> None:
        first = self.tree.leaves()[0]
        if first.label in ("NNP", "NNPS"):
            return
        lowered = decapitalize_word(first.text)
        if lowered == first.text:
            return
        word = render_ptb(leaf(first.label, lowered))
        self.apply(
            self.catalog["first_leaf"],
            self.catalog["lowercase_first"].format(word=word),
        )

    def decompose(self) -> None:
        matches = find_all(self.tree, compile_pattern(self.catalog["finite_clause"]))
        if not matches:
            raise NoFiniteVerbError("no finite verb found")
        m = matches[0]
        v, vp = m["v"], m["vp"]
        if not _needs_do_support(v, vp):
            return
        aux = render_ptb(leaf(v.label, do_auxiliary(v.label)))
        base = render_ptb(leaf("VB", verb_base(v.text, v.label)))
        self.apply(
            self.catalog["finite_clause"],
            self.catalog["decompose"].format(aux=aux, base=base),
        )

    def invert(self) -> None:
        self.apply(self.catalog["finite_clause"], self.catalog["invert"])

    def question_mark(self) -> None:
        matches = find_all(self.tree, compile_pattern(self.catalog["final_punct"]))
        if matches:
            self.apply(self.catalog["final_punct"], self.catalog["question_mark"])
        else:
            self.apply(self.catalog["root"], self.catalog["append_question_mark"])

    def realize(self) -> str:
        return capitalize_first(detokenize([l.text for l in self.tree.root.leaves()]))


def _needs_do_support(v: Node, vp: Node) -> bool:
    if v.label == "MD":
        return False
    w = v.text.lower()
    if w in _BE_FINITE or w in _DO_FINITE:
        return False  # copulas, auxiliaries, and be-passives keep their form
    if w in _HAVE_FINITE:
        for sibling in vp.children:
            if sibling.label == "VP" and sibling.leaves()[0].label == "VBN":
                return False  # perfect auxiliary
    return True


# ---------------------------------------------------------------------------
# Sentence analysis


def _as_tree(sentence: Union[SimpleSentence, ParseTree]) -> ParseTree:
    return sentence.tree if isinstance(sentence, SimpleSentence) else sentence


def _subject_and_vp(tree: ParseTree, catalog: dict[str, str]):
    matches = find_all(tree, compile_pattern(catalog["subject_clause"]))
    if not matches:
        return None, None
    return matches[0]["subj"], matches[0]["vp"]


def is_questionable(tree: ParseTree, catalog: Optional[dict[str, str]] = None) -> bool:
    """Rooted at S with a subject NP followed by a VP."""
    catalog = catalog or DEFAULT_CATALOG
    if tree.root.label != "S":
        return False
    subj, _ = _subject_and_vp(tree, catalog)
    return subj is not None


def has_pronoun_subject(tree: ParseTree, catalog: Optional[dict[str, str]] = None) -> bool:
    catalog = catalog or DEFAULT_CATALOG
    subj, _ = _subject_and_vp(tree, catalog)
    if subj is None:
        return False
    leaves = subj.leaves()
    return len(leaves) == 1 and leaves[0].label in ("PRP", "DT", "EX")


def should_skip(
    sentence: Union[SimpleSentence, ParseTree], catalog: Optional[dict[str, str]] = None
) -> bool:
    """True for adverbial clauses and noun-attached comma participials."""
    catalog = catalog or DEFAULT_CATALOG
    tree = _as_tree(sentence)
    for m in find_all(tree, compile_pattern(catalog["skip_adverbial"])):
        sbar, i = m["sbar"], m["i"]
        if sbar.children and sbar.children[0] is i and i.text.lower() != "that":
            return True
    return bool(find_all(tree, compile_pattern(catalog["skip_participial"])))


# ---------------------------------------------------------------------------
# Answer-phrase classification


def classify_answer_phrases(
    sentence: Union[SimpleSentence, ParseTree],
    entities: tuple[EntitySpan, ...] = (),
    catalog: Optional[dict[str, str]] = None,
) -> list[AnswerPhrase]:
    """Assign question categories to candidate phrases, one per phrase.

    Priority on overlap: when > how much/many > whose > where > how > what.
    """
    catalog = catalog or DEFAULT_CATALOG
    tree = _as_tree(sentence)
    subj, vp = _subject_and_vp(tree, catalog)
    if subj is None or vp is None:
        return []

    picked: dict[int, tuple[Node, str, str, bool]] = {}

    def add(node: Optional[Node], category: str, phrase: str, exempt: bool = False):
        if node is None or not node.leaves():
            return
        if id(node) in picked:
            return  # first (highest-priority) category wins per node
        picked[id(node)] = (node, category, phrase, exempt)

    in_subject = _descendant_set(tree, subj)

    # 1. when: DATE/TIME entities and temporal prepositional phrases
    for span in entities:
        if span.label in ("DATE", "TIME"):
            add(_entity_node(tree, span, lift=_TEMPORAL_PREPS), "when", "when")
    for node in tree.nodes():
        if node.label != "PP" or id(node) in in_subject:
            continue
        words = [l.text.lower() for l in node.leaves()]
        if words[0] in ("before", "after"):
            add(node, "when", "when")
        elif words[0] in ("in", "during") and words[-1] in _STAGE_NOUNS:
            add(node, "when", "when")

    # 2. how much / how many: cardinal numbers and NUMBER entities
    for node in tree.nodes():
        if node.is_leaf and node.label == "CD":
            parent = tree.parent(node)
            target = parent if parent is not None and parent.label == "QP" else node
            add(target, "how_much_many", _count_phrase(tree, target))
    for span in entities:
        if span.label == "NUMBER":
            node = _entity_node(tree, span)
            if node is not None:
                add(node, "how_much_many", _count_phrase(tree, node))

    # 3. whose: possessive pronouns
    for node in tree.nodes():
        if node.is_leaf and node.label == "PRP$" and node.text.lower() in _POSSESSIVES:
            add(node, "whose", "whose")

    # 4. where: location entities and locative prepositional phrases
    for span in entities:
        if span.label == "LOCATION":
            add(_entity_node(tree, span, lift=None), "where", "where")
    for node in tree.nodes():
        if node.label != "PP" or id(node) in in_subject:
            continue
        words = [l.text.lower() for l in node.leaves()]
        if words[0] in _WHERE_PREPS:
            add(node, "where", "where")
        elif words[0] == "on" and ("right" in words or "left" in words):
            add(node, "where", "where")

    # 5. how: predicative adjective phrases and instrumental phrases
    for node in vp.children:
        if node.label == "ADJP" and any(l.label.startswith("JJ") for l in node.leaves()):
            add(node, "how", "how")
    for node in tree.nodes():
        if node.is_leaf or id(node) in in_subject:
            continue
        if node.label not in ("PP", "VP", "S", "ADVP"):
            continue
        first = node.leaves()[0].text.lower()
        parent = tree.parent(node)
        if first in _HOW_PREPS and (
            parent is None or not parent.leaves() or parent.leaves()[0].text.lower() != first
        ):
            add(node, "how", "how")

    # 6. what: subject, object, and the head of a layered of-object
    subj_leaves = subj.leaves()
    if not (len(subj_leaves) == 1 and subj_leaves[0].label in ("PRP", "DT", "EX")):
        add(subj, "what", "what")
    obj = next((c for c in vp.children if c.label == "NP"), None)
    if obj is not None:
        add(obj, "what", "what")
        if (
            len(obj.children) > 1
            and obj.children[0].label == "NP"
            and any(
                c.label == "PP" and c.leaves() and c.leaves()[0].text.lower() == "of"
                for c in obj.children[1:]
            )
        ):
            add(obj.children[0], "what", "what", exempt=True)

    # Suppression: a phrase inside a higher-priority phrase is dropped.
    chosen = list(picked.values())
    out: list[AnswerPhrase] = []
    for node, category, phrase, exempt in chosen:
        if not exempt and any(
            other is not node
            and CATEGORY_PRIORITY[other_cat] <= CATEGORY_PRIORITY[category]
            and _is_ancestor(tree, other, node)
            for other, other_cat, _, _ in chosen
        ):
            continue
        out.append(AnswerPhrase(node, category, phrase))
    out.sort(key=lambda ap: (CATEGORY_PRIORITY[ap.category], tree.order(ap.node)))
    return out


def _descendant_set(tree: ParseTree, node: Node) -> set[int]:
    return {id(n) for n in node.walk()}


def _is_ancestor(tree: ParseTree, ancestor: Node, node: Node) -> bool:
    current = tree.parent(node)
    while current is not None:
        if current is ancestor:
            return True
        current = tree.parent(current)
    return False


def _entity_node(
    tree: ParseTree, span: EntitySpan, lift: Optional[frozenset] = None
) -> Optional[Node]:
    """Smallest constituent covering the entity, lifted to a governing PP."""
    by_index = {l.token_index: l for l in tree.leaves() if l.token_index is not None}
    if span.start_token not in by_index or span.end_token not in by_index:
        return None
    start = by_index[span.start_token]
    end = by_index[span.end_token]
    node = start
    _, hi = tree.span(end)
    while node is not None:
        n_lo, n_hi = tree.span(node)
        if n_hi >= hi:
            break
        node = tree.parent(node)
    if node is None:
        return None
    if lift:
        current = tree.parent(node)
        while current is not None:
            if current.label == "PP" and current.leaves()[0].text.lower() in lift:
                return current
            current = tree.parent(current)
    return node


def _count_phrase(tree: ParseTree, node: Node) -> str:
    """"how many" for countables, "how much" for mass heads."""
    current = tree.parent(node)
    while current is not None and current.label not in ("NP", "QP"):
        current = tree.parent(current)
    if current is not None:
        nouns = [l for l in current.leaves() if l.label.startswith("NN")]
        if nouns and nouns[-1].label in ("NN", "NNP"):
            return "how_much"
    return "how_many"


# ---------------------------------------------------------------------------
# Question generation


def decompose_main_verb(
    tree: ParseTree, catalog: Optional[dict[str, str]] = None
) -> ParseTree:
    """Split the finite lexical verb into do-support auxiliary + base form.

    Copulas, modals, perfect auxiliaries, and be-passives are unchanged.
    """
    tr = _Transform(tree, catalog or DEFAULT_CATALOG)
    tr.decompose()
    return tr.tree


def invert_to_yesno(
    tree: Union[SimpleSentence, ParseTree],
    ctx: Optional[Provenance] = None,
    qa_id: str = "q0",
    image_id: str = "img0",
    catalog: Optional[dict[str, str]] = None,
) -> GeneratedQA:
    """Subject-auxiliary inversion; the resulting question answers "yes"."""
    source = _as_tree(tree)
    tr = _Transform(source, catalog or DEFAULT_CATALOG)
    tr.lowercase_first()
    tr.decompose()
    tr.invert()
    tr.question_mark()
    provenance = ctx or Provenance("", 0, "yesno")
    qa = QAPair(qa_id, image_id, "yes_no", tr.realize(), "yes", provenance)
    return GeneratedQA(qa, source, tr.tree, RuleTrace(provenance.rule_id, tuple(tr.steps)))


def generate_open(
    sentence: Union[SimpleSentence, ParseTree],
    answer_phrase: AnswerPhrase,
    ctx: Optional[Provenance] = None,
    qa_id: str = "q0",
    image_id: str = "img0",
    catalog: Optional[dict[str, str]] = None,
) -> GeneratedQA:
    """Remove the answer phrase and insert its question phrase.

    Subject-side phrases are substituted in place; predicate-side phrases
    trigger subject-auxiliary inversion with the question phrase fronted.
    """
    catalog = catalog or DEFAULT_CATALOG
    source = _as_tree(sentence)
    subj, _vp = _subject_and_vp(source, catalog)
    if subj is None:
        raise TransduceError("sentence has no subject/predicate structure")
    in_subject = answer_phrase.node is subj or _is_ancestor(source, subj, answer_phrase.node)
    target_path = source.path(answer_phrase.node)

    tr = _Transform(source, catalog)
    tr.lowercase_first()
    target = tr.tree.at_path(target_path)
    answer = leaf_yield(tr.tree, target)
    qp = QUESTION_PHRASES[answer_phrase.question_phrase]

    if in_subject or answer_phrase.category == "whose":
        tr.apply_anchored(target, catalog["substitute"].format(phrase=qp))
    elif answer_phrase.category in ("what", "how_much_many"):
        tr.tracked["wh"] = target
        tr.apply_anchored(target, catalog["substitute"].format(phrase=qp))
        wh = tr.tree.at_path(target_path)
        tr.tracked["wh"] = wh
        tr.decompose()
        tr.invert()
        front = tr.tracked["wh"]
        current = tr.tree.parent(front)
        while current is not None and current.label in ("NP", "QP"):
            if current.label == "NP":
                front = current
            current = tr.tree.parent(current)
        tr.apply_anchored(front, catalog["front"])
    else:  # where / when / how: delete the phrase, front the bare WH word
        parent = tr.tree.parent(target)
        siblings = parent.children
        index = child_index(parent, target)
        comma = None
        if index + 1 < len(siblings) and siblings[index + 1].label == ",":
            comma = siblings[index + 1]
        elif index > 0 and siblings[index - 1].label == ",":
            comma = siblings[index - 1]
        if comma is not None:
            tr.tracked["ans"] = target
            tr.apply_anchored(comma, catalog["delete_phrase"])
            target = tr.tracked.pop("ans")
        if _would_empty_vp(tr.tree, target, catalog):
            extra = "< (NP=subj $.. (VP=vp < /^(MD|VBZ|VBD|VBP)$/=v))"
            tr.apply_anchored(
                target, "delete t\nmove v before subj\ndelete vp", extra_clauses=extra
            )
        else:
            tr.apply_anchored(target, catalog["delete_phrase"])
            tr.decompose()
            tr.invert()
        tr.apply(catalog["root"], catalog["insert_front"].format(phrase=qp))

    tr.question_mark()
    provenance = ctx or Provenance("", 0, f"open_{answer_phrase.category}")
    qa = QAPair(
        qa_id, image_id, answer_phrase.category, tr.realize(), answer, provenance
    )
    return GeneratedQA(qa, source, tr.tree, RuleTrace(provenance.rule_id, tuple(tr.steps)))


def _would_empty_vp(tree: ParseTree, target: Node, catalog: dict[str, str]) -> bool:
    """True when removing ``target`` leaves only the finite verb in its VP."""
    matches = find_all(tree, compile_pattern(catalog["finite_clause"]))
    if not matches:
        return False
    vp, v = matches[0]["vp"], matches[0]["v"]
    if tree.parent(target) is not vp:
        return False
    rest = [c for c in vp.children if c is not target and c is not v]
    return not rest and not _needs_do_support(v, vp)


# ---------------------------------------------------------------------------
# "no"-variant distractors


@dataclass(frozen=True)
class PoolPhrase:
    caption_id: str
    label: str
    text: str
    source: str  # PTB rendering of the phrase subtree


class PhrasePool:
    """Phrases harvested from all captions, keyed by constituent label."""

    def __init__(self, phrases: list[PoolPhrase]):
        self._by_label: dict[str, list[PoolPhrase]] = {}
        seen: set[tuple[str, str, str]] = set()
        for phrase in sorted(phrases, key=lambda p: (p.text, p.caption_id)):
            key = (phrase.label, phrase.caption_id, phrase.text)
            if key in seen:
                continue
            seen.add(key)
            self._by_label.setdefault(phrase.label, []).append(phrase)

    @classmethod
    def build(cls, corpus: Corpus, labels: tuple[str, ...] = ("NP",)) -> "PhrasePool":
        phrases: list[PoolPhrase] = []
        for caption in corpus.captions:
            for sentence in caption.sentences:
                if sentence.parse is None:
                    continue
                tree = sentence.tree()
                for node in tree.nodes():
                    if node.label not in labels or node.is_leaf:
                        continue
                    leaves = node.leaves()
                    if len(leaves) == 1 and leaves[0].label in ("PRP", "DT", "EX", "CD"):
                        continue
                    phrases.append(
                        PoolPhrase(
                            caption.caption_id,
                            node.label,
                            " ".join(l.text for l in leaves),
                            render_ptb(node),
                        )
                    )
        return cls(phrases)

    def candidates(
        self, label: str, exclude_caption: str = "", exclude_text: str = ""
    ) -> list[PoolPhrase]:
        lowered = exclude_text.lower()
        return [
            p
            for p in self._by_label.get(label, [])
            if p.caption_id != exclude_caption and p.text.lower() != lowered
        ]


def make_no_variant(
    generated: GeneratedQA,
    pool: PhrasePool,
    rng: Union[random.Random, int],
    qa_id: Optional[str] = None,
    catalog: Optional[dict[str, str]] = None,
) -> Optional[GeneratedQA]:
    """Replace the head phrase of a yes-question with a pool phrase.

    Returns None (signaled, not fatal) when the pool has no usable phrase
    from a different caption.
    """
    catalog = catalog or DEFAULT_CATALOG
    if isinstance(rng, int):
        rng = random.Random(rng)
    if generated.qa.qtype != "yes_no" or generated.qa.answer != "yes":
        raise TransduceError("no-variants are built from yes questions")
    target = _no_variant_target(generated.question_tree, catalog)
    if target is None:
        return None
    original = leaf_yield(generated.question_tree, target)
    options = pool.candidates(
        "NP", exclude_caption=generated.qa.provenance.caption_id, exclude_text=original
    )
    if not options:
        return None
    choice = rng.choice(options)
    repl_root = parse_ptb(choice.source).root
    first = repl_root.leaves()[0]
    if first.label not in ("NNP", "NNPS"):
        first.text = decapitalize_word(first.text)

    tr = _Transform(generated.question_tree, catalog)
    tr.apply_anchored(target, catalog["substitute"].format(phrase=render_ptb(repl_root)))
    provenance = replace(
        generated.qa.provenance,
        rule_id=generated.qa.provenance.rule_id + "_no",
        replaced=original,
        replacement=" ".join(l.text for l in repl_root.leaves()),
    )
    qa = QAPair(
        qa_id or generated.qa.qa_id + "n",
        generated.qa.image_id,
        "yes_no",
        tr.realize(),
        "no",
        provenance,
    )
    trace = RuleTrace(provenance.rule_id, generated.trace.steps + tuple(tr.steps))
    return GeneratedQA(qa, generated.source_tree, tr.tree, trace)


def _no_variant_target(tree: ParseTree, catalog: dict[str, str]) -> Optional[Node]:
    vp = next((c for c in tree.root.children if c.label == "VP"), None)
    if vp is not None:
        obj = next((c for c in vp.children if c.label == "NP"), None)
        if obj is not None:
            if (
                len(obj.children) > 1
                and obj.children[0].label == "NP"
                and obj.children[1].label in ("PP", "SBAR")
            ):
                return obj.children[0]
            return obj
        for node in vp.walk():
            if node.label == "NP" and not node.is_leaf:
                return node
    return next((c for c in tree.root.children if c.label == "NP"), None)


# ---------------------------------------------------------------------------
# Corpus-level generation


def generate_questions(
    corpus: Corpus,
    seed: int = 0,
    no_variants: bool = True,
    catalog: Optional[dict[str, str]] = None,
) -> tuple[list[GeneratedQA], dict[str, int]]:
    """Run simplify + transduce over a corpus; deterministic under seed."""
    catalog = catalog or DEFAULT_CATALOG
    generated: list[GeneratedQA] = []
    counters: dict[str, int] = {}
    stats = {
        "sentences": 0,
        "unparsed": 0,
        "skipped_adverbial_or_participial": 0,
        "skipped_structure": 0,
        "skipped_pronoun_subject": 0,
        "failed": 0,
        "yes_no": 0,
        "open": 0,
        "no_variants": 0,
        "no_variant_missing": 0,
    }

    def next_id(caption_id: str) -> str:
        counters[caption_id] = counters.get(caption_id, 0) + 1
        return f"{caption_id}-q{counters[caption_id]:03d}"

    for caption in corpus.captions:
        for s_index, sentence in enumerate(caption.sentences):
            stats["sentences"] += 1
            if sentence.parse is None:
                stats["unparsed"] += 1
                continue
            for simple in simplify(sentence):
                if not is_questionable(simple.tree, catalog):
                    stats["skipped_structure"] += 1
                    continue
                if has_pronoun_subject(simple.tree, catalog):
                    stats["skipped_pronoun_subject"] += 1
                    continue
                if should_skip(simple.tree, catalog):
                    stats["skipped_adverbial_or_participial"] += 1
                    continue
                prefix = simple.rule_id
                try:
                    ctx = Provenance(caption.caption_id, s_index, f"{prefix}/yesno")
                    generated.append(
                        invert_to_yesno(
                            simple,
                            ctx,
                            qa_id=next_id(caption.caption_id),
                            image_id=caption.image_id,
                            catalog=catalog,
                        )
                    )
                    stats["yes_no"] += 1
                except (TransduceError, AnchorError, EditError):
                    stats["failed"] += 1
                for phrase in classify_answer_phrases(simple, sentence.entities, catalog):
                    rule = f"{prefix}/open_{phrase.category}"
                    try:
                        ctx = Provenance(caption.caption_id, s_index, rule)
                        generated.append(
                            generate_open(
                                simple,
                                phrase,
                                ctx,
                                qa_id=next_id(caption.caption_id),
                                image_id=caption.image_id,
                                catalog=catalog,
                            )
                        )
                        stats["open"] += 1
                    except (TransduceError, AnchorError, EditError):
                        stats["failed"] += 1

    if no_variants:
        pool = PhrasePool.build(corpus)
        for gen in list(generated):
            if gen.qa.qtype != "yes_no" or gen.qa.answer != "yes":
                continue
            p = gen.qa.provenance
            rng = random.Random(f"{seed}:{p.caption_id}:{p.sentence_index}:{gen.qa.qa_id}")
            try:
                variant = make_no_variant(
                    gen, pool, rng, qa_id=next_id(p.caption_id), catalog=catalog
                )
            except (TransduceError, AnchorError, EditError):
                stats["failed"] += 1
                continue
            if variant is None:
                stats["no_variant_missing"] += 1
            else:
                generated.append(variant)
                stats["no_variants"] += 1

    return generated, stats
