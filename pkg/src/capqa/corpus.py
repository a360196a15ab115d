"""Interchange data model: images, captions, annotations, QA pairs, splits.

The on-disk format is UTF-8 JSON with top-level keys "images",
"captions", and optionally "qa_pairs" and "splits". Values are immutable
after load and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Optional, Union

from .ptb import ParseTree, parse_ptb

IMAGE_SOURCES = ("textbook", "web")
QTYPES = ("what", "where", "when", "whose", "how", "how_much_many", "yes_no")
QA_STATUSES = ("generated", "accepted", "edited", "rejected")
ENTITY_LABELS = ("DATE", "TIME", "LOCATION", "NUMBER", "OTHER")


class CorpusError(ValueError):
    """A corpus file is malformed or violates a model invariant."""

    def __init__(self, message: str, violations: Optional[list[str]] = None):
        super().__init__(message)
        self.violations = violations or []


@dataclass(frozen=True)
class ImageRef:
    image_id: str
    source: str
    uri: str
    page: Optional[int] = None
    figure_label: Optional[str] = None


@dataclass(frozen=True)
class Token:
    text: str
    pos: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class EntitySpan:
    start_token: int
    end_token: int
    label: str


@dataclass(frozen=True)
class AnnotatedSentence:
    text: str
    tokens: tuple[Token, ...] = ()
    entities: tuple[EntitySpan, ...] = ()
    parse: Optional[str] = None  # None marks a sentence the parser failed on
    dependencies: Any = None  # carried opaquely, never consumed

    def tree(self) -> ParseTree:
        """Constituency tree with leaves indexed by token position."""
        if self.parse is None:
            raise CorpusError("sentence has no parse")
        tree = parse_ptb(self.parse)
        for index, leaf_node in enumerate(tree.leaves()):
            leaf_node.token_index = index
        return tree


@dataclass(frozen=True)
class CaptionRecord:
    caption_id: str
    image_id: str
    raw_text: str
    sentences: tuple[AnnotatedSentence, ...] = ()


@dataclass(frozen=True)
class Provenance:
    caption_id: str
    sentence_index: int
    rule_id: str
    replaced: Optional[str] = None
    replacement: Optional[str] = None


@dataclass(frozen=True)
class QAPair:
    qa_id: str
    image_id: str
    qtype: str
    question: str
    answer: str
    provenance: Provenance
    status: str = "generated"


@dataclass(frozen=True)
class DatasetSplit:
    train: frozenset[str] = frozenset()
    val: frozenset[str] = frozenset()
    test: frozenset[str] = frozenset()

    def of(self, image_id: str) -> Optional[str]:
        for name in ("train", "val", "test"):
            if image_id in getattr(self, name):
                return name
        return None


@dataclass(frozen=True)
class Corpus:
    images: tuple[ImageRef, ...] = ()
    captions: tuple[CaptionRecord, ...] = ()
    qa_pairs: tuple[QAPair, ...] = ()
    splits: Optional[DatasetSplit] = None

    def image_by_id(self) -> dict[str, ImageRef]:
        return {img.image_id: img for img in self.images}

    def caption_by_id(self) -> dict[str, CaptionRecord]:
        return {cap.caption_id: cap for cap in self.captions}

    def with_qa_pairs(self, pairs: list[QAPair]) -> "Corpus":
        return replace(self, qa_pairs=tuple(pairs))

    def with_splits(self, splits: DatasetSplit) -> "Corpus":
        return replace(self, splits=splits)


# ---------------------------------------------------------------------------
# Validation


def validate_corpus(corpus: Corpus) -> list[str]:
    """All invariant violations, each naming the record and the rule."""
    problems: list[str] = []
    image_ids: set[str] = set()
    for img in corpus.images:
        if img.image_id in image_ids:
            problems.append(f"image {img.image_id!r}: duplicate image_id")
        image_ids.add(img.image_id)
        if img.source not in IMAGE_SOURCES:
            problems.append(f"image {img.image_id!r}: unknown source {img.source!r}")
        if img.source == "textbook":
            if img.page is None or img.page < 1:
                problems.append(
                    f"image {img.image_id!r}: textbook images need a positive page"
                )
        elif img.page is not None:
            problems.append(f"image {img.image_id!r}: page only allowed for textbook source")

    caption_ids: set[str] = set()
    for cap in corpus.captions:
        if cap.caption_id in caption_ids:
            problems.append(f"caption {cap.caption_id!r}: duplicate caption_id")
        caption_ids.add(cap.caption_id)
        if cap.image_id not in image_ids:
            problems.append(
                f"caption {cap.caption_id!r}: dangling image reference {cap.image_id!r}"
            )
        if not cap.sentences:
            problems.append(f"caption {cap.caption_id!r}: sentences must be non-empty")
        for i, sentence in enumerate(cap.sentences):
            problems.extend(
                f"caption {cap.caption_id!r} sentence {i}: {msg}"
                for msg in _validate_sentence(sentence)
            )

    qa_ids: set[str] = set()
    for qa in corpus.qa_pairs:
        if qa.qa_id in qa_ids:
            problems.append(f"qa {qa.qa_id!r}: duplicate qa_id")
        qa_ids.add(qa.qa_id)
        if qa.image_id not in image_ids:
            problems.append(f"qa {qa.qa_id!r}: dangling image reference {qa.image_id!r}")
        if qa.qtype not in QTYPES:
            problems.append(f"qa {qa.qa_id!r}: unknown qtype {qa.qtype!r}")
        if qa.status not in QA_STATUSES:
            problems.append(f"qa {qa.qa_id!r}: unknown status {qa.status!r}")
        if not qa.question.endswith("?"):
            problems.append(f"qa {qa.qa_id!r}: question must end with '?'")
        if qa.qtype == "yes_no" and qa.answer not in ("yes", "no"):
            problems.append(f"qa {qa.qa_id!r}: yes_no answer must be 'yes' or 'no'")
        if qa.provenance.caption_id and qa.provenance.caption_id not in caption_ids:
            problems.append(
                f"qa {qa.qa_id!r}: dangling caption reference {qa.provenance.caption_id!r}"
            )

    if corpus.splits is not None:
        s = corpus.splits
        for a, b in (("train", "val"), ("train", "test"), ("val", "test")):
            overlap = getattr(s, a) & getattr(s, b)
            if overlap:
                problems.append(
                    f"splits: {a} and {b} overlap on {sorted(overlap)[:3]}"
                )
        union = s.train | s.val | s.test
        if union != image_ids:
            missing = sorted(image_ids - union)[:3]
            extra = sorted(union - image_ids)[:3]
            problems.append(
                f"splits: union must equal the image set (missing {missing}, unknown {extra})"
            )
    return problems


def _validate_sentence(sentence: AnnotatedSentence) -> list[str]:
    problems: list[str] = []
    prev_end = -1
    for i, token in enumerate(sentence.tokens):
        if token.char_start >= token.char_end:
            problems.append(f"token {i}: char_start must be < char_end")
        if token.char_start < prev_end:
            problems.append(f"token {i}: offsets overlap the previous token")
        prev_end = max(prev_end, token.char_end)
        if token.char_end > len(sentence.text):
            problems.append(f"token {i}: offsets exceed the sentence text")
        elif sentence.text[token.char_start : token.char_end] != token.text:
            problems.append(f"token {i}: offsets do not select the token text")
    for j, entity in enumerate(sentence.entities):
        if entity.label not in ENTITY_LABELS:
            problems.append(f"entity {j}: unknown label {entity.label!r}")
        if not (0 <= entity.start_token <= entity.end_token < len(sentence.tokens)):
            problems.append(f"entity {j}: token span out of range")
    if sentence.parse is not None:
        try:
            tree = parse_ptb(sentence.parse)
        except ValueError as exc:
            problems.append(f"parse: {exc}")
        else:
            leaves = [leaf.text for leaf in tree.leaves()]
            texts = [t.text for t in sentence.tokens]
            if leaves != texts:
                problems.append(
                    f"parse: leaf yield {leaves!r} does not match tokens {texts!r}"
                )
    return problems


# ---------------------------------------------------------------------------
# JSON (de)serialization


def corpus_to_dict(corpus: Corpus) -> dict:
    out: dict[str, Any] = {
        "images": [_image_to_dict(i) for i in corpus.images],
        "captions": [_caption_to_dict(c) for c in corpus.captions],
    }
    if corpus.qa_pairs:
        out["qa_pairs"] = [_qa_to_dict(q) for q in corpus.qa_pairs]
    if corpus.splits is not None:
        out["splits"] = {
            "train": sorted(corpus.splits.train),
            "val": sorted(corpus.splits.val),
            "test": sorted(corpus.splits.test),
        }
    return out


def corpus_from_dict(data: dict) -> Corpus:
    if not isinstance(data, dict):
        raise CorpusError("corpus file must hold a JSON object")
    for key in ("images", "captions"):
        if key not in data:
            raise CorpusError(f"corpus file is missing the {key!r} key")
    try:
        images = tuple(_image_from_dict(d) for d in data["images"])
        captions = tuple(_caption_from_dict(d) for d in data["captions"])
        qa_pairs = tuple(_qa_from_dict(d) for d in data.get("qa_pairs", []))
        splits = None
        if "splits" in data and data["splits"] is not None:
            s = data["splits"]
            splits = DatasetSplit(
                frozenset(s.get("train", [])),
                frozenset(s.get("val", [])),
                frozenset(s.get("test", [])),
            )
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"malformed corpus record: {exc}") from None
    return Corpus(images, captions, qa_pairs, splits)


def _image_to_dict(img: ImageRef) -> dict:
    out = {"image_id": img.image_id, "source": img.source, "uri": img.uri}
    if img.page is not None:
        out["page"] = img.page
    if img.figure_label is not None:
        out["figure_label"] = img.figure_label
    return out


def _image_from_dict(d: dict) -> ImageRef:
    return ImageRef(
        image_id=d["image_id"],
        source=d["source"],
        uri=d["uri"],
        page=d.get("page"),
        figure_label=d.get("figure_label"),
    )


def _caption_to_dict(cap: CaptionRecord) -> dict:
    return {
        "caption_id": cap.caption_id,
        "image_id": cap.image_id,
        "raw_text": cap.raw_text,
        "sentences": [
            {
                "text": s.text,
                "tokens": [
                    {
                        "text": t.text,
                        "pos": t.pos,
                        "char_start": t.char_start,
                        "char_end": t.char_end,
                    }
                    for t in s.tokens
                ],
                "entities": [
                    {
                        "start_token": e.start_token,
                        "end_token": e.end_token,
                        "label": e.label,
                    }
                    for e in s.entities
                ],
                "parse": s.parse,
                **({"dependencies": s.dependencies} if s.dependencies is not None else {}),
            }
            for s in cap.sentences
        ],
    }


def _caption_from_dict(d: dict) -> CaptionRecord:
    sentences = []
    for s in d["sentences"]:
        sentences.append(
            AnnotatedSentence(
                text=s["text"],
                tokens=tuple(
                    Token(t["text"], t["pos"], t["char_start"], t["char_end"])
                    for t in s.get("tokens", [])
                ),
                entities=tuple(
                    EntitySpan(e["start_token"], e["end_token"], e["label"])
                    for e in s.get("entities", [])
                ),
                parse=s.get("parse"),
                dependencies=s.get("dependencies"),
            )
        )
    return CaptionRecord(
        caption_id=d["caption_id"],
        image_id=d["image_id"],
        raw_text=d["raw_text"],
        sentences=tuple(sentences),
    )


def _qa_to_dict(qa: QAPair) -> dict:
    prov: dict[str, Any] = {
        "caption_id": qa.provenance.caption_id,
        "sentence_index": qa.provenance.sentence_index,
        "rule_id": qa.provenance.rule_id,
    }
    if qa.provenance.replaced is not None:
        prov["replaced"] = qa.provenance.replaced
    if qa.provenance.replacement is not None:
        prov["replacement"] = qa.provenance.replacement
    return {
        "qa_id": qa.qa_id,
        "image_id": qa.image_id,
        "qtype": qa.qtype,
        "question": qa.question,
        "answer": qa.answer,
        "provenance": prov,
        "status": qa.status,
    }


def _qa_from_dict(d: dict) -> QAPair:
    p = d["provenance"]
    return QAPair(
        qa_id=d["qa_id"],
        image_id=d["image_id"],
        qtype=d["qtype"],
        question=d["question"],
        answer=d["answer"],
        provenance=Provenance(
            caption_id=p["caption_id"],
            sentence_index=p["sentence_index"],
            rule_id=p["rule_id"],
            replaced=p.get("replaced"),
            replacement=p.get("replacement"),
        ),
        status=d.get("status", "generated"),
    )


def load_corpus(path: Union[str, Path]) -> Corpus:
    """Load and validate a corpus file; raises CorpusError on any fault."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path}: JSON parse error at line {exc.lineno}: {exc.msg}")
    corpus = corpus_from_dict(data)
    problems = validate_corpus(corpus)
    if problems:
        summary = "; ".join(problems[:5])
        more = f" (+{len(problems) - 5} more)" if len(problems) > 5 else ""
        raise CorpusError(f"{path}: invalid corpus: {summary}{more}", problems)
    return corpus


def save_corpus(corpus: Corpus, path: Union[str, Path]) -> None:
    """Write a corpus as stable, diffable JSON (atomic replace)."""
    path = Path(path)
    payload = json.dumps(corpus_to_dict(corpus), ensure_ascii=False, indent=2, sort_keys=True)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(payload + "\n", encoding="utf-8")
        tmp.replace(path)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise CorpusError(f"cannot write {path}: {exc}") from None
