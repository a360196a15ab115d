"""Annotate captions into the interchange corpus format.

The NLP toolkit is pluggable: any object with
``annotate_sentence(text) -> dict`` can be used. The built-in annotator
is deterministic and dependency-free (lexicon + suffix POS tagging,
pattern NER, and a chunk-based constituency parse whose leaf yield
always equals the token sequence). A CoreNLP-server adapter is provided
for environments that have one running.
"""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import Optional, Protocol, Union

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+(?:[-'/][A-Za-z0-9]+)*|\S")
_SENT_SPLIT_RE = re.compile(r"(?<=[.!?])\s+(?=[A-Z0-9(])")

_LEXICON = {
    "the": "DT", "a": "DT", "an": "DT", "this": "DT", "these": "DT",
    "that": "DT", "those": "DT", "all": "PDT", "both": "PDT",
    "of": "IN", "in": "IN", "on": "IN", "at": "IN", "by": "IN", "with": "IN",
    "within": "IN", "from": "IN", "into": "IN", "during": "IN", "after": "IN",
    "before": "IN", "under": "IN", "over": "IN", "through": "IN", "near": "IN",
    "between": "IN", "without": "IN", "via": "IN",
    "and": "CC", "or": "CC", "but": "CC",
    "is": "VBZ", "are": "VBP", "was": "VBD", "were": "VBD", "be": "VB",
    "been": "VBN", "has": "VBZ", "have": "VBP", "had": "VBD",
    "shows": "VBZ", "show": "VBP", "showed": "VBD", "shown": "VBN",
    "contains": "VBZ", "contain": "VBP", "demonstrates": "VBZ",
    "demonstrated": "VBN", "presents": "VBZ", "presented": "VBN",
    "reveals": "VBZ", "reveal": "VBP", "appears": "VBZ", "consists": "VBZ",
    "may": "MD", "can": "MD", "must": "MD", "should": "MD", "will": "MD",
    "its": "PRP$", "their": "PRP$", "his": "PRP$", "her": "PRP$",
    "it": "PRP", "they": "PRP", "there": "EX",
    "one": "CD", "two": "CD", "three": "CD", "four": "CD", "five": "CD",
    "six": "CD", "seven": "CD", "eight": "CD", "nine": "CD", "ten": "CD",
    "several": "JJ", "present": "JJ", "absent": "JJ",
    "normal": "JJ", "abnormal": "JJ", "acute": "JJ", "chronic": "JJ",
    "large": "JJ", "small": "JJ", "left": "JJ", "right": "JJ",
    "upper": "JJ", "lower": "JJ", "most": "JJS", "not": "RB",
}

_DATE_UNITS = frozenset(
    ("year", "years", "month", "months", "week", "weeks", "day", "days", "hour", "hours")
)

_FINITE_TAGS = ("VBZ", "VBP", "VBD", "MD")


class Annotator(Protocol):
    def annotate_sentence(self, text: str) -> dict: ...


def tokenize(text: str) -> list[tuple[str, int, int]]:
    return [(m.group(0), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def split_sentences(text: str) -> list[str]:
    parts = [part.strip() for part in _SENT_SPLIT_RE.split(text.strip())]
    return [part for part in parts if part]


def tag_tokens(words: list[str]) -> list[str]:
    tags = []
    for word in words:
        lowered = word.lower()
        if lowered in _LEXICON:
            tags.append(_LEXICON[lowered])
        elif re.fullmatch(r"\d+(?:\.\d+)?(?:/\d+)?", word):
            tags.append("CD")
        elif not any(ch.isalnum() for ch in word):
            tags.append(word if word in (".", ",", ":") else "SYM")
        elif lowered.endswith("ly"):
            tags.append("RB")
        elif lowered.endswith("ing"):
            tags.append("VBG")
        elif lowered.endswith(("ed",)):
            tags.append("VBN")
        elif lowered.endswith(("ous", "al", "ic", "ive", "ar", "able", "oid")):
            tags.append("JJ")
        elif lowered.endswith("s") and len(lowered) > 3 and not lowered.endswith(
            ("ss", "us", "is", "itis", "osis")
        ):
            tags.append("NNS")
        else:
            tags.append("NN")
    return tags


def find_entities(words: list[str], tags: list[str]) -> list[dict]:
    entities = []
    for i, (word, tag) in enumerate(zip(words, tags)):
        if tag != "CD":
            continue
        if i + 1 < len(words) and words[i + 1].lower() in _DATE_UNITS:
            entities.append({"start_token": i, "end_token": i + 1, "label": "DATE"})
        elif re.fullmatch(r"(19|20)\d\d", word):
            entities.append({"start_token": i, "end_token": i, "label": "DATE"})
        else:
            entities.append({"start_token": i, "end_token": i, "label": "NUMBER"})
    return entities


def chunk_parse(words: list[str], tags: list[str]) -> str:
    """Shallow constituency parse; leaf yield equals the token list."""

    def leaf(i: int) -> str:
        text = words[i].replace("(", "-LRB-").replace(")", "-RRB-")
        return f"({tags[i]} {text})"

    # noun-phrase chunks
    chunks: list[tuple[str, int, int]] = []  # (label, start, end) inclusive
    i = 0
    n = len(words)
    while i < n:
        tag = tags[i]
        if tag in ("DT", "PDT", "PRP$", "CD", "JJ", "JJR", "JJS") or tag.startswith("NN"):
            j = i
            saw_noun = False
            while j < n and (
                tags[j] in ("DT", "PDT", "PRP$", "CD", "JJ", "JJR", "JJS", "VBN", "VBG")
                or tags[j].startswith("NN")
            ):
                if tags[j].startswith("NN"):
                    saw_noun = True
                j += 1
            end = j - 1
            while end > i and not tags[end].startswith("NN"):
                end -= 1
            if saw_noun:
                chunks.append(("NP", i, end))
                i = end + 1
                continue
        if tag == "PRP":
            chunks.append(("NP", i, i))
            i += 1
            continue
        chunks.append(("tok", i, i))
        i += 1

    def render_chunk(kind: str, start: int, end: int) -> str:
        inner = " ".join(leaf(k) for k in range(start, end + 1))
        return f"(NP {inner})" if kind == "NP" else leaf(start)

    # assemble: [pre-verb chunks] (VP verb rest...) final punctuation
    rendered: list[str] = []
    verb_at = next(
        (idx for idx, (kind, s, _) in enumerate(chunks)
         if kind == "tok" and tags[s] in _FINITE_TAGS),
        None,
    )
    pieces = []
    for idx, (kind, start, end) in enumerate(chunks):
        piece = render_chunk(kind, start, end)
        # attach IN + following NP as a PP
        pieces.append((kind, start, end, piece))

    def combine(seq: list[tuple]) -> list[str]:
        out: list[str] = []
        k = 0
        while k < len(seq):
            kind, start, end, piece = seq[k]
            if (
                kind == "tok"
                and tags[start] == "IN"
                and k + 1 < len(seq)
                and seq[k + 1][0] == "NP"
            ):
                out.append(f"(PP {piece} {seq[k + 1][3]})")
                k += 2
                continue
            out.append(piece)
            k += 1
        return out

    if verb_at is None:
        body = combine(pieces)
        return "(S " + " ".join(body) + ")"
    before = combine(pieces[:verb_at])
    verb_piece = pieces[verb_at][3]
    after = pieces[verb_at + 1 :]
    trailing = []
    if after and after[-1][0] == "tok" and tags[after[-1][1]] == ".":
        trailing = [after[-1][3]]
        after = after[:-1]
    vp_parts = combine(after)
    # bare predicative adjectives become an ADJP inside the VP
    vp_parts = [
        f"(ADJP {part})" if re.fullmatch(r"\(JJ[RS]? [^()]+\)", part) else part
        for part in vp_parts
    ]
    vp = "(VP " + " ".join([verb_piece] + vp_parts) + ")" if vp_parts else f"(VP {verb_piece})"
    return "(S " + " ".join(before + [vp] + trailing) + ")"


class BuiltinAnnotator:
    """Deterministic, dependency-free annotator."""

    def annotate_sentence(self, text: str) -> dict:
        spans = tokenize(text)
        words = [w for w, _, _ in spans]
        tags = tag_tokens(words)
        return {
            "text": text,
            "tokens": [
                {"text": w, "pos": t, "char_start": s, "char_end": e}
                for (w, s, e), t in zip(spans, tags)
            ],
            "entities": find_entities(words, tags),
            "parse": chunk_parse(words, tags),
        }


class CoreNLPAnnotator:
    """Adapter for a running CoreNLP server (POS, NER, parse)."""

    def __init__(self, url: str = "http://127.0.0.1:9000"):
        self.url = url

    def annotate_sentence(self, text: str) -> dict:
        import requests

        response = requests.post(
            self.url,
            params={
                "properties": json.dumps(
                    {
                        "annotators": "tokenize,ssplit,pos,ner,parse",
                        "outputFormat": "json",
                        "ssplit.isOneSentence": "true",
                    }
                )
            },
            data=text.encode("utf-8"),
            timeout=60,
        )
        response.raise_for_status()
        sentence = response.json()["sentences"][0]
        label_map = {"DATE": "DATE", "TIME": "TIME", "LOCATION": "LOCATION",
                     "NUMBER": "NUMBER", "ORDINAL": "NUMBER", "DURATION": "DATE"}
        entities = []
        for mention in sentence.get("entitymentions", []):
            label = label_map.get(mention.get("ner"))
            if label:
                entities.append(
                    {
                        "start_token": mention["tokenSpan"]["begin"]
                        if "tokenSpan" in mention
                        else mention["docTokenBegin"],
                        "end_token": (
                            mention["tokenSpan"]["end"]
                            if "tokenSpan" in mention
                            else mention["docTokenEnd"]
                        )
                        - 1,
                        "label": label,
                    }
                )
        return {
            "text": text,
            "tokens": [
                {
                    "text": t["originalText"],
                    "pos": t["pos"],
                    "char_start": t["characterOffsetBegin"],
                    "char_end": t["characterOffsetEnd"],
                }
                for t in sentence["tokens"]
            ],
            "entities": entities,
            "parse": re.sub(r"\s+", " ", sentence["parse"]).strip(),
        }


# ---------------------------------------------------------------------------
# Candidates -> interchange corpus


def annotate_candidates(
    rows: list[dict],
    annotator: Optional[Annotator] = None,
    exclude: Optional[set[str]] = None,
) -> dict:
    """Interchange corpus dict from an extraction manifest.

    Rows whose image id or figure label is on the exclusion list are
    dropped (non-pathology images). A sentence the annotator fails on is
    carried with text only (parse null) and logged.
    """
    annotator = annotator or BuiltinAnnotator()
    exclude = exclude or set()
    images = []
    captions = []
    for row in rows:
        caption_text = (row.get("caption") or "").strip()
        image_id = row["image_id"]
        if image_id in exclude or (row.get("figure_label") or "") in exclude:
            logger.info("excluded %s (exclusion list)", image_id)
            continue
        if row.get("flagged"):
            logger.warning("skipping flagged candidate %s: %s", image_id, row.get("note"))
            continue
        if not caption_text or not row.get("image_path"):
            logger.warning("dropping %s: missing caption or image", image_id)
            continue
        image = {
            "image_id": image_id,
            "source": row.get("source", "web"),
            "uri": row["image_path"],
        }
        if image["source"] == "textbook":
            image["page"] = int(row.get("page") or 1)
        if row.get("figure_label"):
            image["figure_label"] = row["figure_label"]
        sentences = []
        for sentence_text in split_sentences(caption_text):
            try:
                sentences.append(annotator.annotate_sentence(sentence_text))
            except Exception as exc:
                logger.warning("annotation failed on %r: %s", sentence_text, exc)
                sentences.append(
                    {"text": sentence_text, "tokens": [], "entities": [], "parse": None}
                )
        if not sentences:
            logger.warning("dropping %s: empty caption", image_id)
            continue
        images.append(image)
        captions.append(
            {
                "caption_id": f"cap-{image_id}",
                "image_id": image_id,
                "raw_text": caption_text,
                "sentences": sentences,
            }
        )
    return {"images": images, "captions": captions}


def load_exclusions(path: Optional[Union[str, Path]]) -> set[str]:
    if path is None:
        return set()
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return {line.strip() for line in lines if line.strip() and not line.startswith("#")}
