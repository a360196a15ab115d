"""Shared text normalization: one normalizer for cleaning and scoring.

The same rules are used by dataset cleaning, review edits, and the
answer-evaluation metrics so that scores are comparable.
"""

from __future__ import annotations

import re
import string

ARTICLES = ("a", "an", "the")

# Characters permitted in cleaned questions/answers. Everything else is
# treated as an irrelevant symbol and removed.
_ALLOWED_RE = re.compile(r"[^\w\s.,;:?!'\"()\-/%°µ]+", re.UNICODE)
_WS_RE = re.compile(r"\s+")
_SPACE_BEFORE_PUNCT_RE = re.compile(r"\s+([.,;:?!%)])")
_SPACE_AFTER_OPEN_RE = re.compile(r"\(\s+")
_PUNCT_STRIP = str.maketrans("", "", string.punctuation)

# Tokens that never carry answer content; used for overlap checks.
STOPWORDS = frozenset(
    """a an the of in on at by for with to from and or is are was were be been
    being this that these those it its their his her as into within during""".split()
)


def collapse_whitespace(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


def clean_text(text: str) -> str:
    """Remove disallowed symbols, collapse spaces, tighten punctuation."""
    text = _ALLOWED_RE.sub(" ", text)
    text = collapse_whitespace(text)
    text = _SPACE_BEFORE_PUNCT_RE.sub(r"\1", text)
    text = _SPACE_AFTER_OPEN_RE.sub("(", text)
    return text


def strip_leading_article(text: str) -> str:
    words = text.split(" ", 1)
    if len(words) == 2 and words[0].lower() in ARTICLES:
        return words[1]
    return text


def normalize_text(text: str) -> str:
    """Lowercase, drop punctuation, collapse spaces (no article handling)."""
    text = text.lower().translate(_PUNCT_STRIP)
    return collapse_whitespace(text)


def normalize_answer(text: str) -> str:
    """The answer normalizer: normalize_text plus leading-article strip."""
    return strip_leading_article(normalize_text(text))


def detokenize(tokens: list[str]) -> str:
    """Join tokens into surface text with standard punctuation spacing."""
    out: list[str] = []
    for token in tokens:
        if out and (token in {".", ",", ";", ":", "?", "!", "%", ")"} or token == "n't"):
            out[-1] = out[-1] + token
        elif out and out[-1].endswith("("):
            out[-1] = out[-1] + token
        else:
            out.append(token)
    return " ".join(out)


def capitalize_first(text: str) -> str:
    for i, ch in enumerate(text):
        if ch.isalpha():
            return text[:i] + ch.upper() + text[i + 1 :]
    return text


def decapitalize_word(word: str) -> str:
    """Lowercase a word unless it looks like an acronym (e.g. "DNA")."""
    if len(word) > 1 and word.isupper():
        return word
    return word.lower()
