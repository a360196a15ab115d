"""Clean, deduplicate, balance, split, and summarize generated datasets."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence, Union

from .corpus import Corpus, DatasetSplit, QAPair
from .textnorm import clean_text, normalize_text, strip_leading_article

# Questions shorter than this many words are dropped as vague.
MIN_QUESTION_WORDS = 3

# Bare question-word questions removed as vague even when long enough.
DEFAULT_VAGUE_QUESTIONS = frozenset(
    ("what?", "where?", "when?", "whose?", "how?", "how many?", "how much?")
)


class AssemblyError(ValueError):
    pass


def clean_pair(
    qa: QAPair, vague: frozenset[str] = DEFAULT_VAGUE_QUESTIONS
) -> Optional[QAPair]:
    """Normalize one pair; returns None when the question is dropped.

    Whitespace is collapsed, disallowed symbols removed, and a leading
    article stripped from the answer. Idempotent.
    """
    question = clean_text(qa.question)
    answer = clean_text(qa.answer)
    if qa.qtype != "yes_no":
        answer = strip_leading_article(answer)
    if len(question.split()) < MIN_QUESTION_WORDS:
        return None
    if question.lower() in vague:
        return None
    if question == qa.question and answer == qa.answer:
        return qa
    return replace(qa, question=question, answer=answer)


def dedupe_pairs(pairs: Sequence[QAPair]) -> list[QAPair]:
    """Drop same-image duplicates of a normalized question, keeping the
    first in provenance order."""
    seen: set[tuple[str, str]] = set()
    out: list[QAPair] = []
    for qa in pairs:
        key = (qa.image_id, normalize_text(qa.question))
        if key in seen:
            continue
        seen.add(key)
        out.append(qa)
    return out


def balance_yesno(
    pairs: Sequence[QAPair],
    rng_seed: int = 0,
    tolerance: int = 1,
    policy: str = "subsample",
) -> tuple[list[QAPair], dict]:
    """Bring yes and no counts within ``tolerance`` of each other.

    The default policy subsamples the majority side (minimally, with a
    seeded RNG). When balancing is impossible the input is returned
    as-is with the imbalance reported.
    """
    if policy != "subsample":
        raise AssemblyError(f"unknown balance policy {policy!r}")
    yes = [qa for qa in pairs if qa.qtype == "yes_no" and qa.answer == "yes"]
    no = [qa for qa in pairs if qa.qtype == "yes_no" and qa.answer == "no"]
    report = {"yes": len(yes), "no": len(no), "dropped": 0, "balanced": True}
    surplus = abs(len(yes) - len(no)) - max(tolerance, 0)
    if surplus <= 0:
        return list(pairs), report
    majority = yes if len(yes) > len(no) else no
    rng = random.Random(rng_seed)
    doomed = {
        qa.qa_id for qa in rng.sample(sorted(majority, key=lambda q: q.qa_id), surplus)
    }
    out = [qa for qa in pairs if qa.qa_id not in doomed]
    report["dropped"] = surplus
    report["yes"] = sum(1 for q in out if q.qtype == "yes_no" and q.answer == "yes")
    report["no"] = sum(1 for q in out if q.qtype == "yes_no" and q.answer == "no")
    return out, report


def largest_remainder(total: int, ratios: Sequence[float]) -> list[int]:
    exact = [total * r for r in ratios]
    counts = [math.floor(x) for x in exact]
    leftovers = total - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:leftovers]:
        counts[i] += 1
    return counts


def split_dataset(
    corpus_or_ids: Union[Corpus, Iterable[str]],
    seed: int = 0,
    ratios: Sequence[float] = (0.5, 0.3, 0.2),
) -> DatasetSplit:
    """Shuffle images with a seeded RNG and partition by ratio.

    Rounding uses the largest-remainder method; all QA pairs of an image
    follow the image. Bit-reproducible for a fixed seed.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise AssemblyError("ratios must be three positive numbers")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise AssemblyError(f"ratios must sum to 1, got {sum(ratios)}")
    if isinstance(corpus_or_ids, Corpus):
        ids = [img.image_id for img in corpus_or_ids.images]
    else:
        ids = list(corpus_or_ids)
    if len(ids) < 3:
        raise AssemblyError(f"need at least 3 images to split, got {len(ids)}")
    ids = sorted(ids)
    random.Random(seed).shuffle(ids)
    n_train, n_val, _ = largest_remainder(len(ids), ratios)
    return DatasetSplit(
        train=frozenset(ids[:n_train]),
        val=frozenset(ids[n_train : n_train + n_val]),
        test=frozenset(ids[n_train + n_val :]),
    )


# ---------------------------------------------------------------------------
# Statistics


@dataclass(frozen=True)
class FieldStats:
    minimum: float
    average: float
    maximum: float


@dataclass(frozen=True)
class StatsReport:
    n_images: int
    n_questions: int
    questions_per_image: FieldStats
    words_per_question: FieldStats
    words_per_answer: FieldStats
    type_counts: dict[str, int] = field(default_factory=dict)
    type_percentages: dict[str, float] = field(default_factory=dict)
    yes_count: int = 0
    no_count: int = 0
    answer_frequencies: tuple[tuple[str, int], ...] = ()

    def to_dict(self) -> dict:
        return {
            "n_images": self.n_images,
            "n_questions": self.n_questions,
            "questions_per_image": vars(self.questions_per_image),
            "words_per_question": vars(self.words_per_question),
            "words_per_answer": vars(self.words_per_answer),
            "type_counts": self.type_counts,
            "type_percentages": self.type_percentages,
            "yes_count": self.yes_count,
            "no_count": self.no_count,
            "answer_frequencies": [list(row) for row in self.answer_frequencies],
        }

    def to_text(self) -> str:
        rows = [
            ("", "Maximum", "Average", "Minimum"),
            (
                "# questions per image",
                f"{self.questions_per_image.maximum:g}",
                f"{self.questions_per_image.average:.1f}",
                f"{self.questions_per_image.minimum:g}",
            ),
            (
                "# words per question",
                f"{self.words_per_question.maximum:g}",
                f"{self.words_per_question.average:.1f}",
                f"{self.words_per_question.minimum:g}",
            ),
            (
                "# words per answer",
                f"{self.words_per_answer.maximum:g}",
                f"{self.words_per_answer.average:.1f}",
                f"{self.words_per_answer.minimum:g}",
            ),
        ]
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) for row in rows]
        lines.append("")
        lines.append("Question type  Total number and percentage")
        for qtype, count in sorted(self.type_counts.items(), key=lambda kv: (-kv[1], kv[0])):
            pct = self.type_percentages[qtype]
            lines.append(f"{qtype:<13}  {count:,} ({pct:.1f}%)")
        lines.append("")
        lines.append(f"yes: {self.yes_count:,}  no: {self.no_count:,}")
        return "\n".join(lines) + "\n"

    def answer_csv(self) -> str:
        lines = ["rank,answer,count"]
        for rank, (answer, count) in enumerate(self.answer_frequencies, start=1):
            escaped = '"' + answer.replace('"', '""') + '"' if "," in answer or '"' in answer else answer
            lines.append(f"{rank},{escaped},{count}")
        return "\n".join(lines) + "\n"


def _field_stats(values: Sequence[int]) -> FieldStats:
    if not values:
        return FieldStats(0, 0.0, 0)
    return FieldStats(min(values), sum(values) / len(values), max(values))


def compute_stats(corpus: Corpus) -> StatsReport:
    """Dataset summary over cleaned text; word counts split on whitespace.

    Per-image counts cover images that have at least one question.
    """
    pairs = corpus.qa_pairs
    per_image: dict[str, int] = {}
    for qa in pairs:
        per_image[qa.image_id] = per_image.get(qa.image_id, 0) + 1
    q_words = [len(qa.question.split()) for qa in pairs]
    open_answers = [qa.answer for qa in pairs if qa.qtype != "yes_no"]
    a_words = [len(qa.answer.split()) for qa in pairs]
    type_counts: dict[str, int] = {}
    for qa in pairs:
        type_counts[qa.qtype] = type_counts.get(qa.qtype, 0) + 1
    total = len(pairs)
    type_percentages = {
        qtype: (100.0 * count / total if total else 0.0)
        for qtype, count in type_counts.items()
    }
    frequencies: dict[str, int] = {}
    for answer in open_answers:
        frequencies[answer] = frequencies.get(answer, 0) + 1
    ordered = tuple(sorted(frequencies.items(), key=lambda kv: (-kv[1], kv[0])))
    return StatsReport(
        n_images=len(corpus.images),
        n_questions=total,
        questions_per_image=_field_stats(list(per_image.values())),
        words_per_question=_field_stats(q_words),
        words_per_answer=_field_stats(a_words),
        type_counts=type_counts,
        type_percentages=type_percentages,
        yes_count=sum(1 for qa in pairs if qa.qtype == "yes_no" and qa.answer == "yes"),
        no_count=sum(1 for qa in pairs if qa.qtype == "yes_no" and qa.answer == "no"),
        answer_frequencies=ordered,
    )


def assemble(
    corpus: Corpus,
    rng_seed: int = 0,
    balance: bool = False,
    tolerance: int = 1,
) -> tuple[Corpus, dict]:
    """clean -> dedupe -> (optional) yes/no balance, with a stage report."""
    cleaned = [c for c in (clean_pair(qa) for qa in corpus.qa_pairs) if c is not None]
    deduped = dedupe_pairs(cleaned)
    report = {
        "in": len(corpus.qa_pairs),
        "cleaned_out": len(corpus.qa_pairs) - len(cleaned),
        "duplicates_out": len(cleaned) - len(deduped),
        "balance": None,
    }
    pairs = deduped
    if balance:
        pairs, balance_report = balance_yesno(deduped, rng_seed, tolerance)
        report["balance"] = balance_report
    report["out"] = len(pairs)
    return corpus.with_qa_pairs(pairs), report
