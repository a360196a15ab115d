"""Score predicted answers: yes/no accuracy, exact match, macro token F1,
and corpus-level BLEU-n.

Exact match and F1 use the shared answer normalizer (lowercase, strip
punctuation, collapse spaces, strip a leading article). BLEU tokens keep
articles so the brevity penalty reflects real answer lengths. BLEU is
corpus-level with add-one smoothing of n-gram counts for n >= 2; answers
average ~2.5 words, so unsmoothed higher-order precisions degenerate.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import QAPair
from .textnorm import normalize_answer, normalize_text


class EvaluationError(ValueError):
    pass


def _check_aligned(preds: Sequence[str], golds: Sequence[str]) -> None:
    if len(preds) != len(golds):
        raise EvaluationError(
            f"length mismatch: {len(preds)} predictions vs {len(golds)} references"
        )
    if not golds:
        raise EvaluationError("empty evaluation set")


def accuracy_yesno(preds: Sequence[str], golds: Sequence[str]) -> float:
    """Fraction of normalized-equal pairs; golds must be yes/no."""
    _check_aligned(preds, golds)
    for gold in golds:
        if normalize_text(gold) not in ("yes", "no"):
            raise EvaluationError(f"gold answer {gold!r} is not yes/no")
    hits = sum(
        1 for p, g in zip(preds, golds) if normalize_text(p) == normalize_text(g)
    )
    return hits / len(golds)


def exact_match(preds: Sequence[str], golds: Sequence[str]) -> float:
    """Percentage of predictions equal to the reference after normalization."""
    _check_aligned(preds, golds)
    hits = sum(
        1 for p, g in zip(preds, golds) if normalize_answer(p) == normalize_answer(g)
    )
    return 100.0 * hits / len(golds)


def _pair_f1(pred: str, gold: str) -> float:
    pred_tokens = Counter(normalize_answer(pred).split())
    gold_tokens = Counter(normalize_answer(gold).split())
    overlap = sum((pred_tokens & gold_tokens).values())
    if overlap == 0:
        return 0.0
    precision = overlap / sum(pred_tokens.values())
    recall = overlap / sum(gold_tokens.values())
    return 2 * precision * recall / (precision + recall)


def macro_f1(preds: Sequence[str], golds: Sequence[str]) -> float:
    """Mean per-pair bag-of-tokens F1, as a percentage."""
    _check_aligned(preds, golds)
    return 100.0 * sum(_pair_f1(p, g) for p, g in zip(preds, golds)) / len(golds)


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    preds: Sequence[str],
    golds: Sequence[str],
    max_n: int = 4,
    smoothing: bool = True,
) -> float:
    """Corpus-level BLEU with one reference per prediction.

    Geometric mean of clipped modified n-gram precisions for n <= max_n,
    times the brevity penalty exp(1 - r/c) when c < r. With smoothing,
    counts for n >= 2 get add-one smoothing.
    """
    _check_aligned(preds, golds)
    if max_n < 1 or max_n > 4:
        raise EvaluationError(f"max_n must be in 1..4, got {max_n}")
    pred_tokens = [normalize_text(p).split() for p in preds]
    gold_tokens = [normalize_text(g).split() for g in golds]
    c = sum(len(t) for t in pred_tokens)
    r = sum(len(t) for t in gold_tokens)
    if c == 0:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        matched = 0
        total = 0
        for pt, gt in zip(pred_tokens, gold_tokens):
            counts = _ngrams(pt, n)
            if not counts:
                continue
            reference = _ngrams(gt, n)
            matched += sum(min(count, reference[gram]) for gram, count in counts.items())
            total += sum(counts.values())
        if smoothing and n >= 2:
            matched += 1
            total += 1
        if matched == 0 or total == 0:
            return 0.0
        log_sum += math.log(matched / total) / max_n
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return brevity * math.exp(log_sum)


def bleu_all(preds: Sequence[str], golds: Sequence[str], upto: int = 4) -> dict[int, float]:
    return {n: bleu(preds, golds, max_n=n) for n in range(1, upto + 1)}


# ---------------------------------------------------------------------------
# Full evaluation over a gold dataset


@dataclass(frozen=True)
class EvalResult:
    n_yesno: int
    n_open: int
    accuracy_yesno: float | None
    exact_match: float | None
    macro_f1: float | None
    bleu: dict[int, float] = field(default_factory=dict)
    per_type: dict[str, dict] = field(default_factory=dict)
    per_answer_f1: tuple[tuple[str, int, float], ...] = ()

    def to_dict(self) -> dict:
        return {
            "n_yesno": self.n_yesno,
            "n_open": self.n_open,
            "accuracy_yesno": self.accuracy_yesno,
            "exact_match": self.exact_match,
            "macro_f1": self.macro_f1,
            "bleu": {str(n): v for n, v in self.bleu.items()},
            "per_type": self.per_type,
            "per_answer_f1": [list(row) for row in self.per_answer_f1],
        }

    def to_text(self) -> str:
        lines = ["Metric          Score", "-" * 26]
        if self.accuracy_yesno is not None:
            lines.append(f"yes/no accuracy  {100 * self.accuracy_yesno:.1f}%  (n={self.n_yesno})")
        if self.exact_match is not None:
            lines.append(f"exact match      {self.exact_match:.1f}%  (n={self.n_open})")
        if self.macro_f1 is not None:
            lines.append(f"macro F1         {self.macro_f1:.1f}%")
        for n, score in sorted(self.bleu.items()):
            lines.append(f"BLEU-{n}           {score:.4f}")
        if self.per_type:
            lines.append("")
            lines.append("Type             n    EM%     F1%")
            for qtype, row in sorted(self.per_type.items()):
                em = f"{row['exact_match']:.1f}" if row["exact_match"] is not None else "-"
                f1 = f"{row['macro_f1']:.1f}" if row["macro_f1"] is not None else "-"
                lines.append(f"{qtype:<15} {row['count']:>4} {em:>6} {f1:>7}")
        return "\n".join(lines) + "\n"


def evaluate(
    gold_pairs: Sequence[QAPair],
    predictions: dict[str, str],
    top_answers: int = 20,
) -> EvalResult:
    """Score a prediction map {qa_id: answer} against gold pairs."""
    if not gold_pairs:
        raise EvaluationError("empty evaluation set")
    missing = [qa.qa_id for qa in gold_pairs if qa.qa_id not in predictions]
    if missing:
        raise EvaluationError(
            f"missing predictions for {len(missing)} questions, e.g. {missing[:3]}"
        )
    yesno = [qa for qa in gold_pairs if qa.qtype == "yes_no"]
    open_qs = [qa for qa in gold_pairs if qa.qtype != "yes_no"]

    acc = None
    if yesno:
        acc = accuracy_yesno(
            [predictions[qa.qa_id] for qa in yesno], [qa.answer for qa in yesno]
        )
    em = f1 = None
    bleu_scores: dict[int, float] = {}
    if open_qs:
        preds = [predictions[qa.qa_id] for qa in open_qs]
        golds = [qa.answer for qa in open_qs]
        em = exact_match(preds, golds)
        f1 = macro_f1(preds, golds)
        bleu_scores = bleu_all(preds, golds)

    per_type: dict[str, dict] = {}
    for qtype in sorted({qa.qtype for qa in gold_pairs}):
        subset = [qa for qa in gold_pairs if qa.qtype == qtype]
        preds = [predictions[qa.qa_id] for qa in subset]
        golds = [qa.answer for qa in subset]
        row: dict = {"count": len(subset), "exact_match": None, "macro_f1": None}
        if qtype == "yes_no":
            row["accuracy"] = accuracy_yesno(preds, golds)
        else:
            row["exact_match"] = exact_match(preds, golds)
            row["macro_f1"] = macro_f1(preds, golds)
        per_type[qtype] = row

    by_answer: dict[str, list[float]] = {}
    for qa in open_qs:
        key = normalize_answer(qa.answer)
        by_answer.setdefault(key, []).append(_pair_f1(predictions[qa.qa_id], qa.answer))
    ranked = sorted(by_answer.items(), key=lambda kv: (-len(kv[1]), kv[0]))[:top_answers]
    per_answer = tuple(
        (answer, len(scores), 100.0 * sum(scores) / len(scores))
        for answer, scores in ranked
    )

    return EvalResult(
        n_yesno=len(yesno),
        n_open=len(open_qs),
        accuracy_yesno=acc,
        exact_match=em,
        macro_f1=f1,
        bleu=bleu_scores,
        per_type=per_type,
        per_answer_f1=per_answer,
    )
