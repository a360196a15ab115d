import math
import random

import pytest

from capqa.metrics import (
    EvaluationError,
    accuracy_yesno,
    bleu,
    bleu_all,
    evaluate,
    exact_match,
    macro_f1,
)
from conftest import make_qa

# Shared hand-computed fixture (worked by hand, frozen here):
#   pred "necrosis"              gold "necrosis"        EM hit, F1 = 1
#   pred "the cat"               gold "the cat sat"     F1: P=1, R=1/2 -> 2/3
#   pred "coagulative necrosis"  gold "necrosis"        F1: P=1/2, R=1 -> 2/3
#   pred "fibrosis"              gold "inflammation"    F1 = 0
PREDS = ["necrosis", "the cat", "coagulative necrosis", "fibrosis"]
GOLDS = ["necrosis", "the cat sat", "necrosis", "inflammation"]


def test_accuracy_all_correct():
    assert accuracy_yesno(["yes", "no"], ["yes", "no"]) == 1.0


def test_accuracy_half():
    assert accuracy_yesno(["yes", "no"], ["yes", "yes"]) == 0.5


def test_accuracy_normalizes():
    assert accuracy_yesno(["Yes.", " NO "], ["yes", "no"]) == 1.0


def test_accuracy_empty_rejected():
    with pytest.raises(EvaluationError, match="empty evaluation set"):
        accuracy_yesno([], [])


def test_accuracy_requires_yesno_golds():
    with pytest.raises(EvaluationError, match="not yes/no"):
        accuracy_yesno(["yes"], ["maybe"])


def test_length_mismatch():
    for fn in (accuracy_yesno, exact_match, macro_f1, bleu):
        with pytest.raises(EvaluationError, match="length mismatch"):
            fn(["yes"], ["yes", "no"])


def test_exact_match_article_and_case():
    assert exact_match(["The Lumen"], ["lumen"]) == 100.0


def test_exact_match_miss():
    assert exact_match(["necrosis"], ["fibrosis"]) == 0.0


def test_exact_match_identity():
    assert exact_match(["a b c"], ["a b c"]) == 100.0


def test_exact_match_fixture():
    assert exact_match(PREDS, GOLDS) == pytest.approx(25.0)


def test_macro_f1_identity():
    assert macro_f1(["coagulative necrosis"], ["coagulative necrosis"]) == 100.0


def test_macro_f1_partial_overlap():
    assert macro_f1(["coagulative necrosis"], ["necrosis"]) == pytest.approx(100 * 2 / 3)


def test_macro_f1_disjoint():
    assert macro_f1(["fibrosis"], ["necrosis"]) == 0.0


def test_macro_f1_fixture():
    # (1 + 2/3 + 2/3 + 0) / 4 = 7/12
    assert macro_f1(PREDS, GOLDS) == pytest.approx(100 * 7 / 12)


def test_bleu_identity():
    for n in (1, 2, 3, 4):
        assert bleu(["the cat sat"], ["the cat sat"], max_n=n) == pytest.approx(1.0)


def test_bleu_brevity_penalty_case():
    # p1 = 2/2, c=2, r=3 -> BLEU-1 = exp(1 - 3/2)
    assert bleu(["the cat"], ["the cat sat"], max_n=1) == pytest.approx(
        math.exp(1 - 3 / 2), abs=1e-9
    )


def test_bleu_disjoint():
    assert bleu(["fibrosis"], ["necrosis"], max_n=1) == 0.0


def test_bleu_empty_prediction():
    assert bleu([""], ["necrosis"], max_n=1) == 0.0


def test_bleu_fixture_hand_computed():
    # c = 6, r = 6 -> BP = 1
    # p1 = (1 + 2 + 1 + 0) / 6 = 2/3
    # p2 = (0+1+0+0 matched, 0+1+1+0 total) smoothed -> 2/3
    # p3: no trigrams on either side -> smoothed 1/1
    scores = bleu_all(PREDS, GOLDS, upto=3)
    assert scores[1] == pytest.approx(2 / 3, abs=1e-9)
    assert scores[2] == pytest.approx(2 / 3, abs=1e-9)
    assert scores[3] == pytest.approx((2 / 3) ** (2 / 3), abs=1e-9)


def test_bleu_max_n_validated():
    with pytest.raises(EvaluationError):
        bleu(["x"], ["x"], max_n=0)


def test_metrics_permutation_invariant():
    rng = random.Random(13)
    order = list(range(len(PREDS)))
    rng.shuffle(order)
    preds = [PREDS[i] for i in order]
    golds = [GOLDS[i] for i in order]
    assert exact_match(preds, golds) == exact_match(PREDS, GOLDS)
    assert macro_f1(preds, golds) == pytest.approx(macro_f1(PREDS, GOLDS))
    assert bleu(preds, golds) == pytest.approx(bleu(PREDS, GOLDS))


def test_em_bounded_by_f1():
    rng = random.Random(29)
    vocabulary = ["necrosis", "fibrosis", "the lumen", "acute inflammation", "cyst wall"]
    for _ in range(50):
        n = rng.randint(1, 6)
        preds = [rng.choice(vocabulary) for _ in range(n)]
        golds = [rng.choice(vocabulary) for _ in range(n)]
        em = exact_match(preds, golds)
        f1 = macro_f1(preds, golds)
        assert em <= f1 + 1e-9 <= 100 + 1e-9


def gold_pairs():
    return [
        make_qa(qa_id="q1", qtype="yes_no", question="Is necrosis present?", answer="yes"),
        make_qa(qa_id="q2", qtype="yes_no", question="Is fibrosis present?", answer="no"),
        make_qa(qa_id="q3", qtype="what", question="What is seen?", answer="necrosis"),
        make_qa(qa_id="q4", qtype="where", question="Where is the lesion?", answer="left lobe"),
    ]


def test_evaluate_full_report():
    predictions = {"q1": "yes", "q2": "yes", "q3": "necrosis", "q4": "right lobe"}
    result = evaluate(gold_pairs(), predictions)
    assert result.n_yesno == 2 and result.n_open == 2
    assert result.accuracy_yesno == 0.5
    assert result.exact_match == pytest.approx(50.0)
    # pair F1: q3 -> 1, q4 -> overlap "lobe": P=R=1/2 -> 1/2
    assert result.macro_f1 == pytest.approx(100 * (1 + 0.5) / 2)
    assert set(result.bleu) == {1, 2, 3, 4}
    assert result.per_type["yes_no"]["count"] == 2
    assert result.per_type["what"]["exact_match"] == pytest.approx(100.0)
    assert any(row[0] == "necrosis" for row in result.per_answer_f1)
    assert "yes/no accuracy" in result.to_text()


def test_evaluate_missing_predictions():
    with pytest.raises(EvaluationError, match="missing predictions"):
        evaluate(gold_pairs(), {"q1": "yes"})


def test_evaluate_breakdown_counts_sum():
    predictions = {"q1": "yes", "q2": "no", "q3": "necrosis", "q4": "left lobe"}
    result = evaluate(gold_pairs(), predictions)
    assert sum(row["count"] for row in result.per_type.values()) == 4
    assert result.exact_match == pytest.approx(100.0)
    assert result.macro_f1 == pytest.approx(100.0)
    assert all(v == pytest.approx(1.0) for v in result.bleu.values())
