"""Acceptance: extraction fixture pairing and validator-clean annotation."""

import json

from capqa.corpus import corpus_from_dict, validate_corpus

from capqa_ingest.annotate import annotate_candidates
from capqa_ingest.extract import extract_pdf_pairs, write_candidates


def ok(line: str) -> None:
    print(f"PASS: {line}")


def test_two_page_pdf_three_figures(textbook_pdf):
    candidates = extract_pdf_pairs(textbook_pdf)
    assert len(candidates) == 3
    assert all(c.image is not None and c.caption is not None for c in candidates)
    assert all(not c.flagged for c in candidates)
    expected = [
        ("Figure 1", "Lung tissue with acute inflammation."),
        ("Figure 2", "Kidney cortex with two small cysts."),
        ("Fig. 3.1", "Liver section."),
    ]
    for candidate, (label, snippet) in zip(candidates, expected):
        assert candidate.figure_label == label
        assert snippet in candidate.caption_text
    ok("extraction fixture: 2-page PDF yields 3 correctly paired candidates")


def test_mismatched_page_flags_both(mismatch_pdf):
    candidates = extract_pdf_pairs(mismatch_pdf)
    assert len(candidates) == 2
    assert all(c.flagged for c in candidates)
    ok("extraction fixture: mismatched-count page flags both candidates")


def test_annotate_output_passes_primary_validate(textbook_pdf, tmp_path):
    out = tmp_path / "out"
    manifest = write_candidates(extract_pdf_pairs(textbook_pdf), out, stem="tb")
    rows = json.loads(manifest.read_text(encoding="utf-8"))
    corpus_dict = annotate_candidates(rows)
    corpus = corpus_from_dict(corpus_dict)
    problems = validate_corpus(corpus)
    assert problems == [], problems
    assert len(corpus.images) == 3
    ok("annotate output passes primary validate with zero errors")
