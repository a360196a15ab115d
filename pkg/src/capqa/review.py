"""Human-verification service: an append-only decision journal plus a
local HTTP API for reviewing generated QA pairs.

Every decision is one JSON line appended to the journal before it is
acknowledged; state is always the deterministic replay of the journal
(last decision wins). A truncated final line (crash during append) is
skipped with a warning; all complete lines replay.
"""

from __future__ import annotations

import json
import threading
import time
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence, Union

from .assemble import MIN_QUESTION_WORDS
from .corpus import Corpus, CorpusError, QAPair, load_corpus, save_corpus
from .textnorm import clean_text, strip_leading_article

from pydantic import BaseModel

ACTIONS = ("accept", "reject", "edit")
_ACTION_STATUS = {"accept": "accepted", "reject": "rejected", "edit": "edited"}


class DecisionBody(BaseModel):
    action: str
    reviewer: str = ""
    edited_question: Optional[str] = None
    edited_answer: Optional[str] = None
    note: Optional[str] = None


class ExportBody(BaseModel):
    path: str
    include: Optional[list[str]] = None


class ReviewError(ValueError):
    pass


class UnknownItemError(ReviewError):
    pass


@dataclass(frozen=True)
class ReviewDecision:
    qa_id: str
    action: str
    reviewer: str = ""
    edited_question: Optional[str] = None
    edited_answer: Optional[str] = None
    note: Optional[str] = None
    ts: int = 0  # UTC milliseconds

    def to_dict(self) -> dict:
        out = {"qa_id": self.qa_id, "action": self.action, "reviewer": self.reviewer, "ts": self.ts}
        for key in ("edited_question", "edited_answer", "note"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ReviewDecision":
        return cls(
            qa_id=data["qa_id"],
            action=data["action"],
            reviewer=data.get("reviewer", ""),
            edited_question=data.get("edited_question"),
            edited_answer=data.get("edited_answer"),
            note=data.get("note"),
            ts=data.get("ts", 0),
        )


def validate_decision(decision: ReviewDecision, known_ids: set[str]) -> ReviewDecision:
    """Check a decision and normalize its edits through the cleaner."""
    if decision.qa_id not in known_ids:
        raise UnknownItemError(f"unknown qa_id {decision.qa_id!r}")
    if decision.action not in ACTIONS:
        raise ReviewError(f"unknown action {decision.action!r}")
    if decision.action != "edit":
        return decision
    if decision.edited_question is None and decision.edited_answer is None:
        raise ReviewError("edit requires edited_question or edited_answer")
    question = decision.edited_question
    answer = decision.edited_answer
    if question is not None:
        question = clean_text(question)
        if not question:
            raise ReviewError("edited question is empty")
        if not question.endswith("?"):
            raise ReviewError("edited question must end with '?'")
        if len(question.split()) < MIN_QUESTION_WORDS:
            raise ReviewError(f"edited question has fewer than {MIN_QUESTION_WORDS} words")
    if answer is not None:
        answer = strip_leading_article(clean_text(answer))
        if not answer:
            raise ReviewError("edited answer is empty")
    return replace(decision, edited_question=question, edited_answer=answer)


# ---------------------------------------------------------------------------
# Journal


class Journal:
    """Append-only, line-delimited JSON beside the dataset file."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._last_ts = 0

    def append(self, decision: ReviewDecision) -> ReviewDecision:
        """Serialize and append one decision; timestamps stay monotone."""
        with self._lock:
            ts = max(int(time.time() * 1000), self._last_ts)
            decision = replace(decision, ts=ts)
            self._last_ts = ts
            line = json.dumps(decision.to_dict(), ensure_ascii=False, sort_keys=True)
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()
        return decision

    def load(self) -> list[ReviewDecision]:
        """All complete journal lines; a truncated final line is skipped
        with a warning."""
        if not self.path.exists():
            return []
        raw = self.path.read_text(encoding="utf-8")
        decisions: list[ReviewDecision] = []
        lines = raw.split("\n")
        terminated = raw.endswith("\n")
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            is_last = i == len(lines) - 1 or (i == len(lines) - 2 and not lines[-1].strip())
            try:
                decisions.append(ReviewDecision.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError):
                if is_last and not terminated:
                    warnings.warn(
                        f"journal {self.path}: skipping truncated final line",
                        stacklevel=2,
                    )
                    continue
                raise ReviewError(f"journal {self.path}: corrupt line {i + 1}")
        if decisions:
            self._last_ts = max(d.ts for d in decisions)
        return decisions


# ---------------------------------------------------------------------------
# State = replay(journal)


@dataclass(frozen=True)
class ItemState:
    status: str
    question: str
    answer: str


def apply_decision_state(state: dict[str, ItemState], decision: ReviewDecision) -> None:
    """Apply one decision to a live state map (last decision wins)."""
    if decision.qa_id not in state:
        return
    current = state[decision.qa_id]
    if decision.action == "edit":
        state[decision.qa_id] = ItemState(
            "edited",
            decision.edited_question or current.question,
            decision.edited_answer or current.answer,
        )
    else:
        state[decision.qa_id] = ItemState(
            _ACTION_STATUS[decision.action], current.question, current.answer
        )


def replay_state(
    pairs: Sequence[QAPair], decisions: Sequence[ReviewDecision]
) -> dict[str, ItemState]:
    """Effective status/text per qa_id after replaying the journal in order."""
    state = {qa.qa_id: ItemState(qa.status, qa.question, qa.answer) for qa in pairs}
    for decision in decisions:
        apply_decision_state(state, decision)
    return state


def export_reviewed(
    corpus: Corpus,
    decisions: Sequence[ReviewDecision],
    include: Optional[set[str]] = None,
) -> Corpus:
    """Corpus with reviewed pairs only; edited text substituted.

    Pure function of (dataset, journal, include set). Default include is
    accepted + edited.
    """
    include = include or {"accepted", "edited"}
    state = replay_state(corpus.qa_pairs, decisions)
    kept: list[QAPair] = []
    for qa in corpus.qa_pairs:
        item = state[qa.qa_id]
        if item.status not in include:
            continue
        kept.append(
            replace(qa, status=item.status, question=item.question, answer=item.answer)
        )
    return corpus.with_qa_pairs(kept)


# ---------------------------------------------------------------------------
# HTTP service


def _queue_sort_key(qa: QAPair) -> tuple:
    p = qa.provenance
    return (p.caption_id, p.sentence_index, p.rule_id, qa.qa_id)


def create_app(
    dataset_path: Union[str, Path],
    journal_path: Optional[Union[str, Path]] = None,
    static_dir: Optional[Union[str, Path]] = None,
):
    """Review API over a dataset file; serves the UI when static_dir exists."""
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import FileResponse
    from fastapi.staticfiles import StaticFiles

    dataset_path = Path(dataset_path)
    corpus = load_corpus(dataset_path)
    journal = Journal(journal_path or dataset_path.with_suffix(".journal.jsonl"))
    decisions = journal.load()
    state = replay_state(corpus.qa_pairs, decisions)
    captions = corpus.caption_by_id()
    images = corpus.image_by_id()
    ordered = sorted(corpus.qa_pairs, key=_queue_sort_key)
    by_id = {qa.qa_id: qa for qa in corpus.qa_pairs}
    lock = threading.Lock()

    app = FastAPI(title="capqa review")

    def item_payload(qa: QAPair) -> dict:
        item = state[qa.qa_id]
        caption = captions.get(qa.provenance.caption_id)
        return {
            "qa_id": qa.qa_id,
            "image_id": qa.image_id,
            "image_url": f"/api/images/{qa.image_id}",
            "qtype": qa.qtype,
            "question": item.question,
            "answer": item.answer,
            "status": item.status,
            "caption_text": caption.raw_text if caption else "",
            "provenance": {
                "caption_id": qa.provenance.caption_id,
                "sentence_index": qa.provenance.sentence_index,
                "rule_id": qa.provenance.rule_id,
            },
        }

    @app.get("/api/queue")
    def queue(status: Optional[str] = None, page: int = 1, page_size: int = 50):
        if page < 1 or page_size < 1:
            raise HTTPException(status_code=400, detail="invalid page")
        items = [qa for qa in ordered if status is None or state[qa.qa_id].status == status]
        start = (page - 1) * page_size
        return {
            "total": len(items),
            "page": page,
            "page_size": page_size,
            "items": [item_payload(qa) for qa in items[start : start + page_size]],
        }

    @app.get("/api/items/{qa_id}")
    def get_item(qa_id: str):
        if qa_id not in by_id:
            raise HTTPException(status_code=404, detail=f"unknown qa_id {qa_id!r}")
        return item_payload(by_id[qa_id])

    @app.post("/api/items/{qa_id}/decision")
    def decide(qa_id: str, body: DecisionBody):
        decision = ReviewDecision(
            qa_id=qa_id,
            action=body.action,
            reviewer=body.reviewer,
            edited_question=body.edited_question,
            edited_answer=body.edited_answer,
            note=body.note,
        )
        try:
            decision = validate_decision(decision, set(by_id))
        except UnknownItemError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ReviewError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        with lock:
            stored = journal.append(decision)
            decisions.append(stored)
            apply_decision_state(state, stored)
        return item_payload(by_id[qa_id])

    @app.get("/api/stats")
    def stats():
        counts = {"generated": 0, "accepted": 0, "edited": 0, "rejected": 0}
        for item in state.values():
            counts[item.status] = counts.get(item.status, 0) + 1
        return {"total": len(state), **counts}

    @app.get("/api/images/{image_id}")
    def image(image_id: str):
        ref = images.get(image_id)
        if ref is None:
            raise HTTPException(status_code=404, detail=f"unknown image {image_id!r}")
        path = Path(ref.uri)
        if not path.is_absolute():
            path = dataset_path.parent / path
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"image file missing: {ref.uri}")
        return FileResponse(path)

    @app.post("/api/export")
    def export(body: ExportBody):
        include = set(body.include) if body.include else None
        reviewed = export_reviewed(corpus, decisions, include)
        out = Path(body.path)
        if not out.is_absolute():
            out = dataset_path.parent / out
        try:
            save_corpus(reviewed, out)
        except CorpusError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        return {"path": str(out), "exported": len(reviewed.qa_pairs)}

    if static_dir is not None and Path(static_dir).exists():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
