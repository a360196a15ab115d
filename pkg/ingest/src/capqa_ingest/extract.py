"""Pair figures with their captions inside PDF textbooks.

Per page, images are ordered by location (top-to-bottom, then
left-to-right) and caption blocks the same way; the two rankings are
zipped. Pages where the counts disagree have every candidate flagged for
manual correction.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .pdfread import ImagePlacement, PdfDocument, TextRun

FIGURE_PREFIX_RE = re.compile(r"^(Fig\.|Figure)\s*(\d+(?:\.\d+)*)", re.IGNORECASE)

# Vertical gap (points) that ends a caption block.
LINE_GAP = 20.0


@dataclass(frozen=True)
class CaptionBlock:
    page: int
    x: float
    y: float  # top line's baseline
    text: str
    figure_label: str


@dataclass
class ExtractionCandidate:
    source_page: int
    image: Optional[ImagePlacement] = None
    caption: Optional[CaptionBlock] = None
    flagged: bool = False
    note: str = ""

    @property
    def figure_label(self) -> str:
        return self.caption.figure_label if self.caption else ""

    @property
    def caption_text(self) -> str:
        return self.caption.text if self.caption else ""


def text_lines(runs: list[TextRun], tolerance: float = 2.0) -> list[tuple[float, float, str]]:
    """(y, x, text) lines, top to bottom; same-baseline runs join."""
    lines: list[list[TextRun]] = []
    for run in sorted(runs, key=lambda r: (-r.y, r.x)):
        if lines and abs(lines[-1][0].y - run.y) <= tolerance:
            lines[-1].append(run)
        else:
            lines.append([run])
    out = []
    for group in lines:
        group.sort(key=lambda r: r.x)
        out.append((group[0].y, group[0].x, " ".join(r.text for r in group)))
    return out


def caption_blocks(page_number: int, runs: list[TextRun]) -> list[CaptionBlock]:
    """Caption blocks: a figure-prefixed line plus following close lines."""
    lines = text_lines(runs)
    blocks: list[CaptionBlock] = []
    i = 0
    while i < len(lines):
        y, x, text = lines[i]
        match = FIGURE_PREFIX_RE.match(text.strip())
        if not match:
            i += 1
            continue
        parts = [text.strip()]
        last_y = y
        j = i + 1
        while j < len(lines):
            next_y, _, next_text = lines[j]
            if last_y - next_y > LINE_GAP:
                break  # blank layout gap ends the caption
            if FIGURE_PREFIX_RE.match(next_text.strip()):
                break
            parts.append(next_text.strip())
            last_y = next_y
            j += 1
        label = f"{match.group(1)} {match.group(2)}".replace("Fig.", "Fig.").strip()
        blocks.append(CaptionBlock(page_number, x, y, " ".join(parts), label))
        i = j
    return blocks


def extract_pdf_pairs(path: Union[str, Path]) -> list[ExtractionCandidate]:
    """All figure candidates in a PDF, paired per page by location rank."""
    document = PdfDocument.from_path(path)
    candidates: list[ExtractionCandidate] = []
    for page in document.pages:
        images = sorted(page.images, key=lambda im: (-im.top, im.x))
        captions = sorted(
            caption_blocks(page.number, page.text_runs), key=lambda b: (-b.y, b.x)
        )
        mismatch = len(images) != len(captions)
        for rank in range(max(len(images), len(captions))):
            candidate = ExtractionCandidate(
                source_page=page.number,
                image=images[rank] if rank < len(images) else None,
                caption=captions[rank] if rank < len(captions) else None,
            )
            if mismatch:
                candidate.flagged = True
                candidate.note = (
                    f"page {page.number}: {len(images)} images vs"
                    f" {len(captions)} captions; check pairing"
                )
            candidates.append(candidate)
    return candidates


def write_candidates(
    candidates: list[ExtractionCandidate],
    out_dir: Union[str, Path],
    stem: str = "doc",
) -> Path:
    """Write images plus a candidates.json manifest; returns the manifest."""
    out_dir = Path(out_dir)
    images_dir = out_dir / "images"
    images_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for index, candidate in enumerate(candidates):
        image_path = None
        if candidate.image is not None:
            suffix = ".jpg" if candidate.image.image_format == "jpeg" else ".raw"
            image_path = images_dir / f"{stem}-p{candidate.source_page}-{index:03d}{suffix}"
            image_path.write_bytes(candidate.image.data)
        rows.append(
            {
                "image_id": f"{stem}-p{candidate.source_page}-{index:03d}",
                "page": candidate.source_page,
                "image_path": str(image_path.relative_to(out_dir)) if image_path else None,
                "caption": candidate.caption_text or None,
                "figure_label": candidate.figure_label or None,
                "flagged": candidate.flagged,
                "note": candidate.note or None,
                "source": "textbook",
            }
        )
    manifest = out_dir / "candidates.json"
    manifest.write_text(
        json.dumps(rows, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return manifest
