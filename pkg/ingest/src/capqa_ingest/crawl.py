"""Collect image/caption pairs from web library pages.

Figures are looked for inside div, ul, li, and figure containers: any
such block holding exactly one <img> pairs that image with the block's
text. Fetching is pluggable so tests run on local fixture files.
"""

from __future__ import annotations

import logging
import posixpath
from dataclasses import dataclass
from html.parser import HTMLParser
from pathlib import Path
from typing import Callable, Optional, Union
from urllib.parse import urljoin, urlparse

logger = logging.getLogger(__name__)

CONTAINER_TAGS = ("div", "ul", "li", "figure")


@dataclass(frozen=True)
class WebCandidate:
    page_url: str
    image_url: str
    caption: str
    local_path: Optional[str] = None


class _FigureParser(HTMLParser):
    def __init__(self):
        super().__init__()
        self.stack: list[dict] = []
        self.pairs: list[tuple[str, str]] = []

    def handle_starttag(self, tag, attrs):
        if tag in CONTAINER_TAGS:
            self.stack.append({"imgs": [], "text": []})
        elif tag == "img":
            src = dict(attrs).get("src")
            if src and self.stack:
                self.stack[-1]["imgs"].append(src)

    def handle_data(self, data):
        if self.stack and data.strip():
            self.stack[-1]["text"].append(data.strip())

    def handle_endtag(self, tag):
        if tag not in CONTAINER_TAGS or not self.stack:
            return
        block = self.stack.pop()
        caption = " ".join(block["text"]).strip()
        if len(block["imgs"]) == 1 and caption:
            self.pairs.append((block["imgs"][0], caption))
            block["imgs"] = []
            block["text"] = []
        if self.stack:  # unpaired content bubbles to the enclosing block
            self.stack[-1]["imgs"].extend(block["imgs"])
            self.stack[-1]["text"].extend(block["text"])


def parse_figures(html: str) -> list[tuple[str, str]]:
    parser = _FigureParser()
    parser.feed(html)
    return parser.pairs


def default_fetcher(url: str) -> bytes:
    """HTTP(S) via requests; anything else is read as a local file."""
    if urlparse(url).scheme in ("http", "https"):
        import requests

        response = requests.get(url, timeout=30)
        response.raise_for_status()
        return response.content
    return Path(url).read_bytes()


def crawl_pairs(
    urls: list[str],
    out_dir: Optional[Union[str, Path]] = None,
    fetcher: Optional[Callable[[str], bytes]] = None,
) -> list[WebCandidate]:
    """Image/caption candidates from each page; failures are logged and
    the run continues."""
    fetch = fetcher or default_fetcher
    candidates: list[WebCandidate] = []
    images_dir = None
    if out_dir is not None:
        images_dir = Path(out_dir) / "images"
        images_dir.mkdir(parents=True, exist_ok=True)
    for url in urls:
        try:
            html = fetch(url).decode("utf-8", errors="replace")
        except Exception as exc:
            logger.warning("skipping %s: %s", url, exc)
            continue
        pairs = parse_figures(html)
        if not pairs:
            logger.warning("no figure containers found on %s", url)
        for index, (src, caption) in enumerate(pairs):
            image_url = urljoin(url, src)
            local_path = None
            if images_dir is not None:
                try:
                    payload = fetch(image_url)
                except Exception as exc:
                    logger.warning("image fetch failed for %s: %s", image_url, exc)
                    continue
                name = posixpath.basename(urlparse(image_url).path) or f"img{index}"
                target = images_dir / f"{len(candidates):04d}-{name}"
                target.write_bytes(payload)
                local_path = str(target)
            candidates.append(WebCandidate(url, image_url, caption, local_path))
    return candidates
