"""capqa-ingest: extract-pdf | crawl | annotate.

Flag conventions mirror the capqa CLI: --in/--out style paths, JSON
artifacts, log events to stderr, exit codes 0 ok / 1 usage / 2 data
error / 3 internal.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from .annotate import BuiltinAnnotator, CoreNLPAnnotator, annotate_candidates, load_exclusions
from .crawl import crawl_pairs
from .extract import extract_pdf_pairs, write_candidates
from .pdfread import PdfReadError


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def cmd_extract_pdf(args) -> int:
    candidates = extract_pdf_pairs(args.pdf)
    manifest = write_candidates(candidates, args.out_dir, stem=Path(args.pdf).stem)
    flagged = sum(1 for c in candidates if c.flagged)
    print(
        json.dumps(
            {"event": "extract-pdf", "candidates": len(candidates), "flagged": flagged},
            sort_keys=True,
        ),
        file=sys.stderr,
    )
    print(manifest)
    return 0


def cmd_crawl(args) -> int:
    urls = [u.strip() for u in Path(args.urls).read_text().splitlines() if u.strip()]
    candidates = crawl_pairs(urls, out_dir=args.out_dir)
    rows = [
        {
            "image_id": f"web-{i:04d}",
            "image_path": c.local_path,
            "caption": c.caption,
            "figure_label": None,
            "flagged": False,
            "source": "web",
            "page_url": c.page_url,
        }
        for i, c in enumerate(candidates)
    ]
    manifest = Path(args.out_dir) / "candidates.json"
    manifest.write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(json.dumps({"event": "crawl", "candidates": len(rows)}, sort_keys=True), file=sys.stderr)
    print(manifest)
    return 0


def cmd_annotate(args) -> int:
    rows = json.loads(Path(args.candidates).read_text(encoding="utf-8"))
    annotator = CoreNLPAnnotator(args.corenlp) if args.corenlp else BuiltinAnnotator()
    corpus = annotate_candidates(rows, annotator, load_exclusions(args.exclude))
    Path(args.output).write_text(
        json.dumps(corpus, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    print(
        json.dumps(
            {
                "event": "annotate",
                "images": len(corpus["images"]),
                "captions": len(corpus["captions"]),
            },
            sort_keys=True,
        ),
        file=sys.stderr,
    )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="capqa-ingest", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract-pdf", help="extract figure/caption candidates from a PDF")
    p.add_argument("--pdf", required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=cmd_extract_pdf)

    p = sub.add_parser("crawl", help="collect figure/caption pairs from web pages")
    p.add_argument("--urls", required=True, help="file with one URL per line")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=cmd_crawl)

    p = sub.add_parser("annotate", help="annotate candidates into an interchange corpus")
    p.add_argument("--candidates", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--exclude", default=None, help="file listing image ids/labels to drop")
    p.add_argument("--corenlp", default=None, help="CoreNLP server URL (default: builtin)")
    p.set_defaults(func=cmd_annotate)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (PdfReadError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
