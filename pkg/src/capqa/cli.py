"""Command-line entry point: validate -> simplify -> generate -> assemble
-> split -> stats -> eval -> review -> export.

Artifacts go to named files only; progress events are line-delimited
JSON on stderr. Exit codes: 0 ok, 1 usage, 2 data error, 3 internal.
Fixed seed + fixed inputs give byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional

from . import assemble as asm
from . import metrics as met
from .corpus import CorpusError, load_corpus, save_corpus, validate_corpus
from .review import Journal, ReviewError, export_reviewed
from .simplify import simplify
from .transduce import TransduceError, generate_questions, load_rule_catalog


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise UsageError(message)


def log_event(event: str, **fields) -> None:
    payload = {"event": event, "ts": int(time.time() * 1000), **fields}
    print(json.dumps(payload, ensure_ascii=False, sort_keys=True), file=sys.stderr)


def _write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(path)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise CorpusError(f"cannot write {path}: {exc}") from None


def _write_json(path: Path, data) -> None:
    _write_text(path, json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n")


def _load_config(args: argparse.Namespace) -> dict:
    """Config file values; flags set on the command line win."""
    if not getattr(args, "config", None):
        return {}
    try:
        return json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}")


def _setting(args, config: dict, name: str, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return default


def _parse_ratios(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"bad ratios {text!r}")
    if len(parts) != 3:
        raise UsageError("ratios must be three comma-separated numbers")
    return parts  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# Subcommands


def cmd_validate(args) -> int:
    path = Path(args.input)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path}: JSON parse error at line {exc.lineno}: {exc.msg}")
    from .corpus import corpus_from_dict

    problems = validate_corpus(corpus_from_dict(raw))
    for problem in problems:
        print(problem)
    log_event("validate", input=str(path), violations=len(problems))
    if problems:
        raise CorpusError(f"{len(problems)} invariant violations")
    print("ok")
    return 0


def cmd_simplify(args) -> int:
    corpus = load_corpus(args.input)
    out = []
    count_in = count_out = 0
    for caption in corpus.captions:
        for index, sentence in enumerate(caption.sentences):
            if sentence.parse is None:
                continue
            count_in += 1
            simples = simplify(sentence)
            count_out += len(simples)
            out.append(
                {
                    "caption_id": caption.caption_id,
                    "sentence_index": index,
                    "simplified": [
                        {"text": s.text, "rule": s.rule_id} for s in simples
                    ],
                }
            )
    _write_json(Path(args.output), out)
    log_event("simplify", sentences_in=count_in, sentences_out=count_out)
    return 0


def cmd_generate(args) -> int:
    config = _load_config(args)
    seed = int(_setting(args, config, "seed", 0))
    catalog = load_rule_catalog(_setting(args, config, "rules", None))
    no_variants = not args.no_distractors
    corpus = load_corpus(args.input)
    generated, stats = generate_questions(
        corpus, seed=seed, no_variants=no_variants, catalog=catalog
    )
    rule_counts: dict[str, int] = {}
    for gen in generated:
        rule = gen.qa.provenance.rule_id
        rule_counts[rule] = rule_counts.get(rule, 0) + 1
    result = corpus.with_qa_pairs([gen.qa for gen in generated])
    save_corpus(result, args.output)
    log_event("generate", seed=seed, out=len(generated), rules=rule_counts, **stats)
    return 0


def cmd_assemble(args) -> int:
    config = _load_config(args)
    seed = int(_setting(args, config, "seed", 0))
    tolerance = int(_setting(args, config, "tolerance", 1))
    corpus = load_corpus(args.input)
    result, report = asm.assemble(
        corpus, rng_seed=seed, balance=args.balance, tolerance=tolerance
    )
    save_corpus(result, args.output)
    log_event("assemble", seed=seed, **report)
    return 0


def cmd_split(args) -> int:
    config = _load_config(args)
    seed = int(_setting(args, config, "seed", 0))
    ratios = _parse_ratios(_setting(args, config, "ratios", "0.5,0.3,0.2"))
    corpus = load_corpus(args.input)
    try:
        splits = asm.split_dataset(corpus, seed=seed, ratios=ratios)
    except asm.AssemblyError as exc:
        raise CorpusError(str(exc))
    save_corpus(corpus.with_splits(splits), args.output)
    log_event(
        "split",
        seed=seed,
        ratios=list(ratios),
        train=len(splits.train),
        val=len(splits.val),
        test=len(splits.test),
    )
    return 0


def cmd_stats(args) -> int:
    corpus = load_corpus(args.input)
    report = asm.compute_stats(corpus)
    prefix = Path(args.out_prefix)
    _write_json(prefix.with_suffix(".json"), report.to_dict())
    _write_text(prefix.with_suffix(".txt"), report.to_text())
    _write_text(prefix.with_suffix(".csv"), report.answer_csv())
    log_event("stats", questions=report.n_questions, images=report.n_images)
    print(report.to_text(), end="")
    return 0


def cmd_eval(args) -> int:
    corpus = load_corpus(args.gold)
    if not corpus.qa_pairs:
        raise CorpusError(f"{args.gold}: gold corpus has no qa_pairs")
    try:
        raw = json.loads(Path(args.pred).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CorpusError(f"cannot read {args.pred}: {exc}")
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{args.pred}: JSON parse error at line {exc.lineno}: {exc.msg}")
    if not isinstance(raw, list):
        raise CorpusError("prediction file must be a JSON list of {qa_id, answer}")
    try:
        predictions = {row["qa_id"]: row["answer"] for row in raw}
    except (TypeError, KeyError):
        raise CorpusError("prediction rows must carry qa_id and answer")
    try:
        result = met.evaluate(corpus.qa_pairs, predictions)
    except met.EvaluationError as exc:
        raise CorpusError(str(exc))
    if args.output:
        _write_json(Path(args.output), result.to_dict())
    print(result.to_text(), end="")
    log_event("eval", n_yesno=result.n_yesno, n_open=result.n_open)
    return 0


def cmd_review(args) -> int:
    import uvicorn

    from .review import create_app

    static = args.ui or _default_ui_dir()
    app = create_app(args.data, args.journal, static_dir=static)
    log_event("review", port=args.port, data=str(args.data))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _default_ui_dir() -> Optional[str]:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return str(candidate) if candidate.exists() else None


def cmd_export(args) -> int:
    corpus = load_corpus(args.data)
    journal = Journal(args.journal)
    decisions = journal.load()
    include = set(args.include.split(",")) if args.include else None
    reviewed = export_reviewed(corpus, decisions, include)
    save_corpus(reviewed, args.output)
    log_event("export", decisions=len(decisions), exported=len(reviewed.qa_pairs))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="capqa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a corpus file against the schema")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simplify", help="report sentence simplification per caption")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("generate", help="generate QA pairs from captions")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--rules", default=None, help="JSON rule catalog overriding defaults")
    p.add_argument("--no-distractors", action="store_true", help="skip no-variants")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("assemble", help="clean, dedupe, and optionally balance")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--balance", action="store_true")
    p.add_argument("--tolerance", type=int, default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("split", help="partition images into train/val/test")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ratios", default=None, help="e.g. 0.5,0.3,0.2")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("stats", help="dataset statistics (json, txt, csv)")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-prefix", dest="out_prefix", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("eval", help="score predictions against gold answers")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", dest="output", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("review", help="serve the review API and UI")
    p.add_argument("--data", required=True)
    p.add_argument("--journal", default=None)
    p.add_argument("--ui", default=None, help="static UI directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8571)
    p.set_defaults(func=cmd_review)

    p = sub.add_parser("export", help="apply the review journal and export")
    p.add_argument("--data", required=True)
    p.add_argument("--journal", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--include", default=None, help="statuses, e.g. accepted,edited")
    p.set_defaults(func=cmd_export)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (CorpusError, ReviewError, TransduceError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 3
    except Exception as exc:  # internal fault
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
