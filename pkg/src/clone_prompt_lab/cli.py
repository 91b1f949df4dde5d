"""Command-line entry point.

Verbs: convert, sample, strip-comments, eval, ablate, mine, report, serve.
Global flags (--config, --seed, --replay, --out, --lenient) are accepted
after any verb.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_config
from .corpus import (
    DatasetFormatError,
    SamplingSpec,
    build_benchmark,
    convert_avatar,
    read_avatar_records,
    read_pairs,
    required_sample_size,
    strip_comments,
    write_pairs,
)
from .manifest import load_manifest
from .pipeline import mine_bias, run_ablation, run_eval
from .stats import confusion, metrics, render_metrics_table
from .verdicts import read_verdict_log

log = logging.getLogger(__name__)


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="experiment config file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--replay", type=Path, default=None,
                        help="replay fixture file; forces replay mode")
    parser.add_argument("--out", type=Path, default=None, help="override the output directory")
    parser.add_argument("--lenient", action="store_true",
                        help="skip malformed dataset lines instead of failing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpl", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    convert = sub.add_parser("convert", help="translation corpus -> labeled clone pairs")
    convert.add_argument("input", type=Path)
    convert.add_argument("output", type=Path)
    convert.add_argument("--negatives-per-positive", type=int, default=1)
    _common_flags(convert)

    sample = sub.add_parser("sample", help="balanced benchmark sampling / size calculator")
    sample.add_argument("input", type=Path, nargs="?")
    sample.add_argument("output", type=Path, nargs="?")
    sample.add_argument("--size", type=int, help="benchmark size (even)")
    sample.add_argument("--population", type=int,
                        help="print the required sample size for a population instead")
    sample.add_argument("--confidence", type=float, default=0.99)
    sample.add_argument("--margin", type=float, default=0.01)
    _common_flags(sample)

    strip = sub.add_parser("strip-comments", help="emit the comment-free dataset variant")
    strip.add_argument("input", type=Path)
    strip.add_argument("output", type=Path)
    _common_flags(strip)

    for verb, helptext in [
        ("eval", "run one evaluation under the configured prompt"),
        ("ablate", "run the full lesson ablation"),
    ]:
        p = sub.add_parser(verb, help=helptext)
        _common_flags(p)

    mine = sub.add_parser("mine", help="mine a run's confident mistakes into categories")
    mine.add_argument("--run", required=True, help="run id to mine")
    _common_flags(mine)

    report = sub.add_parser("report", help="re-derive a run's report from its verdict log")
    report.add_argument("--run", required=True, help="run id to report")
    _common_flags(report)

    serve = sub.add_parser("serve", help="serve the triage HTTP API")
    serve.add_argument("--port", type=int, default=8765)
    serve.add_argument("--host", default="127.0.0.1")
    _common_flags(serve)

    return parser


def _require_config(args: argparse.Namespace):
    if args.config is None:
        raise ConfigError(f"{args.verb} requires --config")
    return load_config(
        args.config,
        seed=args.seed,
        replay=args.replay,
        out_dir=args.out,
        lenient=args.lenient or None,
    )


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DatasetFormatError as exc:
        print(f"dataset error: {exc} (use --lenient to skip bad lines)", file=sys.stderr)
        return 2


def _dispatch(args: argparse.Namespace) -> int:
    if args.verb == "convert":
        records = read_avatar_records(args.input, lenient=args.lenient)
        pairs = convert_avatar(
            records,
            negatives_per_positive=args.negatives_per_positive,
            seed=args.seed or 0,
        )
        write_pairs(pairs, args.output)
        print(f"wrote {len(pairs)} pairs -> {args.output}")
        return 0

    if args.verb == "sample":
        if args.population is not None:
            spec = SamplingSpec(
                population_size=args.population,
                confidence_level=args.confidence,
                margin_of_error=args.margin,
            )
            print(required_sample_size(spec))
            return 0
        if not (args.input and args.output and args.size):
            print("sample needs INPUT OUTPUT --size (or --population)", file=sys.stderr)
            return 2
        pairs = read_pairs(args.input, lenient=args.lenient)
        bench = build_benchmark(pairs, size=args.size, seed=args.seed or 0)
        write_pairs(bench, args.output)
        print(f"sampled {len(bench)} pairs -> {args.output}")
        return 0

    if args.verb == "strip-comments":
        pairs = read_pairs(args.input, lenient=args.lenient)
        stripped = [
            replace(p, a=strip_comments(p.a), b=strip_comments(p.b)) for p in pairs
        ]
        write_pairs(stripped, args.output)
        print(f"stripped {len(stripped)} pairs -> {args.output}")
        return 0

    if args.verb == "eval":
        cfg = _require_config(args)
        report = run_eval(cfg)
        print((report.run_dir / "report.txt").read_text(encoding="utf-8"), end="")
        print(f"run_id: {report.run_id}")
        return 0

    if args.verb == "ablate":
        cfg = _require_config(args)
        reports = run_ablation(cfg)
        table = render_metrics_table(
            [(r.manifest.condition, r.metrics) for r in reports]
        )
        print(table, end="")
        print(f"runs: {', '.join(r.run_id for r in reports)}")
        return 0

    if args.verb == "mine":
        cfg = _require_config(args)
        result = mine_bias(cfg, args.run)
        print(json.dumps(result.payload, indent=2, sort_keys=True))
        return 0

    if args.verb == "report":
        cfg = _require_config(args)
        run_dir = Path(cfg.out_dir) / "runs" / args.run
        if not (run_dir / "verdicts.jsonl").exists():
            print(f"no verdict log for run {args.run}", file=sys.stderr)
            return 2
        manifest = load_manifest(run_dir / "manifest.json")
        verdicts = read_verdict_log(run_dir / "verdicts.jsonl")
        scored = [v for v in verdicts if v.predicted is not None]
        table = render_metrics_table([(manifest.condition, metrics(confusion(scored)))])
        print(table, end="")
        print(f"unparsed_or_failed: {len(verdicts) - len(scored)}")
        return 0

    if args.verb == "serve":
        from .service import serve as serve_app

        cfg = _require_config(args)
        serve_app(cfg, port=args.port, host=args.host)
        return 0

    raise AssertionError(f"unhandled verb {args.verb}")  # argparse prevents this


if __name__ == "__main__":
    raise SystemExit(main())
