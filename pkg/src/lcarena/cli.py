"""Command-line entry point.

    lcarena synthgen --config c.json --out DIR
    lcarena run --config exp.json
    lcarena score --transcripts DIR --out report.json
    lcarena leaderboard --report report.json --format csv|json
    lcarena replay --transcript FILE --data DIR

Global flags (any position): --seed, --jobs, --alc-mode linear|log, --t0.
Exit status: 0 success, 1 validation/usage error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .curves import AlcConfig, ScoreReport
from .harness import (ExperimentConfig, leaderboard_rows, replay, run_experiment,
                      score_transcripts, table_csv)
from .metadata import DataIOError, ValidationError, load, save
from .synthgen import SynthConfig, generate

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    p.add_argument("--alc-mode", choices=("linear", "log"), default=argparse.SUPPRESS)
    p.add_argument("--t0", type=float, default=argparse.SUPPRESS)
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="lcarena", parents=[common],
                     description="Learning-curve meta-learning arena.")
    parser.add_argument("--version", action="version", version=f"lcarena {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("synthgen", parents=[common], help="generate a synthetic meta-dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", parents=[common], help="run a meta-train/meta-test experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override the config's output directory")
    p.add_argument("--data", help="override the config's meta-dataset path")
    p.add_argument("--eval-on", choices=("valid", "test"))

    p = sub.add_parser("score", parents=[common], help="score a directory of transcripts")
    p.add_argument("--transcripts", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("leaderboard", parents=[common], help="render a report as a table")
    p.add_argument("--report", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("replay", parents=[common], help="recompute a transcript's ALC")
    p.add_argument("--transcript", required=True)
    p.add_argument("--data", required=True)
    return parser


def _alc_override(args, base: AlcConfig) -> AlcConfig:
    mode = getattr(args, "alc_mode", base.normalization)
    t0 = getattr(args, "t0", base.t0)
    return AlcConfig(mode, t0)


def _write_json(path, obj) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc


def cmd_synthgen(args) -> int:
    cfg = SynthConfig.from_json(args.config)
    if hasattr(args, "seed"):
        cfg = dataclasses.replace(cfg, seed=args.seed)
    save(generate(cfg), args.out)
    print(f"wrote {cfg.round} meta-dataset ({cfg.n_datasets}x{cfg.n_algorithms}) to {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    base = Path(args.config).resolve().parent
    if args.data:
        cfg.meta_dataset = args.data
    elif cfg.meta_dataset and not Path(cfg.meta_dataset).is_absolute():
        cfg.meta_dataset = str(base / cfg.meta_dataset)
    if args.out:
        cfg.output_dir = args.out
    elif cfg.output_dir and not Path(cfg.output_dir).is_absolute():
        cfg.output_dir = str(base / cfg.output_dir)
    if cfg.output_dir is None:
        cfg.output_dir = str(base / "results")
    if args.eval_on:
        cfg.eval_on = args.eval_on
    if hasattr(args, "seed"):
        cfg.seed = args.seed
    if hasattr(args, "jobs"):
        cfg.jobs = args.jobs
    cfg.alc = _alc_override(args, cfg.alc)
    if not cfg.meta_dataset:
        raise DataIOError("experiment config names no meta_dataset")
    result = run_experiment(cfg)
    for rank, a in enumerate(result.report.ranking, start=1):
        j = result.report.agents.index(a)
        print(f"{rank:2d}  {a:<20s} mu={result.report.mu[j]:.4f} sigma={result.report.sigma[j]:.4f}")
    print(f"artifacts in {cfg.output_dir}")
    return EXIT_OK


def cmd_score(args) -> int:
    report = score_transcripts(args.transcripts)
    _write_json(args.out, report.to_dict())
    print(f"scored {len(report.agents)} agents on {report.n_datasets} datasets -> {args.out}")
    return EXIT_OK


def _read_report(path) -> ScoreReport:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataIOError(f"cannot read report {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON") from exc
    try:
        return ScoreReport.from_dict(raw)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: not a score report ({exc})") from exc


def cmd_leaderboard(args) -> int:
    report = _read_report(args.report)
    if args.format == "csv":
        sys.stdout.write(table_csv(report))
    else:
        out = {"config_hash": report.extra.get("config_hash"),
               "tool_version": report.extra.get("tool_version", __version__),
               "rows": leaderboard_rows(report)}
        sys.stdout.write(json.dumps(out, indent=2) + "\n")
    return EXIT_OK


def cmd_replay(args) -> int:
    md = load(args.data)
    cfg = None
    if hasattr(args, "alc_mode") or hasattr(args, "t0"):
        cfg = _alc_override(args, AlcConfig())
    res = replay(args.transcript, md, cfg)
    print(json.dumps({"alc": res.alc, "stored_alc": res.stored_alc,
                      "comparable": res.comparable, "n_steps": len(res.curve.steps)}))
    if not res.comparable:
        print("warning: ALC config differs from the stored one; scores are not comparable",
              file=sys.stderr)
    return EXIT_OK


COMMANDS = {"synthgen": cmd_synthgen, "run": cmd_run, "score": cmd_score,
            "leaderboard": cmd_leaderboard, "replay": cmd_replay}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
