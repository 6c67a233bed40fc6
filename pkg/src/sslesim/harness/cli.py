"""Command-line entry point: ``sslesim simulate`` and ``sslesim aggregate``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from .config import ConfigError, parse_config
from .reports import ReportError, aggregate, emit_chain_activity, summary_csv
from .runner import report_bytes, run

log = logging.getLogger("sslesim")


class CliError(Exception):
    def __init__(self, kind: str, message: str, **extra) -> None:
        super().__init__(message)
        self.doc = {"error": kind, "message": message, **extra}


def _parse_seeds(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise CliError("usage", f"--seeds must be comma-separated integers, got {text!r}") from None
    if not seeds:
        raise CliError("usage", "--seeds is empty")
    return seeds


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc.strerror}", path=path) from None


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = parse_config(_read(args.config))
    seeds = _parse_seeds(args.seeds) if args.seeds else cfg.seeds
    out = Path(args.out or cfg.output.report_dir or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError("io", f"cannot create {out}: {exc.strerror}", path=str(out)) from None
    failures = 0
    for report in run(cfg, seeds):
        seed = report["seed"]
        path = out / f"report_{seed}.json"
        try:
            path.write_bytes(report_bytes(report))
        except OSError as exc:
            raise CliError("io", f"cannot write {path}: {exc.strerror}", path=str(path)) from None
        if report["status"] != "ok":
            failures += 1
            print(json.dumps({"error": "run", "seed": seed, **report["error"]}), file=sys.stderr)
            continue
        emit_chain_activity(report, out / f"chain_{seed}.csv")
        m = report["metrics"]
        log.info("seed %s: missed_fraction=%.4f", seed, m["missed_fraction"])
    return 1 if failures else 0


def cmd_aggregate(args: argparse.Namespace) -> int:
    src = Path(args.in_dir)
    paths = sorted(src.glob("report_*.json"))
    if not paths:
        raise CliError("io", f"no report_*.json files in {src}", path=str(src))
    reports = []
    for p in paths:
        try:
            reports.append(json.loads(_read(str(p))))
        except json.JSONDecodeError as exc:
            raise CliError("io", f"{p}: malformed report: {exc}", path=str(p)) from None
    summary = aggregate(reports)
    dest = Path(args.out)
    try:
        dest.write_text(json.dumps(summary, sort_keys=True, indent=1) + "\n")
        dest.with_suffix(".csv").write_text(summary_csv(summary))
    except OSError as exc:
        raise CliError("io", f"cannot write {dest}: {exc.strerror}", path=str(dest)) from None
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sslesim", description="Leader-election attack simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="run one report per seed")
    s.add_argument("--config", required=True)
    s.add_argument("--seeds", help="comma-separated seeds overriding the config")
    s.add_argument("--out", help="output directory (default: config output.report_dir or .)")
    s.set_defaults(func=cmd_simulate)
    a = sub.add_parser("aggregate", help="summarise a directory of reports")
    a.add_argument("--in", dest="in_dir", required=True)
    a.add_argument("--out", required=True, help="summary JSON path; CSV is written alongside")
    a.set_defaults(func=cmd_aggregate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        doc = exc.to_dict()
    except ReportError as exc:
        doc = {"error": "report", "message": str(exc)}
    except CliError as exc:
        doc = exc.doc
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
