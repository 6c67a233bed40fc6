"""Per-slot CSV logs, multi-seed aggregation and cost summaries."""

from __future__ import annotations

import csv
import io
import json
import statistics
from pathlib import Path
from typing import Any, Iterable, Sequence

CHAIN_CSV_VERSION = "# sslesim chain-activity v1"
CHAIN_COLUMNS = ("slot", "status", "attacked", "warmup")
SUMMARY_CSV_VERSION = "# sslesim summary v1"
SUMMARY_COLUMNS = ("metric", "n", "mean", "min", "max", "stddev")


class ReportError(ValueError):
    pass


def chain_activity_csv(report: dict[str, Any]) -> str:
    buf = io.StringIO()
    buf.write(CHAIN_CSV_VERSION + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CHAIN_COLUMNS)
    for row in report["log"]:
        w.writerow([row["slot"], row["status"], int(row["attacked"]), int(row["warmup"])])
    return buf.getvalue()


def emit_chain_activity(report: dict[str, Any], path: str | Path) -> Path:
    path = Path(path)
    try:
        path.write_text(chain_activity_csv(report))
    except OSError as exc:
        raise ReportError(f"cannot write chain activity to {path}: {exc.strerror}") from exc
    return path


def read_chain_activity(text: str) -> list[dict[str, Any]]:
    lines = text.splitlines()
    if not lines or lines[0] != CHAIN_CSV_VERSION:
        raise ReportError("not a chain-activity v1 file")
    rows = list(csv.DictReader(lines[1:]))
    return [
        {
            "slot": int(r["slot"]),
            "status": r["status"],
            "attacked": r["attacked"] == "1",
            "warmup": r["warmup"] == "1",
        }
        for r in rows
    ]


def block_processing_mean(report: dict[str, Any]) -> float:
    """Mean op count per proposed block over all block-processing phases."""
    count = total = 0.0
    for phase, stats in report["cost"].items():
        if phase.startswith("block_processing"):
            count += stats["count"]
            total += stats["mean"] * stats["count"]
    return total / count if count else 0.0


def _numeric_metrics(report: dict[str, Any]) -> dict[str, float]:
    out = {
        k: float(v)
        for k, v in report["metrics"].items()
        if isinstance(v, (int, float)) and not isinstance(v, bool)
    }
    out["block_processing_ops_mean"] = block_processing_mean(report)
    return out


def _scenario_key(report: dict[str, Any]) -> str:
    cfg = dict(report["config"])
    cfg.pop("seeds", None)
    cfg.pop("output", None)
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def aggregate(reports: Sequence[dict[str, Any]]) -> dict[str, Any]:
    """Fold same-scenario reports (in seed order) into summary statistics."""
    if not reports:
        raise ReportError("nothing to aggregate")
    failed = [r["seed"] for r in reports if r.get("status") != "ok"]
    ok = sorted((r for r in reports if r.get("status") == "ok"), key=lambda r: r["seed"])
    if not ok:
        raise ReportError("every run failed")
    keys = {_scenario_key(r) for r in ok}
    if len(keys) != 1:
        raise ReportError(f"reports come from {len(keys)} different configurations")

    per_metric: dict[str, list[float]] = {}
    for r in ok:
        for k, v in _numeric_metrics(r).items():
            per_metric.setdefault(k, []).append(v)
    metrics = {}
    for k, vals in sorted(per_metric.items()):
        metrics[k] = {
            "n": len(vals),
            "mean": statistics.fmean(vals),
            "min": min(vals),
            "max": max(vals),
            "stddev": statistics.stdev(vals) if len(vals) > 1 else 0.0,
        }
    return {
        "format": "sslesim-summary/1",
        "config": ok[0]["config"],
        "mechanism": ok[0]["mechanism"],
        "seeds": [r["seed"] for r in ok],
        "failed_seeds": sorted(failed),
        "metrics": metrics,
    }


def summary_csv(summary: dict[str, Any]) -> str:
    buf = io.StringIO()
    buf.write(SUMMARY_CSV_VERSION + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for name, s in summary["metrics"].items():
        w.writerow([name, s["n"], repr(s["mean"]), repr(s["min"]), repr(s["max"]), repr(s["stddev"])])
    return buf.getvalue()


def cost_ordering(summaries: Iterable[dict[str, Any]]) -> list[tuple[str, float]]:
    """Mechanisms sorted by mean block-processing op count, cheapest first."""
    rows = [
        (s["mechanism"]["name"], s["metrics"]["block_processing_ops_mean"]["mean"])
        for s in summaries
    ]
    return sorted(rows, key=lambda r: r[1])
