"""Single-seed simulation runs and their reports."""

from __future__ import annotations

import json
import logging
import random
import statistics
from typing import Any, Iterable

from ..adversary import Adversary, AttackMode, adversary_view, assign_knowledge, dos_attempt
from ..consensus import SLOTS_PER_EPOCH, SlotStatus, init_genesis, process_slot
from .config import SimulationConfig

log = logging.getLogger(__name__)

REPORT_FORMAT = "sslesim-run-report/1"


def _mechanism_options(cfg: SimulationConfig) -> dict[str, Any]:
    if cfg.mechanism == "whisk":
        return {"params": cfg.whisk_params(), "group": cfg.group}
    if cfg.mechanism == "hsortition":
        return {"mode": cfg.hsortition.mode, "prince_rounds": cfg.hsortition.prince_rounds}
    return {}


def _phase_stats(samples: list[dict[str, int]]) -> dict[str, Any]:
    totals = [sum(s.values()) for s in samples]
    by_kind: dict[str, int] = {}
    for s in samples:
        for k, v in s.items():
            by_kind[k] = by_kind.get(k, 0) + v
    return {
        "count": len(totals),
        "mean": statistics.fmean(totals) if totals else 0.0,
        "max": max(totals, default=0),
        "total_by_kind": dict(sorted(by_kind.items())),
    }


def simulate(cfg: SimulationConfig, seed: int) -> dict[str, Any]:
    """Run one seed and return its report document."""
    state = init_genesis(
        cfg.validators, cfg.balances, cfg.mechanism, seed, **_mechanism_options(cfg)
    )
    mech = state.mechanism
    registry = state.registry
    assign_knowledge(registry, cfg.attacker, random.Random(f"{seed}:knowledge"))
    adversary = Adversary(cfg.attacker, cfg.validators, random.Random(f"{seed}:adversary"))
    victims = set(adversary.victims)

    warmup = mech.warmup_slots(state)
    total = warmup + cfg.epochs * SLOTS_PER_EPOCH
    rows: list[dict[str, Any]] = []
    block_costs: dict[str, list[dict[str, int]]] = {}
    epoch_rows: list[dict[str, Any]] = []
    actions_measured = 0

    for slot in range(total):
        view = adversary_view(state)
        adversary.observe(view)
        targets = adversary.targets(view)
        proposer = mech.expected_proposer(state, slot)
        attacked = proposer in targets
        offline = attacked and dos_attempt(registry[proposer])
        phase = mech.block_phase(state, slot)
        block = None if offline else mech.build_block(state, registry[proposer])
        state, outcome = process_slot(state, block, attacked=offline)

        is_warmup = slot < warmup
        if not is_warmup:
            actions_measured += len(targets)
            if outcome.status is SlotStatus.PROPOSED:
                block_costs.setdefault(phase, []).append(outcome.block_ops)
        row = {
            "slot": slot,
            "proposer": proposer,
            "status": outcome.status.value,
            "attacked": attacked,
            "warmup": is_warmup,
            "invalid": outcome.invalid,
            "block_ops": sum(outcome.block_ops.values()),
        }
        if cfg.mechanism == "whisk" and slot in view.schedule_trackers:
            row["tracker"] = view.schedule_trackers[slot]
        rows.append(row)
        if outcome.epoch_phase is not None:
            epoch_rows.append(
                {
                    "epoch": slot // SLOTS_PER_EPOCH,
                    "phase": outcome.epoch_phase,
                    "ops": sum(outcome.epoch_ops.values()),
                    "warmup": is_warmup,
                    "by_kind": outcome.epoch_ops,
                }
            )

    measured = [r for r in rows if not r["warmup"]]
    metrics = _metrics(measured, rows, victims)
    metrics["attack_actions"] = actions_measured
    metrics["attack_actions_with_warmup"] = adversary.plan.actions

    cost: dict[str, Any] = {p: _phase_stats(s) for p, s in sorted(block_costs.items())}
    for phase in sorted({e["phase"] for e in epoch_rows}):
        cost[phase] = _phase_stats([e["by_kind"] for e in epoch_rows if e["phase"] == phase])
    cost["epochs"] = [{k: e[k] for k in ("epoch", "phase", "ops", "warmup")} for e in epoch_rows]

    mechanism_doc = mech.describe()
    if cfg.mechanism == "whisk":
        mechanism_doc["params"] = state.mechanism_state.params.as_dict()
    return {
        "format": REPORT_FORMAT,
        "status": "ok",
        "seed": seed,
        "config": cfg.echo(),
        "mechanism": mechanism_doc,
        "slots": {"total": total, "warmup": warmup, "measured": len(measured)},
        "metrics": metrics,
        "victims": sorted(victims),
        "cost": cost,
        "log": rows,
    }


def _metrics(measured: list[dict], rows: list[dict], victims: set[int]) -> dict[str, Any]:
    n = len(measured)
    missed = sum(r["status"] != SlotStatus.PROPOSED.value for r in measured)
    by_attack = [r for r in measured if r["status"] == SlotStatus.MISSED_BY_ATTACK.value]
    proposers = {r["proposer"] for r in measured}
    suppressed = {r["proposer"] for r in by_attack}
    victim_slots = [r for r in measured if r["proposer"] in victims]
    victim_missed = sum(r["status"] == SlotStatus.MISSED_BY_ATTACK.value for r in victim_slots)
    all_missed = sum(r["status"] != SlotStatus.PROPOSED.value for r in rows)
    return {
        "total_slots": n,
        "proposed_count": n - missed,
        "missed_count": missed,
        "missed_by_attack": len(by_attack),
        "invalid_blocks": sum(r["invalid"] for r in measured),
        "missed_fraction": missed / n if n else 0.0,
        "missed_fraction_with_warmup": all_missed / len(rows) if rows else 0.0,
        "unique_proposers": len(proposers),
        "unique_victims_suppressed": len(suppressed),
        "affected_fraction": len(suppressed) / len(proposers) if proposers else 0.0,
        "victim_slots": len(victim_slots),
        "victim_suppressed_slots": victim_missed,
        "victim_suppression_rate": victim_missed / len(victim_slots) if victim_slots else None,
    }


def run_seed(cfg: SimulationConfig, seed: int) -> dict[str, Any]:
    """Like :func:`simulate`, but a failure becomes a structured record."""
    try:
        return simulate(cfg, seed)
    except Exception as exc:  # one bad seed must not sink the batch
        log.exception("seed %s failed", seed)
        return {
            "format": REPORT_FORMAT,
            "status": "failed",
            "seed": seed,
            "config": cfg.echo(),
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }


def run(cfg: SimulationConfig, seeds: Iterable[int] | None = None) -> list[dict[str, Any]]:
    return [run_seed(cfg, s) for s in (cfg.seeds if seeds is None else seeds)]


def report_bytes(report: dict[str, Any]) -> bytes:
    return (json.dumps(report, sort_keys=True, indent=1) + "\n").encode()


def attack_enabled(cfg: SimulationConfig) -> bool:
    return cfg.attacker.mode is not AttackMode.NONE
