"""Configurable DoS / censorship attacker.

The attacker only ever sees an :class:`AdversaryView`: the public proposer
schedule, Whisk candidate linkage while it is still public, and vouchers
already published.  A DoS on a validator succeeds iff the attacker has
linked it to an IP address and it has no extra protection.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field
from typing import Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .consensus import BeaconState, Validator, proposer_schedule


class AttackMode(str, enum.Enum):
    NONE = "none"
    TARGETED_DOS = "targeted_dos"
    ADVANCED_DOS = "advanced_dos"
    CENSORSHIP = "censorship"
    ADVANCED_CENSORSHIP = "advanced_censorship"


class AttackerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: AttackMode = AttackMode.NONE
    p_link: float = Field(0.8, ge=0.0, le=1.0)
    protected_fraction: float = Field(0.2, ge=0.0, le=1.0)
    capacity_fraction: float = Field(0.1, ge=0.0, le=1.0)
    victim_fraction: float = Field(0.1, ge=0.0, le=1.0)
    # Whisk advanced DoS: attack the candidate snapshot whose trackers serve
    # the current round ("serving"), or the newest published list ("latest").
    whisk_target: str = Field("serving", pattern="^(serving|latest)$")

    @model_validator(mode="after")
    def _capacity_nonzero(self) -> AttackerConfig:
        if self.mode is not AttackMode.NONE and self.capacity_fraction == 0:
            raise ValueError("capacity_fraction must be positive when an attack is configured")
        return self

    def capacity_count(self, n: int) -> int:
        if self.mode is AttackMode.NONE:
            return 0
        return max(1, round(self.capacity_fraction * n))

    def victim_count(self, n: int) -> int:
        return round(self.victim_fraction * n)


def assign_knowledge(
    registry: Sequence[Validator], cfg: AttackerConfig, rng: random.Random
) -> Sequence[Validator]:
    """Bernoulli(p_link) IP linking; an exact protected fraction."""
    n = len(registry)
    for v in registry:
        v.ip_linked = rng.random() < cfg.p_link
        v.protected = False
    for i in rng.sample(range(n), round(cfg.protected_fraction * n)):
        registry[i].protected = True
    return registry


def dos_attempt(v: Validator) -> bool:
    """True if a DoS on ``v`` takes it offline for the slot."""
    return v.ip_linked and not v.protected


@dataclass(frozen=True)
class AdversaryView:
    slot: int
    validator_count: int
    mechanism: str
    schedule: dict[int, int] = field(default_factory=dict)
    schedule_trackers: dict[int, str] = field(default_factory=dict)
    whisk_round_length: int | None = None
    whisk_candidate_round: int | None = None
    whisk_candidate_origin: tuple[int | None, ...] | None = None
    published_vouchers: tuple[tuple[int, int], ...] = ()

    def to_bytes(self) -> bytes:
        doc = {
            "slot": self.slot,
            "validator_count": self.validator_count,
            "mechanism": self.mechanism,
            "schedule": sorted(self.schedule.items()),
            "schedule_trackers": sorted(self.schedule_trackers.items()),
            "whisk_round_length": self.whisk_round_length,
            "whisk_candidate_round": self.whisk_candidate_round,
            "whisk_candidate_origin": self.whisk_candidate_origin,
            "published_vouchers": self.published_vouchers,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


def adversary_view(state: BeaconState) -> AdversaryView:
    """Everything an outside observer can know at the start of ``state.slot``."""
    from .hsortition import SortitionState
    from .whisk import WhiskState

    slot = state.slot
    schedule: dict[int, int] = {}
    trackers: dict[int, str] = {}
    for entry in proposer_schedule(state, state.epoch):
        if entry.validator is not None:
            schedule[entry.slot] = entry.validator
        if entry.tracker is not None:
            trackers[entry.slot] = entry.tracker
    kwargs = {}
    ms = state.mechanism_state
    if isinstance(ms, WhiskState):
        kwargs = dict(
            whisk_round_length=ms.params.round_length_slots,
            whisk_candidate_round=ms.candidate_round,
            whisk_candidate_origin=tuple(ms.candidate_origin),
        )
    elif isinstance(ms, SortitionState):
        kwargs = dict(
            published_vouchers=tuple(sorted((s, v) for s, v in ms.published.items() if s < slot))
        )
    return AdversaryView(
        slot=slot,
        validator_count=len(state.registry),
        mechanism=state.mechanism.name,
        schedule=schedule,
        schedule_trackers=trackers,
        **kwargs,
    )


def plan_targeted_dos(view: AdversaryView, rng: random.Random) -> list[int]:
    """The publicly scheduled proposer, or a blind guess if there is none."""
    if view.slot in view.schedule:
        return [view.schedule[view.slot]]
    return [rng.randrange(view.validator_count)]


def plan_censorship(view: AdversaryView, victims: Sequence[int], capacity: int, advanced: bool) -> list[int]:
    if advanced:
        return list(victims[:capacity])
    proposer = view.schedule.get(view.slot)
    if proposer is not None and proposer in set(victims):
        return [proposer]
    return []


@dataclass
class AttackPlan:
    targets: dict[int, list[int]] = field(default_factory=dict)
    actions: int = 0

    def record(self, slot: int, targets: list[int]) -> None:
        self.targets[slot] = targets
        self.actions += len(targets)


class Adversary:
    """Stateful attacker for one run; reads only adversary views."""

    def __init__(self, cfg: AttackerConfig, validator_count: int, rng: random.Random) -> None:
        self.cfg = cfg
        self.n = validator_count
        self.rng = rng
        self.capacity = cfg.capacity_count(validator_count)
        self.victims: list[int] = []
        if cfg.mode in (AttackMode.CENSORSHIP, AttackMode.ADVANCED_CENSORSHIP):
            self.victims = sorted(rng.sample(range(validator_count), cfg.victim_count(validator_count)))
        self.plan = AttackPlan()
        self._fixed_targets: list[int] | None = None
        self._snapshots: dict[int, tuple[int, ...]] = {}
        self._snapshot_targets: dict[int, list[int]] = {}

    def observe(self, view: AdversaryView) -> None:
        origin = view.whisk_candidate_origin
        rnd = view.whisk_candidate_round
        if origin is not None and rnd not in self._snapshots and all(o is not None for o in origin):
            self._snapshots[rnd] = tuple(origin)

    def _whisk_targets(self, view: AdversaryView) -> list[int]:
        if not self._snapshots:
            return self._uniform_targets()
        serving = view.slot // view.whisk_round_length - 1
        if self.cfg.whisk_target == "latest" or serving not in self._snapshots:
            rnd = max(self._snapshots)
        else:
            rnd = serving
        if rnd not in self._snapshot_targets:
            pool = sorted(set(self._snapshots[rnd]))
            k = min(self.capacity, len(pool))
            self._snapshot_targets[rnd] = sorted(self.rng.sample(pool, k))
        return self._snapshot_targets[rnd]

    def _uniform_targets(self) -> list[int]:
        if self._fixed_targets is None:
            k = min(self.capacity, self.n)
            self._fixed_targets = sorted(self.rng.sample(range(self.n), k))
        return self._fixed_targets

    def targets(self, view: AdversaryView) -> list[int]:
        mode = self.cfg.mode
        if mode is AttackMode.NONE:
            out: list[int] = []
        elif mode is AttackMode.TARGETED_DOS:
            out = plan_targeted_dos(view, self.rng)
        elif mode is AttackMode.ADVANCED_DOS:
            if view.mechanism == "whisk":
                out = self._whisk_targets(view)
            else:
                out = self._uniform_targets()
        else:
            out = plan_censorship(
                view, self.victims, self.capacity, mode is AttackMode.ADVANCED_CENSORSHIP
            )
        out = out[: self.capacity]
        self.plan.record(view.slot, out)
        return out


def expected_missed_fraction(cfg: AttackerConfig, coverage: float) -> float:
    """p_link * (1 - protected) * coverage."""
    return cfg.p_link * (1 - cfg.protected_fraction) * coverage

