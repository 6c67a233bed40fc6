"""Whisk secret single leader election, pipelined by rounds.

Timeline (R = round length in slots, a multiple of the epoch length):

* Round 0 is warm-up.  Candidates for round 1 are selected at genesis and
  shuffled by status-quo proposers.
* In every round, the first ``R - cooldown`` slots shuffle the candidate
  list being prepared for the next round; the rest are cooldown.
* At the epoch boundary that ends a round ("shuffle end"), ``P`` proposer
  trackers are drawn from the shuffled candidates and frozen onto the next
  round's slots, and a fresh candidate list is selected.
* From round 1 on, the owner of a slot's tracker claims it with an
  ownership proof.

Validator linkage of candidates is public at selection time and erased
entry by entry as shuffles touch them.  The simulation keeps true owners in
private fields used only as ground truth.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any

from .consensus import (
    SLOTS_PER_EPOCH,
    BeaconBlock,
    BeaconState,
    InvalidBlock,
    Mechanism,
    ScheduleEntry,
    Validator,
    randao_reveal,
    select_proposer_statusquo,
)
from .crypto.group import SECP256K1, Element, GroupBackend
from .crypto.trackers import (
    OwnershipProof,
    ShuffleTranscript,
    Tracker,
    make_tracker,
    owns,
    prove_ownership,
    shuffle,
    verify_ownership,
    verify_shuffle,
)
from .sampling import digest, sample_distinct, u64, weighted_index

MAINNET_PROPOSERS = 8192
MAINNET_SHUFFLE_SIZE = 128

DOMAIN_CANDIDATES = b"sslesim/whisk-candidates"
DOMAIN_PROPOSERS = b"sslesim/whisk-proposers"
DOMAIN_SHUFFLE = b"sslesim/whisk-shuffle"
DOMAIN_SECRET = b"sslesim/whisk-k"


def next_power_of_two(x: float) -> int:
    n = 1
    while n < x:
        n *= 2
    return n


@dataclass(frozen=True)
class WhiskParams:
    candidates_per_round: int
    proposers_per_round: int
    round_length_slots: int
    trackers_per_shuffle: int
    cooldown_slots: int
    candidate_sampling: str = "auto"  # "auto" | "distinct" | "replacement"

    def __post_init__(self) -> None:
        c, p, r, m = (
            self.candidates_per_round,
            self.proposers_per_round,
            self.round_length_slots,
            self.trackers_per_shuffle,
        )
        if p < 1 or c != 2 * p:
            raise ValueError("candidates_per_round must be twice proposers_per_round")
        if r != p:
            raise ValueError("round_length_slots must equal proposers_per_round")
        if r % SLOTS_PER_EPOCH:
            raise ValueError("round length must be a whole number of epochs")
        if not 1 <= m <= c:
            raise ValueError("trackers_per_shuffle must be in [1, candidates_per_round]")
        if not 0 <= self.cooldown_slots < r:
            raise ValueError("cooldown must leave at least one shuffling slot")
        if self.candidate_sampling not in ("auto", "distinct", "replacement"):
            raise ValueError(f"unknown candidate_sampling {self.candidate_sampling!r}")

    def with_replacement(self, validator_count: int) -> bool:
        if self.candidate_sampling == "auto":
            return self.candidates_per_round > validator_count
        if self.candidate_sampling == "distinct" and self.candidates_per_round > validator_count:
            raise ValueError("distinct sampling needs at least as many validators as candidates")
        return self.candidate_sampling == "replacement"

    def as_dict(self) -> dict[str, Any]:
        return {
            "candidates_per_round": self.candidates_per_round,
            "proposers_per_round": self.proposers_per_round,
            "round_length_slots": self.round_length_slots,
            "trackers_per_shuffle": self.trackers_per_shuffle,
            "cooldown_slots": self.cooldown_slots,
            "candidate_sampling": self.candidate_sampling,
        }


def scale_params(validator_count: int) -> WhiskParams:
    """Mainnet ratios shrunk to the validator set.

    P = next_pow2(N/8) clamped to [32, 8192], C = 2P, R = P,
    m = max(2, next_pow2(C/128)), cooldown = R/16.
    """
    if validator_count < 8:
        raise ValueError("Whisk scaling needs at least 8 validators")
    p = min(MAINNET_PROPOSERS, max(SLOTS_PER_EPOCH, next_power_of_two(validator_count / 8)))
    c = 2 * p
    m = max(2, next_power_of_two(c / MAINNET_SHUFFLE_SIZE))
    return WhiskParams(c, p, p, m, p // 16)


@dataclass
class WhiskShuffle:
    positions: tuple[int, ...]
    outputs: tuple[Tracker, ...]
    transcript: ShuffleTranscript = field(repr=False)


@dataclass
class WhiskPayload:
    shuffle: WhiskShuffle | None = None
    proof: OwnershipProof | None = None


@dataclass
class WhiskState:
    params: WhiskParams
    group: GroupBackend
    trackers: list[Tracker]
    k_commitments: list[Element]
    candidates: list[Tracker] = field(default_factory=list)
    candidate_origin: list[int | None] = field(default_factory=list)
    candidate_round: int = 0
    proposers: list[Tracker] = field(default_factory=list)
    proposer_round: int | None = None
    _secrets: list[int] = field(default_factory=list, repr=False)
    _candidate_owner: list[int] = field(default_factory=list, repr=False)
    _proposer_owner: list[int] = field(default_factory=list, repr=False)
    _rng: random.Random = field(default_factory=random.Random, repr=False)

    def round_of(self, slot: int) -> int:
        return slot // self.params.round_length_slots

    def phase(self, slot: int) -> str:
        pos = slot % self.params.round_length_slots
        p = self.params
        return "shuffling" if pos < p.round_length_slots - p.cooldown_slots else "cooldown"

    def linked_count(self) -> int:
        return sum(o is not None for o in self.candidate_origin)


def tracker_handle(t: Tracker) -> str:
    return digest(t.to_bytes())[:8].hex()


def select_candidates(
    state: BeaconState, params: WhiskParams, seed: bytes
) -> list[tuple[Tracker, int]]:
    """Stake-weighted candidate draw from registered trackers.

    Distinct validators unless the list is larger than the validator set
    (or replacement is forced).
    """
    ws: WhiskState = state.mechanism_state
    balances = state.balances
    top = max(balances)
    replace = params.with_replacement(len(balances))
    chosen: list[int] = []
    seen: set[int] = set()
    i = 0
    while len(chosen) < params.candidates_per_round:
        idx = weighted_index(balances, digest(seed, u64(i)), top)
        i += 1
        if not replace:
            if idx in seen:
                continue
            seen.add(idx)
        chosen.append(idx)
    return [(ws.trackers[v], v) for v in chosen]


def select_proposers_whisk(ws: WhiskState, seed: bytes) -> list[tuple[Tracker, int]]:
    """``P`` distinct positions of the shuffled candidate list, in slot order."""
    picks = sample_distinct(len(ws.candidates), ws.params.proposers_per_round, seed)
    return [(ws.candidates[i], ws._candidate_owner[i]) for i in picks]


def shuffle_positions(reveal: bytes, params: WhiskParams) -> tuple[int, ...]:
    return tuple(
        sample_distinct(
            params.candidates_per_round, params.trackers_per_shuffle, digest(DOMAIN_SHUFFLE, reveal)
        )
    )


def make_shuffle(ws: WhiskState, reveal: bytes, rng: random.Random) -> WhiskShuffle:
    positions = shuffle_positions(reveal, ws.params)
    outputs, transcript = shuffle([ws.candidates[i] for i in positions], rng)
    return WhiskShuffle(positions, tuple(outputs), transcript)


def verify_whisk_shuffle(ws: WhiskState, reveal: bytes, sh: WhiskShuffle) -> bool:
    if sh.positions != shuffle_positions(reveal, ws.params):
        return False
    inputs = [ws.candidates[i] for i in sh.positions]
    return verify_shuffle(inputs, sh.outputs, sh.transcript)


def apply_shuffle(ws: WhiskState, sh: WhiskShuffle) -> None:
    perm = sh.transcript.permutation
    owners = [ws._candidate_owner[p] for p in sh.positions]
    for i, pos in enumerate(sh.positions):
        ws.candidates[pos] = sh.outputs[i]
        ws._candidate_owner[pos] = owners[perm[i]]
        ws.candidate_origin[pos] = None


def shuffle_step(ws: WhiskState, reveal: bytes, rng: random.Random) -> WhiskState:
    """One proposer's shuffle: build, verify as every node would, apply."""
    sh = make_shuffle(ws, reveal, rng)
    if not verify_whisk_shuffle(ws, reveal, sh):
        raise InvalidBlock("shuffle transcript rejected")
    apply_shuffle(ws, sh)
    return ws


def claim_context(slot: int) -> bytes:
    return b"sslesim/whisk-claim" + u64(slot)


class Whisk(Mechanism):
    name = "whisk"

    def __init__(self, params: WhiskParams | None = None, group: GroupBackend | str = SECP256K1):
        if isinstance(group, str):
            from .crypto.group import get_group

            group = get_group(group)
        self.params = params
        self.group = group

    def _params(self, state: BeaconState) -> WhiskParams:
        return self.params or scale_params(len(state.registry))

    def describe(self) -> dict[str, Any]:
        return {"name": self.name, "group": self.group.name}

    def init_state(self, state: BeaconState, rng: random.Random) -> WhiskState:
        params = self._params(state)
        g = self.group
        n = len(state.registry)
        if n >= g.order:
            raise ValueError(f"{g.name} cannot give {n} validators distinct secrets")
        secrets: list[int] = []
        used: set[int] = set()
        for v in state.registry:
            ctr = 0
            while True:
                k = g.hash_to_scalar(DOMAIN_SECRET, v.secret_seed, u64(ctr))
                ctr += 1
                if k and k not in used:
                    break
            used.add(k)
            secrets.append(k)
        trackers = [make_tracker(k, g.random_scalar(rng), g) for k in secrets]
        ws = WhiskState(
            params=params,
            group=g,
            trackers=trackers,
            k_commitments=[g.base_mul(k) for k in secrets],
            _secrets=secrets,
            _rng=random.Random(rng.getrandbits(64)),
        )
        state.mechanism_state = ws
        self._select_candidates(state, 0, state.randao_mixes[0])
        return ws

    def _select_candidates(self, state: BeaconState, round_index: int, mix: bytes) -> None:
        ws: WhiskState = state.mechanism_state
        seed = digest(DOMAIN_CANDIDATES, u64(round_index), mix)
        picked = select_candidates(state, ws.params, seed)
        ws.candidates = [t for t, _ in picked]
        ws._candidate_owner = [v for _, v in picked]
        ws.candidate_origin = list(ws._candidate_owner)
        ws.candidate_round = round_index

    def warmup_slots(self, state: BeaconState) -> int:
        return state.mechanism_state.params.round_length_slots

    def _slot_tracker(self, ws: WhiskState, slot: int) -> Tracker:
        if ws.proposer_round != ws.round_of(slot):
            raise InvalidBlock(f"no frozen proposer list for slot {slot}")
        return ws.proposers[slot % ws.params.round_length_slots]

    def expected_proposer(self, state: BeaconState, slot: int) -> int:
        ws: WhiskState = state.mechanism_state
        if ws.round_of(slot) == 0:
            return select_proposer_statusquo(state, slot)
        self._slot_tracker(ws, slot)
        return ws._proposer_owner[slot % ws.params.round_length_slots]

    def block_phase(self, state: BeaconState, slot: int) -> str:
        ws: WhiskState = state.mechanism_state
        return "block_processing" if ws.phase(slot) == "shuffling" else "block_processing_cooldown"

    def build_block(self, state: BeaconState, v: Validator) -> BeaconBlock | None:
        ws: WhiskState = state.mechanism_state
        slot = state.slot
        reveal = randao_reveal(v, state.epoch)
        payload = WhiskPayload()
        if ws.round_of(slot) > 0:
            t = self._slot_tracker(ws, slot)
            k = ws._secrets[v.index]
            if not owns(t, k):
                return None
            payload.proof = prove_ownership(t, k, claim_context(slot))
        elif v.index != select_proposer_statusquo(state, slot):
            return None
        if ws.phase(slot) == "shuffling":
            payload.shuffle = make_shuffle(ws, reveal, ws._rng)
        return BeaconBlock(slot, v.index, reveal, payload)

    def validate_block(self, state: BeaconState, block: BeaconBlock) -> None:
        ws: WhiskState = state.mechanism_state
        payload = block.payload
        if not isinstance(payload, WhiskPayload):
            raise InvalidBlock("missing Whisk payload")
        slot = block.slot
        if ws.round_of(slot) > 0:
            t = self._slot_tracker(ws, slot)
            proof = payload.proof
            if proof is None or not verify_ownership(t, proof, claim_context(slot)):
                raise InvalidBlock("tracker ownership proof rejected")
            if not ws.group.eq(proof.k_commitment, ws.k_commitments[block.proposer_index]):
                raise InvalidBlock("proof commitment does not match the claimed validator")
        elif block.proposer_index != select_proposer_statusquo(state, slot):
            raise InvalidBlock("warm-up block from an unscheduled validator")
        if ws.phase(slot) == "shuffling":
            if payload.shuffle is None or not verify_whisk_shuffle(
                ws, block.randao_reveal, payload.shuffle
            ):
                raise InvalidBlock("shuffle transcript rejected")
        elif payload.shuffle is not None:
            raise InvalidBlock("shuffle during cooldown")

    def apply_block(self, state: BeaconState, block: BeaconBlock) -> None:
        if block.payload.shuffle is not None:
            apply_shuffle(state.mechanism_state, block.payload.shuffle)

    def process_epoch(self, state: BeaconState, epoch: int) -> str:
        ws: WhiskState = state.mechanism_state
        next_slot = (epoch + 1) * SLOTS_PER_EPOCH
        if next_slot % ws.params.round_length_slots:
            return "epoch_processing"
        mix = state.randao_mixes[epoch % len(state.randao_mixes)]
        picked = select_proposers_whisk(ws, digest(DOMAIN_PROPOSERS, u64(epoch), mix))
        ws.proposers = [t for t, _ in picked]
        ws._proposer_owner = [v for _, v in picked]
        ws.proposer_round = ws.round_of(next_slot)
        self._select_candidates(state, ws.proposer_round, mix)
        return "shuffle_end"

    def schedule(self, state: BeaconState, epoch: int) -> list[ScheduleEntry]:
        ws: WhiskState = state.mechanism_state
        out = []
        for s in range(epoch * SLOTS_PER_EPOCH, (epoch + 1) * SLOTS_PER_EPOCH):
            r = ws.round_of(s)
            if r == 0:
                out.append(ScheduleEntry(s, validator=select_proposer_statusquo(state, s)))
            elif ws.proposer_round == r:
                t = ws.proposers[s % ws.params.round_length_slots]
                out.append(ScheduleEntry(s, tracker=tracker_handle(t)))
        return out


def claim_and_propose(state: BeaconState, slot: int, v: Validator) -> BeaconBlock | None:
    if slot != state.slot:
        raise ValueError("claims are only made for the current slot")
    return state.mechanism.build_block(state, v)

