"""Simplified beacon chain: slots, epochs, RANDAO and the status-quo election.

The state machine is mechanism-agnostic.  Proposer election, block payloads
and epoch hooks are delegated to a :class:`Mechanism`; the status quo lives
here, Whisk and homomorphic sortition in their own modules.
"""

from __future__ import annotations

import enum
import hashlib
import hmac
import random
from dataclasses import dataclass, field
from typing import Any, Sequence

from .costs import CostMeter, metering
from .sampling import digest, u64, weighted_index

SLOTS_PER_EPOCH = 32
MIX_RING_LENGTH = 4
SEED_LOOKBACK_EPOCHS = 2

DOMAIN_PROPOSER = b"sslesim/proposer"


class ConsensusError(ValueError):
    pass


class InvalidBlock(ConsensusError):
    """A block whose mechanism payload or proposer claim fails verification."""


class HorizonError(ConsensusError):
    pass


class SlotStatus(str, enum.Enum):
    PROPOSED = "proposed"
    MISSED_BY_ATTACK = "missed_by_attack"
    MISSED_IDLE = "missed_idle"


@dataclass
class Validator:
    index: int
    effective_balance: int
    secret_seed: bytes = field(repr=False)
    ip_linked: bool = False
    protected: bool = False


@dataclass
class BeaconBlock:
    slot: int
    proposer_index: int
    randao_reveal: bytes
    payload: Any = None


@dataclass(frozen=True)
class SlotOutcome:
    slot: int
    proposer: int
    status: SlotStatus
    invalid: bool = False
    block_ops: dict[str, int] = field(default_factory=dict)
    epoch_phase: str | None = None
    epoch_ops: dict[str, int] | None = None


@dataclass(frozen=True)
class ScheduleEntry:
    slot: int
    validator: int | None = None
    tracker: str | None = None


@dataclass
class BeaconState:
    slot: int
    randao_mixes: list[bytes]
    registry: list[Validator]
    mechanism: Mechanism
    mechanism_state: Any = None
    rng_seed: int = 0

    @property
    def epoch(self) -> int:
        return self.slot // SLOTS_PER_EPOCH

    @property
    def balances(self) -> list[int]:
        return [v.effective_balance for v in self.registry]


def epoch_of(slot: int) -> int:
    return slot // SLOTS_PER_EPOCH


class Mechanism:
    """Proposer-election strategy plugged into the state machine.

    The default hooks do nothing; subclasses override what they need.
    ``expected_proposer`` is the simulation's ground truth and must never be
    reachable from an adversary view.
    """

    name = "abstract"

    def init_state(self, state: BeaconState, rng: random.Random) -> Any:
        return None

    def warmup_slots(self, state: BeaconState) -> int:
        return 0

    def expected_proposer(self, state: BeaconState, slot: int) -> int:
        raise NotImplementedError

    def build_block(self, state: BeaconState, v: Validator) -> BeaconBlock | None:
        raise NotImplementedError

    def validate_block(self, state: BeaconState, block: BeaconBlock) -> None:
        pass

    def apply_block(self, state: BeaconState, block: BeaconBlock) -> None:
        pass

    def process_epoch(self, state: BeaconState, epoch: int) -> str:
        return "epoch_processing"

    def on_slot_start(self, state: BeaconState) -> None:
        pass

    def schedule(self, state: BeaconState, epoch: int) -> list[ScheduleEntry]:
        return []

    def block_phase(self, state: BeaconState, slot: int) -> str:
        return "block_processing"

    def describe(self) -> dict[str, Any]:
        return {"name": self.name}


class StatusQuo(Mechanism):
    name = "status_quo"

    def expected_proposer(self, state: BeaconState, slot: int) -> int:
        return select_proposer_statusquo(state, slot)

    def build_block(self, state: BeaconState, v: Validator) -> BeaconBlock:
        return BeaconBlock(state.slot, v.index, randao_reveal(v, state.epoch))

    def validate_block(self, state: BeaconState, block: BeaconBlock) -> None:
        if block.proposer_index != select_proposer_statusquo(state, block.slot):
            raise InvalidBlock("block signed by a validator other than the scheduled proposer")

    def schedule(self, state: BeaconState, epoch: int) -> list[ScheduleEntry]:
        start = epoch * SLOTS_PER_EPOCH
        return [
            ScheduleEntry(s, select_proposer_statusquo(state, s))
            for s in range(start, start + SLOTS_PER_EPOCH)
        ]


def _genesis_mix(rng_seed: int, i: int) -> bytes:
    return hashlib.sha256(b"sslesim/genesis-mix" + u64(rng_seed) + u64(i)).digest()


def _secret_seed(rng_seed: int, index: int) -> bytes:
    return hashlib.sha256(b"sslesim/validator-secret" + u64(rng_seed) + u64(index)).digest()


def init_genesis(
    validator_count: int,
    balances: Sequence[int] = (),
    mechanism: str | Mechanism = "status_quo",
    rng_seed: int = 0,
    **mechanism_options: Any,
) -> BeaconState:
    if validator_count < 1:
        raise ConsensusError("need at least one validator")
    if balances and len(balances) != validator_count:
        raise ConsensusError("balances length must equal validator_count")
    balances = list(balances) or [1] * validator_count
    for i, b in enumerate(balances):
        if b < 1:
            raise ConsensusError(f"validator {i} has non-positive balance {b}")
    if isinstance(mechanism, str):
        from .mechanisms import make_mechanism

        mechanism = make_mechanism(mechanism, **mechanism_options)
    elif mechanism_options:
        raise ConsensusError("options only apply when the mechanism is given by name")

    registry = [
        Validator(i, balances[i], _secret_seed(rng_seed, i)) for i in range(validator_count)
    ]
    state = BeaconState(
        slot=0,
        randao_mixes=[_genesis_mix(rng_seed, i) for i in range(MIX_RING_LENGTH)],
        registry=registry,
        mechanism=mechanism,
        rng_seed=rng_seed,
    )
    rng = random.Random(f"{rng_seed}:mechanism:{mechanism.name}")
    state.mechanism_state = mechanism.init_state(state, rng)
    mechanism.on_slot_start(state)
    return state


def mix_randao(mix: bytes, reveal: bytes) -> bytes:
    h = digest(reveal)
    return bytes(a ^ b for a, b in zip(mix, h))


def randao_reveal(v: Validator, epoch: int) -> bytes:
    """Keyed digest of the validator's secret and the epoch."""
    return hmac.new(v.secret_seed, b"randao" + u64(epoch), hashlib.sha256).digest()


def _check_horizon(state: BeaconState, epoch: int) -> None:
    current = state.epoch
    if not current - 1 <= epoch <= current + 1:
        raise HorizonError(
            f"epoch {epoch} outside lookahead horizon [{current - 1}, {current + 1}]"
        )


def seed_mix(state: BeaconState, epoch: int) -> bytes:
    """Final RANDAO mix of ``epoch - 2`` (genesis mixes cover epochs 0 and 1)."""
    _check_horizon(state, epoch)
    return state.randao_mixes[(epoch - SEED_LOOKBACK_EPOCHS) % MIX_RING_LENGTH]


def get_seed(state: BeaconState, epoch: int, domain: bytes) -> bytes:
    return digest(domain, u64(epoch), seed_mix(state, epoch))


def select_proposer_statusquo(state: BeaconState, slot: int) -> int:
    seed = digest(get_seed(state, epoch_of(slot), DOMAIN_PROPOSER), u64(slot))
    return weighted_index(state.balances, seed)


def proposer_schedule(state: BeaconState, epoch: int) -> list[ScheduleEntry]:
    _check_horizon(state, epoch)
    return state.mechanism.schedule(state, epoch)


def _process_randao(state: BeaconState, block: BeaconBlock) -> None:
    proposer = state.registry[block.proposer_index]
    if not hmac.compare_digest(block.randao_reveal, randao_reveal(proposer, state.epoch)):
        raise InvalidBlock("bad RANDAO reveal")


def process_slot(
    state: BeaconState, block: BeaconBlock | None = None, *, attacked: bool = False
) -> tuple[BeaconState, SlotOutcome]:
    """Advance ``state`` by one slot, in place.

    ``attacked`` only labels a missing block; it has no effect on state.
    A block that fails verification leaves state untouched and is recorded
    as a missed, invalid slot.
    """
    mech = state.mechanism
    slot = state.slot
    proposer = mech.expected_proposer(state, slot)
    invalid = False
    block_meter = CostMeter()
    with metering(block_meter):
        if block is None:
            status = SlotStatus.MISSED_BY_ATTACK if attacked else SlotStatus.MISSED_IDLE
        else:
            if block.slot != slot:
                raise ConsensusError(f"block for slot {block.slot} applied at slot {slot}")
            try:
                if not 0 <= block.proposer_index < len(state.registry):
                    raise InvalidBlock("unknown proposer index")
                _process_randao(state, block)
                mech.validate_block(state, block)
            except InvalidBlock:
                invalid = True
                status = SlotStatus.MISSED_IDLE
            else:
                mech.apply_block(state, block)
                i = state.epoch % MIX_RING_LENGTH
                state.randao_mixes[i] = mix_randao(state.randao_mixes[i], block.randao_reveal)
                status = SlotStatus.PROPOSED

    epoch_phase = None
    epoch_ops = None
    if (slot + 1) % SLOTS_PER_EPOCH == 0:
        epoch = state.epoch
        with metering() as epoch_meter:
            epoch_phase = mech.process_epoch(state, epoch)
        state.randao_mixes[(epoch + 1) % MIX_RING_LENGTH] = state.randao_mixes[
            epoch % MIX_RING_LENGTH
        ]
        epoch_ops = epoch_meter.snapshot()

    state.slot += 1
    with metering(block_meter):
        mech.on_slot_start(state)

    outcome = SlotOutcome(
        slot=slot,
        proposer=proposer,
        status=status,
        invalid=invalid,
        block_ops=block_meter.snapshot(),
        epoch_phase=epoch_phase,
        epoch_ops=epoch_ops,
    )
    return state, outcome
