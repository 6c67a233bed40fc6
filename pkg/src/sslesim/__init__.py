"""Seeded simulator for attacks on proof-of-stake leader election."""

from .consensus import (
    SLOTS_PER_EPOCH,
    BeaconState,
    SlotStatus,
    init_genesis,
    process_slot,
    proposer_schedule,
)
from .harness.config import SimulationConfig, parse_config
from .harness.runner import run, simulate
from .mechanisms import MECHANISM_NAMES, make_mechanism

__version__ = "0.1.0"

__all__ = [
    "SLOTS_PER_EPOCH",
    "BeaconState",
    "MECHANISM_NAMES",
    "SimulationConfig",
    "SlotStatus",
    "init_genesis",
    "make_mechanism",
    "parse_config",
    "process_slot",
    "proposer_schedule",
    "run",
    "simulate",
]
