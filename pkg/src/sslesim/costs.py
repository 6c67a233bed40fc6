"""Operation-cost accounting.

Every primitive that matters for the cost comparison calls :func:`tally`.
Counts go to whichever :class:`CostMeter` is active in the current context,
so pure functions stay pure and concurrent runs never share a meter.
"""

from __future__ import annotations

import contextlib
import contextvars
from collections import Counter
from typing import Iterator

# FHE op kinds, then the group/hash kinds used by the other mechanisms.
OP_KINDS = (
    "add",
    "sub",
    "cmp",
    "select",
    "xor",
    "and",
    "rotate",
    "table-lookup",
    "hash",
    "scalar-mul",
    "point-add",
)

_active: contextvars.ContextVar[CostMeter | None] = contextvars.ContextVar(
    "sslesim_cost_meter", default=None
)


class CostMeter:
    """Monotone per-kind operation counters."""

    def __init__(self) -> None:
        self._counts: Counter[str] = Counter()

    def tally(self, kind: str, n: int = 1) -> None:
        if kind not in OP_KINDS:
            raise ValueError(f"unknown op kind {kind!r}")
        if n < 0:
            raise ValueError("counts are monotone")
        self._counts[kind] += n

    def snapshot(self) -> dict[str, int]:
        return {k: self._counts[k] for k in OP_KINDS if self._counts[k]}

    def total(self) -> int:
        return sum(self._counts.values())

    def __getitem__(self, kind: str) -> int:
        return self._counts[kind]

    def merge(self, other: CostMeter) -> None:
        self._counts.update(other._counts)

    def reset(self) -> None:
        self._counts.clear()

    def __repr__(self) -> str:
        return f"CostMeter({self.snapshot()})"


def tally(kind: str, n: int = 1) -> None:
    meter = _active.get()
    if meter is not None:
        meter.tally(kind, n)


@contextlib.contextmanager
def metering(meter: CostMeter | None = None) -> Iterator[CostMeter]:
    """Route tallies inside the block to ``meter`` (a fresh one by default)."""
    meter = CostMeter() if meter is None else meter
    token = _active.set(meter)
    try:
        yield meter
    finally:
        _active.reset(token)
