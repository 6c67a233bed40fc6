"""Name-to-mechanism registry."""

from __future__ import annotations

from typing import Any

from .consensus import Mechanism, StatusQuo

MECHANISM_NAMES = ("status_quo", "whisk", "hsortition")


def make_mechanism(name: str, **options: Any) -> Mechanism:
    if name == "status_quo":
        if options:
            raise ValueError(f"status_quo takes no options, got {sorted(options)}")
        return StatusQuo()
    if name == "whisk":
        from .whisk import Whisk

        return Whisk(**options)
    if name == "hsortition":
        from .hsortition import HSortition

        return HSortition(**options)
    raise ValueError(f"unknown mechanism {name!r}; expected one of {MECHANISM_NAMES}")
