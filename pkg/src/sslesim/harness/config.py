"""JSON experiment configuration."""

from __future__ import annotations

import json
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..adversary import AttackerConfig
from ..whisk import WhiskParams, scale_params


class ConfigError(ValueError):
    """Invalid configuration; ``field`` is the dotted path of the culprit."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
        self.message = message

    def to_dict(self) -> dict[str, str]:
        return {"error": "config", "field": self.field, "message": self.message}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class WhiskOverride(_Strict):
    candidates_per_round: int | None = Field(None, ge=2)
    proposers_per_round: int | None = Field(None, ge=1)
    round_length_slots: int | None = Field(None, ge=1)
    trackers_per_shuffle: int | None = Field(None, ge=1)
    cooldown_slots: int | None = Field(None, ge=0)
    candidate_sampling: Literal["auto", "distinct", "replacement"] = "auto"


class HSortitionOptions(_Strict):
    mode: Literal["simplified", "full"] = "simplified"
    width: Literal[64] = 64
    prince_rounds: int = Field(12, ge=2, le=12, multiple_of=2)


class OutputOptions(_Strict):
    report_dir: str | None = None
    log: str | None = None


class SimulationConfig(_Strict):
    validators: int = Field(ge=1)
    epochs: int = Field(ge=1)
    mechanism: Literal["status_quo", "whisk", "hsortition"]
    seeds: list[int] = Field(min_length=1)
    balances: list[int] = Field(default_factory=list)
    attacker: AttackerConfig = Field(default_factory=AttackerConfig)
    whisk: WhiskOverride | None = None
    hsortition: HSortitionOptions = Field(default_factory=HSortitionOptions)
    group: Literal["secp256k1", "tiny"] = "secp256k1"
    output: OutputOptions = Field(default_factory=OutputOptions)

    @model_validator(mode="after")
    def _check(self) -> SimulationConfig:
        if self.balances and len(self.balances) != self.validators:
            raise ValueError("balances must be empty or have one entry per validator")
        if any(b < 1 for b in self.balances):
            raise ValueError("balances must all be >= 1")
        if self.mechanism == "whisk":
            self.whisk_params()
        return self

    def whisk_params(self) -> WhiskParams:
        """Scaled Whisk parameters with any overrides applied."""
        if self.whisk is None and self.validators < 8:
            raise ValueError("whisk needs >= 8 validators or explicit whisk parameters")
        base = scale_params(max(self.validators, 8)).as_dict()
        if self.whisk is not None:
            for k, v in self.whisk.model_dump().items():
                if v is not None:
                    base[k] = v
        return WhiskParams(**base)

    def echo(self) -> dict:
        return self.model_dump(mode="json")

    def scenario_key(self) -> str:
        """Canonical config text with seeds and output paths removed."""
        doc = self.echo()
        doc.pop("seeds")
        doc.pop("output")
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _field_path(loc: tuple) -> str:
    return ".".join(str(p) for p in loc if not str(p).startswith("function-"))


def parse_config(text: str | bytes) -> SimulationConfig:
    try:
        data = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError("", f"malformed JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("", "top level must be a JSON object")
    try:
        return SimulationConfig.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        raise ConfigError(_field_path(err["loc"]), err["msg"]) from None
    except ValueError as exc:
        raise ConfigError("", str(exc)) from None
