"""Run configuration: defaults, overridden by a flat ``key=value`` file, overridden by flags."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Mapping, Optional, Union

from .core import DEFAULT_N_CAP
from .errors import InvalidParameterError
from .optimizer import DEFAULT_MARGIN
from .tables import DEFAULT_TOLERANCE

FORMATS = ("json", "csv", "text")


@dataclass(frozen=True)
class Config:
    n_cap: int = DEFAULT_N_CAP
    margin: float = DEFAULT_MARGIN
    tolerance: float = DEFAULT_TOLERANCE
    format: str = "text"
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.format not in FORMATS:
            raise InvalidParameterError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.n_cap < 1:
            raise InvalidParameterError(f"n_cap must be >= 1, got {self.n_cap}")
        if not self.margin > 0:
            raise InvalidParameterError(f"margin must be > 0, got {self.margin}")
        if not self.tolerance > 0:
            raise InvalidParameterError(f"tolerance must be > 0, got {self.tolerance}")
        if self.workers < 1:
            raise InvalidParameterError(f"workers must be >= 1, got {self.workers}")

    def updated(self, values: Mapping[str, object]) -> "Config":
        """Copy with every non-None entry of ``values`` applied (strings are coerced)."""
        types = {f.name: f.type for f in fields(self)}
        changes = {}
        for key, value in values.items():
            key = key.replace("-", "_")
            if value is None:
                continue
            if key not in types:
                raise InvalidParameterError(f"unknown config key {key!r}")
            caster = {"int": int, "float": float, "str": str}[types[key]]
            try:
                changes[key] = caster(value)
            except ValueError:
                raise InvalidParameterError(f"bad value for {key}: {value!r}") from None
        return replace(self, **changes)


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Mapping[str, object]] = None) -> Config:
    cfg = Config()
    if path is not None:
        cfg = cfg.updated(parse_config_text(Path(path).read_text("utf-8")))
    if overrides:
        cfg = cfg.updated(overrides)
    return cfg
