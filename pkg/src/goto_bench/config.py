"""Run configuration: TOML file -> validated config dataclasses.

The file mirrors the component configs section by section:

    seed = 7

    [stepper]
    max_step_len = 0.4   # m

    [reward]
    w_c = 0.2            # 1/m^2

    [cem]
    iterations = 300

    [grid]
    distances = [0.5, 1.0, 2.0, 4.0]   # m

Unknown sections or keys are rejected so a typo cannot silently fall
back to a default.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Union

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .bench import CommandGrid
from .reward import RewardConfig
from .stepper import StepperConfig
from .trainer import CemConfig


class ConfigError(ValueError):
    """Invalid or unparseable run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Merged view of all component configurations plus the master seed."""

    stepper: StepperConfig = field(default_factory=StepperConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    cem: CemConfig = field(default_factory=CemConfig)
    grid: CommandGrid = field(default_factory=CommandGrid)
    seed: int = 0


_SECTIONS = {
    "stepper": StepperConfig,
    "reward": RewardConfig,
    "cem": CemConfig,
    "grid": CommandGrid,
}

# Tuple-typed CommandGrid fields arrive as TOML arrays.
_TUPLE_FIELDS = {"distances", "approach_angles", "headings"}


def _build_section(name: str, cls, data: Dict[str, Any]):
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}"
        )
    kwargs = {
        k: tuple(v) if k in _TUPLE_FIELDS and isinstance(v, list) else v
        for k, v in data.items()
    }
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [{name}] configuration: {exc}") from exc


def parse_config(data: Dict[str, Any]) -> RunConfig:
    """Validate a parsed TOML document into a RunConfig."""
    data = dict(data)
    seed = data.pop("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    sections = {}
    for name, cls in _SECTIONS.items():
        raw = data.pop(name, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"[{name}] must be a table")
        sections[name] = _build_section(name, cls, raw)
    if data:
        raise ConfigError(
            f"unknown top-level key(s): {', '.join(sorted(data))}"
        )
    return RunConfig(seed=seed, **sections)


def load_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a TOML run configuration file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        with open(p, "rb") as f:
            doc = tomllib.load(f)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc
    return parse_config(doc)
