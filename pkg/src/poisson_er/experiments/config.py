"""Experiment configuration and the flat ``key = value`` config format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from poisson_er.errors import ParameterError

_LIST_FIELDS = {"n_grid": int, "c_grid": float}
_SCALAR_FIELDS = {
    "experiment": str,
    "experiment_name": str,
    "c": float,
    "lam": float,
    "alpha": float,
    "p": float,
    "trials": int,
    "seed": int,
    "k_max": int,
    "workers": int,
    "output_path": str,
}
# Config-file spellings that differ from attribute names.
_ALIASES = {"lambda": "lam"}


@dataclass
class ExperimentConfig:
    """Everything an experiment driver needs.

    ``experiment`` selects the driver; ``experiment_name`` names the output
    files. Keys starting with ``tol_`` land in ``tolerances`` (all scaled by
    ``--tolerance-scale``); remaining driver-specific keys land in
    ``options``. ``workers`` and ``output_path`` never reach a report.
    """

    experiment: str
    experiment_name: str = ""
    c: float | None = None
    lam: float | None = None
    alpha: float | None = None
    p: float | None = None
    n_grid: list[int] = field(default_factory=list)
    c_grid: list[float] = field(default_factory=list)
    trials: int = 1
    seed: int = 0
    k_max: int | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    options: dict[str, float | list[float]] = field(default_factory=dict)
    workers: int = 1
    output_path: str | None = None

    def __post_init__(self):
        if not self.experiment_name:
            self.experiment_name = self.experiment

    def validate(self) -> "ExperimentConfig":
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if not self.n_grid:
            raise ParameterError("n_grid must be non-empty")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")
        for name, value in self.tolerances.items():
            if not value > 0:
                raise ParameterError(f"tolerance {name} must be positive")
        return self

    def option(self, name: str, default):
        return self.options.get(name, default)

    def tol(self, name: str) -> float:
        try:
            return self.tolerances[name]
        except KeyError:
            raise ParameterError(f"config {self.experiment_name!r} lacks tolerance tol_{name}") from None

    def echo(self) -> dict:
        """Config fields that determine a report (no worker count, no paths)."""
        d = dataclasses.asdict(self)
        d.pop("workers")
        d.pop("output_path")
        return d

    def scaled(self, factor: float) -> "ExperimentConfig":
        return dataclasses.replace(self, tolerances={k: v * factor for k, v in self.tolerances.items()})


def _parse_number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def _coerce(key: str, raw: str):
    if key in _LIST_FIELDS:
        return [_LIST_FIELDS[key](_parse_number(x.strip())) for x in raw.split(",") if x.strip()]
    kind = _SCALAR_FIELDS[key]
    if kind is str:
        return raw
    if kind is int:
        value = _parse_number(raw)
        if float(value) != int(value):
            raise ParameterError(f"{key} must be an integer, got {raw!r}")
        return int(value)
    return float(raw)


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into a dict of typed values.

    ``#`` starts a comment. Comma-separated values become lists.
    """
    out: dict = {"tolerances": {}, "options": {}}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key.startswith("tol_"):
            out["tolerances"][key[4:]] = float(raw)
        elif key in _SCALAR_FIELDS or key in _LIST_FIELDS:
            out[key] = _coerce(key, raw)
        else:
            values = [_parse_number(x.strip()) for x in raw.split(",")]
            out["options"][key] = values if len(values) > 1 else values[0]
    return out


def config_from_mapping(values: dict) -> ExperimentConfig:
    if "experiment" not in values:
        raise ParameterError("config needs an 'experiment' key")
    return ExperimentConfig(**values)


def load_config(path: str | Path) -> ExperimentConfig:
    return config_from_mapping(parse_config_text(Path(path).read_text()))


def shipped_config(name: str) -> ExperimentConfig:
    """Load one of the default configs bundled with the package."""
    text = resources.files("poisson_er.configs").joinpath(f"{name}.cfg").read_text()
    return config_from_mapping(parse_config_text(text))


def merge_overrides(config: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    """Return ``config`` with non-None ``overrides`` applied (flags beat files)."""
    updates = {k: v for k, v in overrides.items() if v is not None}
    return dataclasses.replace(config, **updates)
