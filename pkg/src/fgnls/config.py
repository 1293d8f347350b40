"""Flat key = value run configuration with exact round-tripping.

Values are Python literals (numbers, strings, bracketed lists); floats are
emitted with repr so that parse(emit(cfg)) == cfg bit for bit.  No
environment variable affects the numerics.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field, fields

from .errors import ConfigError

__all__ = ["RunConfig", "parse_config", "emit_config", "load_config"]


@dataclass
class RunConfig:
    bands: list = field(default_factory=lambda: [[-1.0, 1.0]])
    phases: list = field(default_factory=list)
    perturbation_profile: str = "sech"
    perturbation_amplitude: float = 0.1
    perturbation_width: float = 1.0
    perturbation_center: float = 0.0
    perturbation_support: float = 9.0
    support_radius: float = 10.0
    grid_smax: float = 16.0
    grid_per_interval: int = 20
    grid_edge_levels: int = 8
    theta_tol: float = 1e-13
    p34_half_width: float = 12.0
    p34_nodes: int = 48001
    transition_constant: float = 1.0
    t_min: float = 10.0
    sim_half_width: float = 40.0
    sim_grid_points: int = 2048
    sim_dt: float = 0.0002
    sim_t_final: float = 20.0
    sim_snapshot_times: list = field(default_factory=lambda: [10.0, 20.0])
    outdir: str = "fgnls-out"


def parse_config(text: str) -> RunConfig:
    known = {f.name: f for f in fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = ast.literal_eval(val.strip())
        except (ValueError, SyntaxError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    _check_types(cfg)
    return cfg


def _check_types(cfg: RunConfig):
    if not cfg.bands or any(len(b) != 2 for b in cfg.bands):
        raise ConfigError("bands must be a nonempty list of [E, Ehat] pairs")
    if len(cfg.phases) != len(cfg.bands) - 1:
        raise ConfigError(
            f"phases must have length {len(cfg.bands) - 1} (the genus)")


def emit_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(RunConfig):
        lines.append(f"{f.name} = {getattr(cfg, f.name)!r}")
    return "\n".join(lines) + "\n"


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
