"""Run configuration: INI-style sections with explicit unit suffixes.

Physical values must carry their unit (``energy = 2.0 MeV``); the parser
rejects missing or wrong units with the offending line and key.  A config
round-trips through ``canonical_text`` bit-exactly (floats via repr), and
the sha256 of that text stamps every output file.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .constants import ELECTRON_MEV
from .errors import ConfigError
from .output import config_hash

_UNITS = {
    ("particle", "rest_energy"): "MeV",
    ("particle", "energy"): "MeV",
    ("potential", "u0"): "MeV",
    ("potential", "slope"): "MeV/fm",
    ("trajectories", "x0"): "fm",
    ("trajectories", "t_min"): "s",
    ("trajectories", "t_max"): "s",
    ("trajectories", "window"): "fm",
    ("numerics", "grid_min"): "fm",
    ("numerics", "grid_max"): "fm",
    ("numerics", "grid_step"): "fm",
}


@dataclass
class RunConfig:
    rest_energy: float = ELECTRON_MEV      # [MeV]
    energy: float = 2.0                    # total E [MeV]
    hbar_scale: float = 1.0
    potential_kind: str = "constant"
    u0: float = 0.0                        # [MeV]
    slope: float = 1e-3                    # [MeV/fm]
    table_file: str = ""
    param_sets: list = field(default_factory=lambda: [(0.2, 0.0), (4.0 / 3.0, -1.05), (0.25, 8.0)])
    x0: float = 0.0                        # [fm]
    t_min: float = 0.0                     # [s]
    t_max: float = 5.5e-21                 # [s]
    samples: int = 20001
    window: float = 2.0e4                  # evanescent halt window [fm]
    direction: int = 1
    sync: str = "psi_zero"
    method: str = "rk4"
    basis_init: str = "sincos"             # or "unit" for (0,1),(1,0)
    grid_min: float = -2000.0              # [fm]
    grid_max: float = 1200.0               # [fm]
    grid_step: float = 0.05                # [fm]
    out_dir: str = "out"

    def validate(self):
        if self.rest_energy <= 0:
            raise ConfigError("[particle] rest_energy must be positive")
        if self.hbar_scale <= 0:
            raise ConfigError("[particle] hbar_scale must be positive")
        if self.potential_kind not in ("constant", "linear", "tabulated"):
            raise ConfigError(f"[potential] kind {self.potential_kind!r} unknown")
        if self.potential_kind == "tabulated" and not self.table_file:
            raise ConfigError("[potential] tabulated kind needs file = <path>")
        for i, (a, b) in enumerate(self.param_sets):
            if a == 0:
                raise ConfigError(
                    f"[trajectories] sets: entry {i + 1} has a = 0; the hidden "
                    "parameter a must be non-zero (a = 0 collapses the reduced "
                    "action to a constant)"
                )
        if self.direction not in (1, -1):
            raise ConfigError("[trajectories] direction must be + or -")
        if self.sync not in ("psi_zero", "phi2_zero", "exact"):
            raise ConfigError(f"[trajectories] sync {self.sync!r} unknown")
        if self.method not in ("rk4", "euler"):
            raise ConfigError(f"[numerics] method {self.method!r} unknown")
        if self.basis_init not in ("sincos", "unit"):
            raise ConfigError(f"[numerics] basis_init {self.basis_init!r} unknown")
        if not self.grid_min < self.grid_max:
            raise ConfigError("[numerics] grid_min must lie below grid_max")
        if self.grid_step <= 0:
            raise ConfigError("[numerics] grid_step must be positive")
        if not self.t_min < self.t_max:
            raise ConfigError("[trajectories] t_min must lie below t_max")
        if self.samples < 2:
            raise ConfigError("[trajectories] samples must be at least 2")
        return self

    def canonical_text(self) -> str:
        sets = "; ".join(f"{a!r},{b!r}" for a, b in self.param_sets)
        return (
            "[particle]\n"
            f"rest_energy = {self.rest_energy!r} MeV\n"
            f"energy = {self.energy!r} MeV\n"
            f"hbar_scale = {self.hbar_scale!r}\n"
            "\n[potential]\n"
            f"kind = {self.potential_kind}\n"
            f"u0 = {self.u0!r} MeV\n"
            f"slope = {self.slope!r} MeV/fm\n"
            f"file = {self.table_file}\n"
            "\n[trajectories]\n"
            f"sets = {sets}\n"
            f"x0 = {self.x0!r} fm\n"
            f"t_min = {self.t_min!r} s\n"
            f"t_max = {self.t_max!r} s\n"
            f"samples = {self.samples}\n"
            f"window = {self.window!r} fm\n"
            f"direction = {'+' if self.direction > 0 else '-'}\n"
            f"sync = {self.sync}\n"
            "\n[numerics]\n"
            f"method = {self.method}\n"
            f"basis_init = {self.basis_init}\n"
            f"grid_min = {self.grid_min!r} fm\n"
            f"grid_max = {self.grid_max!r} fm\n"
            f"grid_step = {self.grid_step!r} fm\n"
            "\n[output]\n"
            f"dir = {self.out_dir}\n"
        )

    @property
    def hash(self) -> str:
        return config_hash(self.canonical_text())

    def to_file(self, path):
        Path(path).write_text(self.canonical_text())


def _line_of(text: str, key: str) -> int:
    for i, line in enumerate(text.splitlines(), start=1):
        if line.strip().startswith(key):
            return i
    return 0


def _float_with_unit(text, section, key, raw, unit):
    parts = raw.split()
    if len(parts) != 2 or parts[1] != unit:
        raise ConfigError(
            f"config line {_line_of(text, key)}: [{section}] {key} must be "
            f"'<value> {unit}', got {raw!r}"
        )
    try:
        return float(parts[0])
    except ValueError as exc:
        raise ConfigError(
            f"config line {_line_of(text, key)}: [{section}] {key}: {exc}"
        ) from None


def _plain_float(text, section, key, raw):
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(
            f"config line {_line_of(text, key)}: [{section}] {key}: {exc}"
        ) from None


def parse_config(path) -> RunConfig:
    text = Path(path).read_text()
    return parse_config_text(text)


def parse_config_text(text: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from None

    cfg = RunConfig()

    def fget(section, key, default):
        if cp.has_option(section, key):
            raw = cp.get(section, key).strip()
            unit = _UNITS.get((section, key))
            if unit:
                return _float_with_unit(text, section, key, raw, unit)
            return _plain_float(text, section, key, raw)
        return default

    cfg.rest_energy = fget("particle", "rest_energy", cfg.rest_energy)
    cfg.energy = fget("particle", "energy", cfg.energy)
    cfg.hbar_scale = fget("particle", "hbar_scale", cfg.hbar_scale)

    if cp.has_option("potential", "kind"):
        cfg.potential_kind = cp.get("potential", "kind").strip()
    cfg.u0 = fget("potential", "u0", cfg.u0)
    cfg.slope = fget("potential", "slope", cfg.slope)
    if cp.has_option("potential", "file"):
        cfg.table_file = cp.get("potential", "file").strip()

    if cp.has_option("trajectories", "sets"):
        raw = cp.get("trajectories", "sets")
        sets = []
        for i, chunk in enumerate(c for c in raw.split(";") if c.strip()):
            parts = chunk.split(",")
            if len(parts) != 2:
                raise ConfigError(
                    f"config line {_line_of(text, 'sets')}: [trajectories] sets: "
                    f"entry {i + 1} must be 'a,b', got {chunk.strip()!r}"
                )
            try:
                sets.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise ConfigError(
                    f"config line {_line_of(text, 'sets')}: [trajectories] sets: {exc}"
                ) from None
        cfg.param_sets = sets
    cfg.x0 = fget("trajectories", "x0", cfg.x0)
    cfg.t_min = fget("trajectories", "t_min", cfg.t_min)
    cfg.t_max = fget("trajectories", "t_max", cfg.t_max)
    cfg.samples = int(fget("trajectories", "samples", cfg.samples))
    cfg.window = fget("trajectories", "window", cfg.window)
    if cp.has_option("trajectories", "direction"):
        raw = cp.get("trajectories", "direction").strip()
        if raw not in ("+", "-", "+1", "-1"):
            raise ConfigError(
                f"config line {_line_of(text, 'direction')}: [trajectories] "
                f"direction must be + or -, got {raw!r}"
            )
        cfg.direction = 1 if raw.startswith("+") else -1
    if cp.has_option("trajectories", "sync"):
        cfg.sync = cp.get("trajectories", "sync").strip()

    if cp.has_option("numerics", "method"):
        cfg.method = cp.get("numerics", "method").strip()
    if cp.has_option("numerics", "basis_init"):
        cfg.basis_init = cp.get("numerics", "basis_init").strip()
    cfg.grid_min = fget("numerics", "grid_min", cfg.grid_min)
    cfg.grid_max = fget("numerics", "grid_max", cfg.grid_max)
    cfg.grid_step = fget("numerics", "grid_step", cfg.grid_step)

    if cp.has_option("output", "dir"):
        cfg.out_dir = cp.get("output", "dir").strip()

    return cfg.validate()


def config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d["param_sets"] = [list(s) for s in cfg.param_sets]
    return d
