"""Declarative run configuration: INI-style files with [system] [bath1] [bath2] [process] [sweep].

Physical defaults follow the worked two-site example: system hopping g = 1 sets
the units, baths are Lorentzians with kappa = 2, peaks at +2 and -1, hard
cutoff 6, equal chemical potentials mu = -2, and hot/cold inverse temperatures
0.1 / 1.  Everything is overridable per key.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError
from .spectral import SpectralFunction, read_spectral_table

METHOD_AUTO = "auto"
METHOD_TRIDIAG = "tridiag"
METHOD_RECURSION = "recursion"

# the recursion is reliable only for shallow chains
RECURSION_DEPTH_LIMIT = 10


@dataclass(frozen=True)
class BathConfig:
    kind: str = "lorentzian"
    kappa: float = 2.0
    lam: float = 0.05
    omega0: float = 2.0
    cutoff: float = 6.0
    beta: float = 0.1
    mu: float = -2.0
    table: Optional[str] = None  # CSV path for the tabulated kind

    def spectral_function(self) -> SpectralFunction:
        if self.kind == "lorentzian":
            return SpectralFunction.lorentzian(self.kappa, self.lam, self.omega0, self.cutoff)
        if self.kind == "flat":
            return SpectralFunction.flat(self.kappa, self.cutoff)
        if self.kind == "tabulated":
            if not self.table:
                raise ConfigError("tabulated bath needs a 'table' CSV path")
            try:
                return read_spectral_table(self.table)
            except (OSError, ValueError) as exc:
                raise ConfigError(f"cannot read spectral table {self.table}: {exc}") from exc
        raise ConfigError(f"unknown bath kind {self.kind!r}")


@dataclass(frozen=True)
class ProcessConfig:
    tau: float = 1.0
    l_0: int = 5
    tau_r_factor: float = 10.0
    method: str = METHOD_AUTO
    depth: Optional[int] = None      # override the chain depth chosen from tau
    n_modes: Optional[int] = None    # override the discretization size
    grid_points: int = 8192          # frequency grid for the recursion route


@dataclass(frozen=True)
class SweepConfig:
    axis: str = "tau"
    minimum: float = 0.1
    maximum: float = 20.0
    points: int = 20
    spacing: str = "log"


@dataclass(frozen=True)
class RunConfig:
    g: float = 1.0
    bath1: BathConfig = BathConfig()
    bath2: BathConfig = BathConfig(omega0=-1.0, beta=1.0)
    process: ProcessConfig = ProcessConfig()
    sweep: Optional[SweepConfig] = None

    def replace(self, **kwargs) -> "RunConfig":
        return dataclasses.replace(self, **kwargs)


def heat_engine_preset(lam: float = 0.05, tau: float = 1.0) -> RunConfig:
    """Hot bath 1 at beta = 0.1, cold bath 2 at beta = 1, mu = -2."""
    return RunConfig(bath1=BathConfig(lam=lam, beta=0.1),
                     bath2=BathConfig(lam=lam, omega0=-1.0, beta=1.0),
                     process=ProcessConfig(tau=tau))


def refrigerator_preset(lam: float = 0.05, tau: float = 1.0) -> RunConfig:
    """Bath 1 at beta = 0.7, bath 2 at beta = 1, mu = -2."""
    return RunConfig(bath1=BathConfig(lam=lam, beta=0.7),
                     bath2=BathConfig(lam=lam, omega0=-1.0, beta=1.0),
                     process=ProcessConfig(tau=tau))


_BATH_FIELDS = {
    "kind": str, "kappa": float, "lambda": float, "omega0": float,
    "cutoff": float, "beta": float, "mu": float, "table": str,
}
_PROCESS_FIELDS = {
    "tau": float, "l0": int, "tau_r_factor": float, "method": str,
    "depth": int, "n_modes": int, "grid_points": int,
}
_SWEEP_FIELDS = {"axis": str, "min": float, "max": float, "points": int, "spacing": str}
_SYSTEM_FIELDS = {"g": float}

SWEEP_AXES = ("tau", "lambda", "mu", "beta1")


def _section(parser: configparser.ConfigParser, name: str, fields: dict) -> dict:
    out = {}
    if not parser.has_section(name):
        return out
    for key, raw in parser.items(name):
        if key not in fields:
            raise ConfigError(f"unknown key '{key}' in section [{name}]")
        try:
            out[key] = fields[key](raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {name}.{key}: {raw!r}") from exc
    return out


def _bath_config(values: dict) -> BathConfig:
    rename = {"lambda": "lam"}
    return BathConfig(**{rename.get(k, k): v for k, v in values.items()})


def parse_config(path) -> RunConfig:
    """Read a config file; raises ConfigError on unknown keys or bad values."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    for section in parser.sections():
        if section not in ("system", "bath1", "bath2", "process", "sweep"):
            raise ConfigError(f"unknown section [{section}]")

    system = _section(parser, "system", _SYSTEM_FIELDS)
    defaults = RunConfig()
    bath1_raw = _section(parser, "bath1", _BATH_FIELDS)
    bath2_raw = _section(parser, "bath2", _BATH_FIELDS)
    # per-bath defaults follow the worked example (peak +2 hot, peak -1 cold)
    bath1 = dataclasses.replace(defaults.bath1, **_as_fields(bath1_raw))
    bath2 = dataclasses.replace(defaults.bath2, **_as_fields(bath2_raw))

    proc_raw = _section(parser, "process", _PROCESS_FIELDS)
    if "l0" in proc_raw:
        proc_raw["l_0"] = proc_raw.pop("l0")
    process = dataclasses.replace(defaults.process, **proc_raw)
    _validate_process(process)

    sweep = None
    if parser.has_section("sweep"):
        sraw = _section(parser, "sweep", _SWEEP_FIELDS)
        sraw = {{"min": "minimum", "max": "maximum"}.get(k, k): v for k, v in sraw.items()}
        sweep = dataclasses.replace(SweepConfig(), **sraw)
        _validate_sweep(sweep)

    cfg = RunConfig(g=system.get("g", defaults.g), bath1=bath1, bath2=bath2,
                    process=process, sweep=sweep)
    _validate_run(cfg)
    return cfg


def _as_fields(values: dict) -> dict:
    return {("lam" if k == "lambda" else k): v for k, v in values.items()}


def _validate_process(process: ProcessConfig) -> None:
    if process.tau <= 0:
        raise ConfigError("process.tau must be positive")
    if process.l_0 < 0:
        raise ConfigError("process.l0 must be >= 0")
    if process.method not in (METHOD_AUTO, METHOD_TRIDIAG, METHOD_RECURSION):
        raise ConfigError(f"unknown chain-map method {process.method!r}")
    if process.depth is not None and process.depth < 1:
        raise ConfigError("process.depth must be >= 1")


def _validate_sweep(sweep: SweepConfig) -> None:
    if sweep.axis not in SWEEP_AXES:
        raise ConfigError(f"sweep.axis must be one of {SWEEP_AXES}")
    if not sweep.minimum < sweep.maximum:
        raise ConfigError("sweep.min must be < sweep.max")
    if sweep.points < 2:
        raise ConfigError("sweep.points must be >= 2")
    if sweep.spacing not in ("linear", "log"):
        raise ConfigError("sweep.spacing must be 'linear' or 'log'")
    if sweep.spacing == "log" and sweep.minimum <= 0:
        raise ConfigError("log spacing needs a positive sweep.min")


def _validate_run(cfg: RunConfig) -> None:
    for name, bath in (("bath1", cfg.bath1), ("bath2", cfg.bath2)):
        if bath.beta <= 0:
            raise ConfigError(f"{name}.beta must be positive")
        try:
            bath.spectral_function()
        except ValueError as exc:
            raise ConfigError(f"{name}: {exc}") from exc
