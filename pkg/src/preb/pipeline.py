"""End-to-end runs: config -> chains -> set-up -> propagator -> steady state -> report.

The pipeline is deterministic for a fixed configuration; chain maps are cached
per (spectral function, depth, settings) within the process so parameter sweeps
that share a bath do not recompute them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import config as cfgmod
from .builder import (SetupHamiltonian, SystemSpec, assemble_hamiltonian,
                      chain_length_for_tau, copies_required,
                      rethermalization_estimate, thermal_correlation)
from .chainmap import ChainCoefficients, chain_map_recursion, chain_map_tridiag
from .config import RunConfig
from .dynamics import StepThermo, TrajectoryResult, preb_trajectory, step_thermodynamics
from .errors import ConfigError
from .negf import NegfReport, landauer_currents
from .propagator import (StepPropagator, drive_matrix, solve_dlyap_direct,
                         solve_dlyap_doubling, stability_rate, step_propagator)
from .spectral import BathThermalSpec, SpectralFunction
from .thermo import NessReport, classify_regime, ness_rates

PROBE_DEPTH = 16
DIRECT_SOLVER_LIMIT = 32  # beyond this system size the doubling solver takes over

_CHAIN_CACHE: dict = {}


def clear_caches() -> None:
    _CHAIN_CACHE.clear()


def _chain_for(sf: SpectralFunction, depth: int, process: cfgmod.ProcessConfig,
               method: Optional[str] = None) -> ChainCoefficients:
    method = method or process.method
    if method == cfgmod.METHOD_AUTO:
        method = cfgmod.METHOD_TRIDIAG
    if method == cfgmod.METHOD_RECURSION and depth > cfgmod.RECURSION_DEPTH_LIMIT:
        raise ConfigError(
            f"the recursion route is reliable only to depth {cfgmod.RECURSION_DEPTH_LIMIT}; "
            f"requested {depth} (use the tridiag method)")
    key = (sf, depth, method, process.n_modes, process.grid_points)
    try:
        cached = _CHAIN_CACHE.get(key)
    except TypeError:
        key, cached = None, None
    if cached is not None:
        return cached
    if method == cfgmod.METHOD_TRIDIAG:
        chain = chain_map_tridiag(sf, depth, n_modes=process.n_modes)
    else:
        chain = chain_map_recursion(sf, depth, points=process.grid_points)
    if key is not None:
        _CHAIN_CACHE[key] = chain
    return chain


@dataclass
class NessBundle:
    """All intermediate objects of one parameter point, for reuse and inspection."""

    cfg: RunConfig
    system: SystemSpec
    chains: tuple[ChainCoefficients, ChainCoefficients]
    l_b: int
    setup: SetupHamiltonian
    prop: StepPropagator
    specs: tuple[BathThermalSpec, BathThermalSpec]
    c_baths: tuple[np.ndarray, np.ndarray]
    p_s: np.ndarray
    spectral_radius: float
    rate: float

    def solve_ness(self) -> np.ndarray:
        solver = solve_dlyap_direct if self.setup.l_s <= DIRECT_SOLVER_LIMIT \
            else solve_dlyap_doubling
        return solver(self.prop.g_s, self.p_s)


def chain_depth(cfg: RunConfig) -> int:
    """Chain length: the configured override, or ceil(g_B tau) + L_0 from a probe map."""
    if cfg.process.depth is not None:
        return cfg.process.depth
    g_b = max(_chain_for(bath.spectral_function(), PROBE_DEPTH, cfg.process,
                         method=cfgmod.METHOD_TRIDIAG).hop_asym
              for bath in (cfg.bath1, cfg.bath2))
    return chain_length_for_tau(g_b, cfg.process.tau, cfg.process.l_0)


def build_bundle(cfg: RunConfig, l_b: Optional[int] = None) -> NessBundle:
    l_b = l_b if l_b is not None else chain_depth(cfg)
    sfs = (cfg.bath1.spectral_function(), cfg.bath2.spectral_function())
    chains = tuple(_chain_for(sf, l_b, cfg.process) for sf in sfs)
    specs = (BathThermalSpec(cfg.bath1.beta, cfg.bath1.mu),
             BathThermalSpec(cfg.bath2.beta, cfg.bath2.mu))
    system = SystemSpec.two_site(cfg.g)
    setup = assemble_hamiltonian(system, chains, l_b)
    prop = step_propagator(setup, cfg.process.tau)
    c_baths = tuple(thermal_correlation(setup.h[b, b], spec)
                    for b, spec in zip((setup.bath1, setup.bath2), specs))
    p_s = drive_matrix(prop, *c_baths)
    radius, rate = stability_rate(prop.g_s, cfg.process.tau)
    return NessBundle(cfg=cfg, system=system, chains=chains, l_b=l_b, setup=setup,
                      prop=prop, specs=specs, c_baths=c_baths, p_s=p_s,
                      spectral_radius=radius, rate=rate)


def _fill_auxiliary(report: NessReport, bundle: NessBundle) -> None:
    cfg = bundle.cfg
    report.r = bundle.rate
    report.spectral_radius = bundle.spectral_radius
    if cfg.bath1.kind == "lorentzian":
        report.lam = cfg.bath1.lam
    if cfg.bath1.kind == "lorentzian" and cfg.bath2.kind == "lorentzian":
        tau_r = rethermalization_estimate(min(cfg.bath1.lam, cfg.bath2.lam),
                                          cfg.process.tau_r_factor)
        report.n_copies = copies_required(tau_r, cfg.process.tau)


def run_ness(cfg: RunConfig) -> NessReport:
    """Solve one parameter point and return the full steady-state report.

    With beta1 >= beta2 the hot/cold labeling is undefined, so the point is
    reported as a dud without Carnot references.
    """
    bundle = build_bundle(cfg)
    c_ness = bundle.solve_ness()
    report = ness_rates(c_ness, bundle.prop, bundle.p_s, bundle.c_baths, bundle.specs)
    if report.beta1 < report.beta2:
        classify_regime(report)
    _fill_auxiliary(report, bundle)
    return report


def run_trajectory(cfg: RunConfig, steps: int):
    """Iterate the cycle map from the empty system, with per-step thermodynamics.

    Returns (TrajectoryResult, [StepThermo per cycle], NessReport or None); the
    report is None when the point has no unique steady state.
    """
    bundle = build_bundle(cfg)
    c_ness = None
    report = None
    if bundle.spectral_radius < 1.0 - 1e-12:
        c_ness = bundle.solve_ness()
        report = ness_rates(c_ness, bundle.prop, bundle.p_s, bundle.c_baths, bundle.specs)
        if report.beta1 < report.beta2:
            classify_regime(report)
        _fill_auxiliary(report, bundle)
    c0 = np.zeros((bundle.setup.l_s, bundle.setup.l_s), dtype=complex)
    traj = preb_trajectory(c0, steps, bundle.prop, bundle.p_s, c_ness=c_ness)
    thermos = [step_thermodynamics(c, bundle.prop, bundle.c_baths, bundle.specs)
               for c in traj.states[:-1]]
    return traj, thermos, report


def run_chainmap(cfg: RunConfig) -> tuple[ChainCoefficients, ChainCoefficients]:
    l_b = chain_depth(cfg)
    return tuple(_chain_for(bath.spectral_function(), l_b, cfg.process)
                 for bath in (cfg.bath1, cfg.bath2))


def run_negf(cfg: RunConfig) -> NegfReport:
    system = SystemSpec.two_site(cfg.g)
    sfs = (cfg.bath1.spectral_function(), cfg.bath2.spectral_function())
    specs = (BathThermalSpec(cfg.bath1.beta, cfg.bath1.mu),
             BathThermalSpec(cfg.bath2.beta, cfg.bath2.mu))
    return landauer_currents(system, sfs, specs)


def chain_size_convergence(cfg: RunConfig, factor: int = 2) -> float:
    """Relative change of the steady rates when the chains are ``factor`` times longer.

    The doubling check of validation mode; small values confirm the
    light-cone sizing of the chains.
    """
    base = run_ness(cfg)
    l_b = chain_depth(cfg)
    wide = build_bundle(cfg, l_b=factor * l_b)
    c_ness = wide.solve_ness()
    ref = ness_rates(c_ness, wide.prop, wide.p_s, wide.c_baths, wide.specs)
    scale = max(abs(ref.qdot[0]), abs(ref.qdot[1]), abs(ref.p_ext), 1e-12)
    return max(abs(base.p_ext - ref.p_ext), abs(base.qdot[0] - ref.qdot[0]),
               abs(base.qdot[1] - ref.qdot[1])) / scale
