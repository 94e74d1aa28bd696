import numpy as np
import pytest

from preb.builder import SystemSpec, assemble_hamiltonian, thermal_correlation
from preb.chainmap import ChainCoefficients
from preb.pipeline import build_bundle
from preb.spectral import BathThermalSpec
from preb.validation import engine_config, fixed_config, fridge_config

__all__ = ["engine_config", "fridge_config", "fixed_config"]


@pytest.fixture(scope="session")
def engine_bundle():
    """Heat-engine point of the worked example (lambda = 0.05, tau = 1)."""
    return build_bundle(engine_config())


@pytest.fixture(scope="session")
def broad_bundle():
    """Broad-bath point (lambda = 1, tau = 1), used where structure matters more than regime."""
    return build_bundle(engine_config(lam=1.0))


def decoupled_bundle_pieces(l_b=4, tau=1.0, beta=1.0, mu=-2.0):
    """Set-up whose system-chain couplings underflow to zero: an exactly closed system."""
    system = SystemSpec.two_site(1.0)
    eps = np.zeros(l_b)
    hop = np.full(l_b, 3.0)
    hop[0] = 1e-300
    chain = ChainCoefficients(eps=eps, hop=hop)
    setup = assemble_hamiltonian(system, [chain, chain], l_b)
    spec = BathThermalSpec(beta, mu)
    c_b = thermal_correlation(setup.h[setup.bath1, setup.bath1], spec)
    return setup, (c_b, c_b), (spec, spec)
