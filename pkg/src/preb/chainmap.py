"""Map a bath spectral function onto nearest-neighbour tight-binding chain coefficients.

Two routes are provided.  ``chain_map_recursion`` iterates the moment
recursion directly on a frequency grid:

    g_p^2     = (1/2pi) int J_p(w) dw
    eps_{p+1} = (1/(2pi g_p^2)) int w J_p(w) dw
    J_{p+1}   = 4 g_p^2 J_p / (J_p^H^2 + J_p^2)

with J^H the principal-value Hilbert transform.  The recursion is exact but
ill-conditioned at depth, so ``chain_map_tridiag`` is the production path: it
discretizes the bath into modes with exact cell weights and tridiagonalizes by
a Lanczos recurrence with full reorthogonalization.  Both produce identical
coefficients in the continuum limit.

Normalization note: the total squared coupling of the discretized bath equals
(1/2pi) int J, i.e. the first hopping g_0 is the physical system-chain
coupling of the recursion above.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NumericsError
from .spectral import (DEFAULT_GRID_MARGIN, DEFAULT_GRID_POINTS, LORENTZIAN,
                       SpectralFunction, SpectralTable, frequency_grid,
                       hilbert_transform)

log = logging.getLogger(__name__)

TAIL_TOLERANCE = 0.05
MIN_MODES_PER_SITE = 50


def _tail_stats(eps: np.ndarray, hop: np.ndarray) -> tuple[float, float, float]:
    k = max(3, len(hop) // 5)
    k = min(k, len(hop))
    eps_asym = float(np.mean(eps[-k:]))
    hop_asym = float(np.mean(hop[-k:]))
    scale = max(abs(hop_asym), abs(eps_asym), 1e-300)
    dev = max(np.max(np.abs(eps[-k:] - eps_asym)), np.max(np.abs(hop[-k:] - hop_asym)))
    return eps_asym, hop_asym, float(dev / scale)


@dataclass(frozen=True)
class ChainCoefficients:
    """On-site energies and hoppings of a mapped chain.

    ``eps[p-1]`` is the energy of chain site p (p = 1..depth); ``hop[0]`` is the
    system-chain coupling g_0 and ``hop[p]`` connects sites p and p+1.  The
    asymptotic pair (eps_asym, hop_asym) is the tail average; ``residual`` holds
    the spectral function left over at the truncation depth when the producing
    route provides one.
    """

    eps: np.ndarray
    hop: np.ndarray
    eps_asym: Optional[float] = None
    hop_asym: Optional[float] = None
    tail_deviation: Optional[float] = None
    residual: Optional[SpectralTable] = None

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=float)
        hop = np.asarray(self.hop, dtype=float)
        if eps.ndim != 1 or hop.ndim != 1 or eps.size != hop.size or eps.size == 0:
            raise ValueError("eps and hop must be 1-d arrays of equal nonzero length")
        if not (np.all(np.isfinite(eps)) and np.all(np.isfinite(hop))):
            raise ValueError("chain coefficients must be finite")
        if np.any(hop <= 0):
            p = int(np.argmax(hop <= 0))
            raise ValueError(f"non-positive hopping at p={p}: the chain decouples")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "hop", hop)
        if self.eps_asym is None:
            ea, ha, dev = _tail_stats(eps, hop)
            object.__setattr__(self, "eps_asym", ea)
            object.__setattr__(self, "hop_asym", ha)
            object.__setattr__(self, "tail_deviation", dev)

    @property
    def depth(self) -> int:
        return self.eps.size

    def tail_converged(self, tol: float = TAIL_TOLERANCE) -> bool:
        return self.tail_deviation < tol

    def padded(self, length: int) -> tuple[np.ndarray, np.ndarray]:
        """(eps, hop) arrays of the requested length, padded with the asymptotics."""
        if length <= self.depth:
            return self.eps[:length].copy(), self.hop[:length].copy()
        pad = length - self.depth
        eps = np.concatenate([self.eps, np.full(pad, self.eps_asym)])
        hop = np.concatenate([self.hop, np.full(pad, self.hop_asym)])
        return eps, hop

    # -- CSV -----------------------------------------------------------------

    def to_csv(self, path) -> None:
        """Rows ``p,eps,hop``: the hop cell of row p holds g_p, the eps cell eps_p."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["p", "eps", "hop"])
            writer.writerow([0, "", f"{self.hop[0]:.17g}"])
            for p in range(1, self.depth):
                writer.writerow([p, f"{self.eps[p - 1]:.17g}", f"{self.hop[p]:.17g}"])
            writer.writerow([self.depth, f"{self.eps[-1]:.17g}", ""])

    @classmethod
    def from_csv(cls, path) -> "ChainCoefficients":
        eps, hop = {}, {}
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if [c.strip() for c in header] != ["p", "eps", "hop"]:
                raise ValueError(f"expected header 'p,eps,hop', got {header!r}")
            for row in reader:
                if not row:
                    continue
                p = int(row[0])
                if row[1].strip():
                    eps[p] = float(row[1])
                if len(row) > 2 and row[2].strip():
                    hop[p] = float(row[2])
        depth = max(eps)
        eps_arr = np.array([eps[p] for p in range(1, depth + 1)])
        hop_arr = np.array([hop[p] for p in range(0, depth)])
        return cls(eps=eps_arr, hop=hop_arr)


# -- moment recursion ---------------------------------------------------------


def chain_map_recursion(sf: SpectralFunction, depth: int, *,
                        points: int = DEFAULT_GRID_POINTS,
                        margin: float = DEFAULT_GRID_MARGIN,
                        g2_floor: float = 1e-12) -> ChainCoefficients:
    """Iterate the moment recursion on a uniform frequency grid.

    Numerically reliable only for shallow depths (roughly p <= 10); beyond
    that use ``chain_map_tridiag``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    grid = frequency_grid(sf, points=points, margin=margin)
    J = sf(grid)
    eps = np.empty(depth)
    hop = np.empty(depth)
    for p in range(depth):
        g2 = np.trapezoid(J, grid) / (2 * np.pi)
        if not np.isfinite(g2) or g2 <= g2_floor:
            raise NumericsError(f"chain decouples / recursion unstable at depth {p}")
        hop[p] = np.sqrt(g2)
        eps[p] = np.trapezoid(grid * J, grid) / (2 * np.pi * g2)
        jh = hilbert_transform(grid, J)
        den = jh * jh + J * J
        J_next = np.zeros_like(J)
        np.divide(4 * g2 * J, den, out=J_next, where=den > 1e-300)
        J = J_next
    cc = ChainCoefficients(eps=eps, hop=hop, residual=SpectralTable(grid, J))
    if not cc.tail_converged():
        log.info("chain tail not settled at depth %d (deviation %.3g)", depth, cc.tail_deviation)
    return cc


# -- discretization + Lanczos --------------------------------------------------


def discretize_modes(sf: SpectralFunction, n_modes: int) -> tuple[np.ndarray, np.ndarray]:
    """Discretize the bath into modes (frequencies, squared couplings).

    The support is partitioned by the union of a uniform mesh and a mesh with
    equal integrated weight per cell, so narrow peaks and flat background are
    both resolved.  Cell weights are exact integrals of J/(2pi) and each node
    sits at its cell's centroid, making the first two moments of every cell
    exact.  The squared couplings sum to (1/2pi) int J.
    """
    if n_modes < 2:
        raise ValueError("n_modes must be >= 2")
    lo, hi = sf.support
    n_uni = n_modes // 2
    n_cdf = n_modes - n_uni
    edges_uniform = np.linspace(lo, hi, n_uni + 1)
    total = sf.integral(lo, hi)
    if total <= 0:
        raise NumericsError("spectral function carries no weight on its support")
    targets = np.linspace(0.0, total, n_cdf + 1)[1:-1]
    edges_cdf = _invert_cumulative(sf, lo, hi, targets)
    edges = np.unique(np.concatenate([edges_uniform, edges_cdf]))
    weights = sf.integral(edges[:-1], edges[1:]) / (2 * np.pi)
    moments = sf.first_moment(edges[:-1], edges[1:]) / (2 * np.pi)
    keep = weights > 0
    weights, moments = weights[keep], moments[keep]
    freqs = moments / weights
    # centroids can escape their cell only through roundoff
    freqs = np.clip(freqs, edges[:-1][keep], edges[1:][keep])
    return freqs, weights


def _invert_cumulative(sf: SpectralFunction, lo: float, hi: float,
                       targets: np.ndarray) -> np.ndarray:
    if sf.kind == LORENTZIAN:
        base = sf.kappa * np.arctan((lo - sf.omega0) / sf.lam)
        w = sf.omega0 + sf.lam * np.tan((base + targets) / sf.kappa)
        return np.clip(w, lo, hi)
    # flat and tabulated: invert a densely sampled cumulative
    grid = np.linspace(lo, hi, 16385)
    cum = sf.integral(lo, grid)
    cum[0] = 0.0
    return np.interp(targets, cum, grid)


def star_to_chain(freqs: np.ndarray, couplings_sq: np.ndarray, depth: int, *,
                  ortho_tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Tridiagonalize a star bath (mode frequencies, squared couplings) into a chain.

    Three-term Lanczos recurrence on the diagonal mode matrix, started from the
    normalized coupling vector, with full reorthogonalization (two passes).
    Returns (eps, hop) with hop[0] the system-chain coupling; the arrays are
    shorter than ``depth`` if the Krylov space is exhausted first.
    """
    freqs = np.asarray(freqs, dtype=float)
    couplings_sq = np.asarray(couplings_sq, dtype=float)
    if freqs.ndim != 1 or freqs.shape != couplings_sq.shape or freqs.size == 0:
        raise ValueError("freqs and couplings_sq must be matching 1-d arrays")
    if np.any(couplings_sq < 0):
        raise ValueError("squared couplings must be non-negative")
    g0 = np.sqrt(couplings_sq.sum())
    if g0 <= 0:
        raise NumericsError("bath carries no coupling weight")
    scale = max(1.0, float(np.max(np.abs(freqs))))
    v = np.sqrt(couplings_sq) / g0
    basis = [v]
    eps, hop = [], [g0]
    beta_prev = 0.0
    v_prev = None
    for p in range(depth):
        w = basis[-1]
        alpha = float(np.dot(freqs * w, w))
        eps.append(alpha)
        if p == depth - 1 or len(basis) == freqs.size:
            break
        r = freqs * w - alpha * w
        if v_prev is not None:
            r -= beta_prev * v_prev
        for _ in range(2):
            for u in basis:
                r -= np.dot(u, r) * u
        leaked = max((abs(np.dot(u, r)) for u in basis), default=0.0)
        beta = float(np.linalg.norm(r))
        if beta <= 1e-13 * scale:
            break  # Krylov space exhausted: the chain terminates here
        if leaked > ortho_tol * beta:
            raise NumericsError(f"loss of orthogonality at depth {p + 1}")
        hop.append(beta)
        v_prev, beta_prev = w, beta
        basis.append(r / beta)
    return np.array(eps), np.array(hop)


def chain_map_tridiag(sf: SpectralFunction, depth: int, *,
                      n_modes: Optional[int] = None) -> ChainCoefficients:
    """Chain coefficients via discretization and Lanczos tridiagonalization.

    Mathematically identical to the moment recursion in the continuum limit,
    and stable at any depth; this is the production route.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if n_modes is None:
        n_modes = max(MIN_MODES_PER_SITE * depth, 2000)
    elif n_modes < MIN_MODES_PER_SITE * depth:
        raise ValueError(f"n_modes must be at least {MIN_MODES_PER_SITE} * depth")
    freqs, weights = discretize_modes(sf, n_modes)
    eps, hop = star_to_chain(freqs, weights, depth)
    cc = ChainCoefficients(eps=eps, hop=hop)
    if not cc.tail_converged():
        log.info("chain tail not settled at depth %d (deviation %.3g)", depth, cc.tail_deviation)
    return cc
