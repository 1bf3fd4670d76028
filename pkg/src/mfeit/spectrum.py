"""Variational Poincare spectrum, eigenfunction traces, plasmonic resonances.

Eigenfunctions are single layer potentials S_D[phi_n]; the spectrum comes
from the boundary reduction of the variational operator, i.e. a symmetric
generalized eigenproblem for K*_D in the energy inner product <-S .,.>.
With this package's kernel conventions the variational eigenvalue is
lambda = 1/2 - mu for mu an eigenvalue of the discrete K*_D (verified
against the concentric-disk closed form lambda_n = (1 + r0^(2n)) / 2).

Resonances solve the dispersion equation k0 + lambda_n (k - k0) = 0,
hence k_n = k0 (1 - 1/lambda_n); they accumulate at -k0.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NotConverged
from .geometry import StarShape, unit_circle_grid, r_inf
from .potential import KernelMatrices, eval_S

#: modes with |lambda - 1/2| at or below this are unresolved tail
DEFAULT_TAIL = 1e-8
#: lambda this close to zero is the nonphysical constant-density mode
_ZERO_MODE_TOL = 1e-6


@dataclass(frozen=True)
class NPSpectrum:
    """Resolved part of the Poincare spectrum on one inclusion grid."""

    lam: np.ndarray             # (k,) eigenvalues in (0,1), |lam-1/2| descending
    densities: np.ndarray       # (n, k) eigen-densities, unit energy
    traces_bd_omega: np.ndarray  # (m, k) traces of w_n on the unit circle
    traces_bd_d: np.ndarray     # (n, k) traces of w_n on the inclusion boundary
    resonances: np.ndarray      # (k,) k_n = k0 (1 - 1/lambda_n)
    k0: float
    boundary_t: np.ndarray      # (m,) angles of the unit-circle trace grid
    n_discarded: int            # tail modes dropped below the threshold

    @property
    def branch(self) -> np.ndarray:
        """+1 for lambda > 1/2, -1 for lambda < 1/2."""
        return np.where(self.lam > 0.5, 1, -1)

    def report(self, bound: float | None = None) -> dict:
        rep = {"lambda": [float(v) for v in self.lam],
               "resonances": [float(v) for v in self.resonances],
               "k0": self.k0,
               "n_discarded": self.n_discarded}
        if bound is not None:
            rep["bound"] = float(bound)
        return rep

    def report_json(self, bound: float | None = None) -> str:
        return json.dumps(self.report(bound), sort_keys=True, indent=2)


def compute_spectrum(kernels: KernelMatrices, n_modes: int, k0: float = 1.0,
                     n_boundary: int = 256,
                     tail: float = DEFAULT_TAIL) -> NPSpectrum:
    """Leading eigenpairs of the variational operator, energy-normalized.

    The nonphysical constant-density mode (lambda ~ 0) is discarded, as are
    tail modes with |lambda - 1/2| <= tail, which the grid cannot resolve.
    """
    n = kernels.grid.n
    if n_modes > n // 4:
        raise NotConverged(f"{n_modes} modes not resolvable on {n} nodes")
    B = kernels.B
    A = B @ kernels.Kstar
    A = 0.5 * (A + A.T)
    mu, V = sla.eigh(A, B)  # columns are B-orthonormal: unit energy
    lam = 0.5 - mu

    keep = lam > _ZERO_MODE_TOL
    lam, V = lam[keep], V[:, keep]
    resolved = np.abs(lam - 0.5) > tail
    n_discarded = int(np.sum(~resolved))
    lam, V = lam[resolved], V[:, resolved]
    order = np.argsort(-np.abs(lam - 0.5), kind="stable")
    lam, V = lam[order], V[:, order]
    if lam.size < n_modes:
        raise NotConverged(
            f"only {lam.size} modes resolved above tail {tail:g}, "
            f"requested {n_modes}")
    lam, V = lam[:n_modes], V[:, :n_modes]

    bgrid = unit_circle_grid(n_boundary)
    traces_omega = np.column_stack(
        [eval_S(kernels.grid, V[:, j], bgrid.points) for j in range(lam.size)])
    traces_d = kernels.S @ V

    return NPSpectrum(lam=lam, densities=V, traces_bd_omega=traces_omega,
                      traces_bd_d=traces_d,
                      resonances=k0 * (1.0 - 1.0 / lam), k0=k0,
                      boundary_t=bgrid.t, n_discarded=n_discarded)


def resonance_bound(shape: StarShape, k0: float = 1.0) -> float:
    """Class-uniform lower bound -k0 (1 + ((r+2)/r)^2) on all resonances."""
    r = r_inf(shape)
    return -k0 * (1.0 + ((r + 2.0) / r) ** 2)


def neumann_series_check(spectrum: NPSpectrum, kernels: KernelMatrices,
                         x, z, n_terms: int | None = None) -> float:
    """Partial sum -sum_n w_n(x) w_n(z) over the computed modes.

    Equals the energy projection of the Neumann function N(., z) onto the
    resolved eigenspace; a diagnostic of trace evaluation and energy
    normalization, not the full kernel identity.
    """
    k = spectrum.lam.size if n_terms is None else min(n_terms, spectrum.lam.size)
    pts = np.array([x, z], dtype=float)
    vals = np.column_stack(
        [eval_S(kernels.grid, spectrum.densities[:, j], pts) for j in range(k)])
    return float(-np.sum(vals[0] * vals[1]))
