"""Forward mfEIT solvers and multifrequency dataset synthesis.

Three routes to the boundary voltage:

* ``solve_forward_direct`` -- second-kind integral equation in the contrast
  k (ground truth at any admissible complex contrast),
* ``solve_forward_spectral`` -- truncated resonance expansion
  u = u0/k0 + sum_n c_n w_n / (k0 + lambda_n (k - k0)),
* ``solve_u0`` -- the perfect-conductor limit, whose Cauchy data drive the
  shape reconstruction.

All boundary voltages are recentered to zero mean on the measurement circle.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NearResonance, SingularSystem
from .geometry import BoundaryGrid, StarShape, discretize, unit_circle_grid
from .potential import (KernelMatrices, assemble, eval_S,
                        eval_S_normal_derivative, kress_log_matrix,
                        neumann_kernel)
from .spectrum import NPSpectrum

_ZERO_MEAN_TOL = 1e-10


def current_from_fourier(cos_coeffs, sin_coeffs, bgrid: BoundaryGrid) -> np.ndarray:
    """Zero-mean injected current from Fourier coefficients (mode >= 1)."""
    t = bgrid.t
    f = np.zeros_like(t)
    for m, a in enumerate(cos_coeffs, start=1):
        f += a * np.cos(m * t)
    for m, b in enumerate(sin_coeffs, start=1):
        f += b * np.sin(m * t)
    return f


def _check_zero_mean(f: np.ndarray, bgrid: BoundaryGrid, what: str) -> None:
    mean = float(np.sum(f * bgrid.weights)) / bgrid.perimeter
    scale = float(np.max(np.abs(f))) or 1.0
    if abs(mean) > 1e-12 * scale:
        raise ValueError(f"{what} must have zero boundary mean, got {mean:g}")


def _recenter(values: np.ndarray, bgrid: BoundaryGrid) -> np.ndarray:
    return values - np.sum(values * bgrid.weights) / bgrid.perimeter


@dataclass(frozen=True)
class FrequencyProfile:
    """Contrast law k(omega); must avoid the closed negative real axis.

    ``affine``: k = k_r + i c omega.
    ``debye``:  k = k_inf + (k_s - k_inf) / (1 + i omega tau).
    """

    model: str
    params: dict

    def contrast(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        p = self.params
        if self.model == "affine":
            return p["k_r"] + 1j * p["c"] * omega
        if self.model == "debye":
            return p["k_inf"] + (p["k_s"] - p["k_inf"]) / (1 + 1j * omega * p["tau"])
        raise ValueError(f"unknown frequency profile model {self.model!r}")

    def validate(self, omega_grid) -> None:
        k = self.contrast(omega_grid)
        on_axis = (np.abs(k.imag) < 1e-14) & (k.real <= 0)
        if np.any(on_axis):
            raise ValueError("profile touches the closed negative real axis")

    def to_dict(self) -> dict:
        return {"model": self.model, **self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "FrequencyProfile":
        d = dict(d)
        return cls(model=d.pop("model"), params=d)


@dataclass
class CauchyData:
    """Injected current and perfect-conductor voltage trace on the circle."""

    theta: np.ndarray
    f: np.ndarray | None
    u0: np.ndarray
    rho: float | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "f", "u0"])
        fvals = self.f if self.f is not None else np.full_like(self.u0, np.nan)
        for th, fv, uv in zip(self.theta, fvals, self.u0):
            w.writerow([repr(float(th)), repr(float(fv)), repr(float(uv))])
        return buf.getvalue()

    def sidecar(self) -> dict:
        return {"rho": None if self.rho is None else float(self.rho)}

    @classmethod
    def from_csv(cls, text: str, rho: float | None = None) -> "CauchyData":
        rows = list(csv.reader(io.StringIO(text)))
        data = np.array([[float(v) for v in row] for row in rows[1:]])
        f = data[:, 1]
        if np.all(np.isnan(f)):
            f = None
        return cls(theta=data[:, 0], f=f, u0=data[:, 2], rho=rho)


@dataclass
class MultiFreqData:
    """Boundary voltages over a frequency sweep, plus the contrast values."""

    theta: np.ndarray   # (m,) measurement angles on the unit circle
    omega: np.ndarray   # (J,)
    k: np.ndarray       # (J,) complex contrasts
    U: np.ndarray       # (m, J) complex voltages
    eta: float
    seed: int | None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["omega", "re_k", "im_k"]
        for i in range(self.theta.size):
            header += [f"re_u{i}", f"im_u{i}"]
        w.writerow(header)
        for j in range(self.omega.size):
            row = [repr(float(self.omega[j])), repr(float(self.k[j].real)),
                   repr(float(self.k[j].imag))]
            for i in range(self.theta.size):
                row += [repr(float(self.U[i, j].real)),
                        repr(float(self.U[i, j].imag))]
            w.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, eta: float = 0.0,
                 seed: int | None = None) -> "MultiFreqData":
        rows = list(csv.reader(io.StringIO(text)))
        data = np.array([[float(v) for v in row] for row in rows[1:]])
        m = (data.shape[1] - 3) // 2
        omega = data[:, 0]
        k = data[:, 1] + 1j * data[:, 2]
        U = (data[:, 3::2] + 1j * data[:, 4::2]).T
        theta = 2 * np.pi * np.arange(m) / m
        return cls(theta=theta, omega=omega, k=k, U=U, eta=eta, seed=seed)


def harmonic_lift_trace(f: np.ndarray, bgrid_omega: BoundaryGrid) -> np.ndarray:
    """Trace on the unit circle of the harmonic lift of a zero-mean current.

    On the circle the Neumann kernel reduces exactly to the periodic log
    kernel, so the singular quadrature rule applies verbatim.
    """
    _check_zero_mean(f, bgrid_omega, "injected current")
    R = kress_log_matrix(bgrid_omega.n)
    return -(R @ f)


def harmonic_lift_interior(f: np.ndarray, bgrid_omega: BoundaryGrid,
                           targets) -> np.ndarray:
    """Harmonic lift evaluated at interior points (smooth kernel)."""
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    # kernel symmetry: sources on the circle enter through the x slot
    ker = neumann_kernel(bgrid_omega.points[None, :, :], targets[:, None, :])
    return -(ker @ (f * bgrid_omega.weights))


def harmonic_lift_normal_derivative(f: np.ndarray, bgrid_omega: BoundaryGrid,
                                    targets, normals) -> np.ndarray:
    """Directional derivative of the harmonic lift at interior points."""
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    diff = targets[:, None, :] - bgrid_omega.points[None, :, :]
    d2 = np.sum(diff * diff, axis=-1)
    gfree = diff / (2 * np.pi * d2)[..., None]
    zz = np.sum(bgrid_omega.points ** 2, axis=-1)
    img2 = (np.sum(targets ** 2, axis=-1)[:, None] * zz[None, :]
            - 2 * targets @ bgrid_omega.points.T + 1.0)
    gimg = (zz[None, :, None] * targets[:, None, :]
            - bgrid_omega.points[None, :, :]) / (2 * np.pi * img2)[..., None]
    ker = np.sum((gfree + gimg) * normals[:, None, :], axis=-1)
    return -(ker @ (f * bgrid_omega.weights))


def solve_u0(shape: StarShape, f: np.ndarray, *, n: int = 256,
             bgrid_omega: BoundaryGrid | None = None,
             grid: BoundaryGrid | None = None,
             S: np.ndarray | None = None) -> CauchyData:
    """Perfect-conductor solution: u0 constant on the inclusion, flux f.

    Represents u0 = frak_f + S_D[psi] and solves the saddle system enforcing
    a constant trace (unknown rho) on the inclusion boundary and zero total
    density.
    """
    if bgrid_omega is None:
        bgrid_omega = unit_circle_grid(f.size)
    if grid is None:
        grid = discretize(shape, n)
    if S is None:
        from .potential import _assemble_single_layer
        S = _assemble_single_layer(grid)

    frak_d = harmonic_lift_interior(f, bgrid_omega, grid.points)
    frak_omega = harmonic_lift_trace(f, bgrid_omega)

    nd = grid.n
    A = np.zeros((nd + 1, nd + 1))
    A[:nd, :nd] = S
    A[:nd, nd] = -1.0
    A[nd, :nd] = grid.weights
    rhs = np.concatenate([-frak_d, [0.0]])
    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(sol)):
        raise SingularSystem("non-finite solution of the saddle system")
    psi, rho = sol[:nd], float(sol[nd])

    trace = frak_omega + eval_S(grid, psi, bgrid_omega.points)
    trace = _recenter(trace, bgrid_omega)
    return CauchyData(theta=bgrid_omega.t, f=f, u0=trace, rho=rho)


def solve_forward_direct(shape: StarShape, f: np.ndarray, k: complex,
                         k0: float = 1.0, *, n: int = 256,
                         bgrid_omega: BoundaryGrid | None = None,
                         kernels: KernelMatrices | None = None,
                         resonance_eigs: np.ndarray | None = None,
                         tol: float = 1e-10) -> np.ndarray:
    """Boundary voltage from the second-kind integral equation in k."""
    if bgrid_omega is None:
        bgrid_omega = unit_circle_grid(f.size)
    frak_omega = harmonic_lift_trace(f, bgrid_omega)
    if k == k0:
        return _recenter(frak_omega / k0, bgrid_omega)
    if kernels is None:
        kernels = assemble(discretize(shape, n))
    grid = kernels.grid

    c = (k0 + k) / (2.0 * (k0 - k))
    if resonance_eigs is not None:
        # system is singular where c equals lambda - 1/2 = -mu
        gap = np.min(np.abs(c + resonance_eigs))
        if gap < tol:
            raise NearResonance(k, float(gap))
    dn_frak = harmonic_lift_normal_derivative(f, bgrid_omega, grid.points,
                                              grid.normals)
    A = c * np.eye(grid.n) + kernels.Kstar
    phi = np.linalg.solve(A.astype(complex), -dn_frak.astype(complex) / k0)
    u = frak_omega / k0 + eval_S(grid, phi, bgrid_omega.points)
    return _recenter(u, bgrid_omega)


def solve_forward_spectral(spectrum: NPSpectrum, f: np.ndarray, k: complex,
                           k0: float, u0: CauchyData,
                           n_modes: int | None = None,
                           tol: float = 1e-10) -> np.ndarray:
    """Boundary voltage from the truncated resonance expansion."""
    bgrid_omega = unit_circle_grid(f.size)
    if spectrum.boundary_t.size != f.size:
        raise ValueError("current sampled on a different grid than the traces")
    nm = spectrum.lam.size if n_modes is None else min(n_modes, spectrum.lam.size)
    lam = spectrum.lam[:nm]
    W = spectrum.traces_bd_omega[:, :nm]
    denom = k0 + lam * (k - k0)
    gap = np.min(np.abs(denom))
    if gap < tol:
        raise NearResonance(k, float(gap))
    c_n = (f * bgrid_omega.weights) @ W
    u = u0.u0 / k0 + W @ (c_n / denom)
    return _recenter(u, bgrid_omega)


def synthesize(shape: StarShape, f: np.ndarray, profile: FrequencyProfile,
               omega_grid, eta: float, seed: int | None, *, n: int = 256,
               k0: float = 1.0,
               kernels: KernelMatrices | None = None,
               resonance_eigs: np.ndarray | None = None) -> MultiFreqData:
    """Multifrequency dataset from the direct solver plus calibrated noise.

    Additive complex Gaussian noise rescaled so its sup magnitude over all
    entries equals eta exactly.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    profile.validate(omega_grid)
    kvals = profile.contrast(omega_grid)
    bgrid_omega = unit_circle_grid(f.size)
    if kernels is None:
        kernels = assemble(discretize(shape, n))
    cols = [solve_forward_direct(shape, f, kj, k0, bgrid_omega=bgrid_omega,
                                 kernels=kernels,
                                 resonance_eigs=resonance_eigs)
            for kj in kvals]
    U = np.column_stack(cols)
    if eta > 0:
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal(U.shape) + 1j * rng.standard_normal(U.shape)
        U = U + raw * (eta / np.max(np.abs(raw)))
    return MultiFreqData(theta=bgrid_omega.t, omega=omega_grid, k=kvals,
                         U=U, eta=eta, seed=seed)
