"""Layer potentials built on the Neumann function of the unit disk.

The Neumann function used throughout is the image-charge closed form

    N(x, z) = (1/4pi) [ ln|x - z|^2 + ln(|x|^2 |z|^2 - 2 x.z + 1) ],

which satisfies Delta_x N = delta_z in the disk, dN/dnu = 1/(2pi) on the
unit circle and has zero boundary mean. The second log is smooth whenever
x stays strictly inside the closed disk times z inside, so only the
free-space log needs the singular quadrature.

The single layer S_D and the Neumann-Poincare operator K*_D are assembled
with the classical periodic log-kernel product rule (spectrally accurate
for smooth boundaries); the normal-derivative kernel takes its smooth
diagonal limit kappa/(4pi) plus the image contribution evaluated directly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DomainViolation, ResolutionTooLow, SingularEvaluation,
                     TargetTooClose)
from .geometry import BoundaryGrid

_TINY = 1e-300


def _image_log_sq(x, z):
    """|  |z| x - z/|z| |^2 = |x|^2 |z|^2 - 2 x.z + 1, smooth through z -> 0."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    xx = np.sum(x * x, axis=-1)
    zz = np.sum(z * z, axis=-1)
    xz = np.sum(x * z, axis=-1)
    return xx * zz - 2.0 * xz + 1.0


def neumann_kernel(x, z):
    """Neumann function of the unit disk, elementwise over broadcast points.

    ``x`` may lie anywhere in the closed disk, ``z`` strictly inside; the
    two must not coincide.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(np.sum(z * z, axis=-1) >= 1.0):
        raise DomainViolation("source point z must lie in the open unit disk")
    d2 = np.sum((x - z) ** 2, axis=-1)
    if np.any(d2 == 0.0):
        raise SingularEvaluation("Neumann kernel evaluated at x == z")
    return (np.log(d2) + np.log(_image_log_sq(x, z))) / (4 * np.pi)


def kress_log_matrix(n: int) -> np.ndarray:
    """Circulant quadrature rule for (1/2pi) int ln(4 sin^2((t-s)/2)) g(s) ds.

    Exact on trigonometric polynomials of degree <= n/2: the symbol maps
    e^{ims} to -(1/|m|) e^{imt} (0 for m = 0, -(2/n) at the Nyquist mode).
    """
    freqs = np.fft.fftfreq(n, d=1.0 / n)  # 0, 1, ..., n/2-1, -n/2, ..., -1
    d = np.zeros(n)
    nz = freqs != 0
    d[nz] = -1.0 / np.abs(freqs[nz])
    row = np.fft.ifft(d).real
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return row[idx]


@dataclass(frozen=True)
class KernelMatrices:
    """Discrete single layer and Neumann-Poincare operators on one grid.

    ``S`` and ``Kstar`` act on nodal density values and return boundary
    traces / normal derivatives at the same nodes (quadrature weights are
    folded in). ``B = -W S`` is the symmetric positive definite Gram matrix
    of the energy inner product <-S phi, psi>.
    """

    S: np.ndarray
    Kstar: np.ndarray
    grid: BoundaryGrid

    @property
    def B(self) -> np.ndarray:
        W = self.grid.weights
        M = -(W[:, None] * self.S)
        return 0.5 * (M + M.T)

    def calderon_residual(self) -> float:
        """Relative asymmetry of K* in the -S inner product (-> 0 with n)."""
        W = self.grid.weights
        M = -(W[:, None] * self.S)
        A = M @ self.Kstar
        return float(np.linalg.norm(A - A.T) / np.linalg.norm(M))


def _assemble_single_layer(grid: BoundaryGrid) -> np.ndarray:
    n = grid.n
    t = grid.t
    pts = grid.points
    jac = grid.jacobian
    h = grid.h

    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.sum(diff * diff, axis=-1)
    dt_half = 0.5 * (t[:, None] - t[None, :])
    sin2 = 4.0 * np.sin(dt_half) ** 2
    np.fill_diagonal(d2, 1.0)
    np.fill_diagonal(sin2, 1.0)
    # smooth remainder of the free-space log, diagonal limit ln|x'(t)|
    M = 0.5 * np.log(d2 / sin2)
    np.fill_diagonal(M, np.log(jac))

    R = kress_log_matrix(n)
    img2 = _image_log_sq(pts[:, None, :], pts[None, :, :])
    S = (0.5 * R + (h / (2 * np.pi)) * M
         + (h / (4 * np.pi)) * np.log(img2)) * jac[None, :]
    return S


def _assemble_np_operator(grid: BoundaryGrid) -> np.ndarray:
    pts = grid.points
    nrm = grid.normals
    jac = grid.jacobian
    h = grid.h

    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.sum(diff * diff, axis=-1)
    np.fill_diagonal(d2, 1.0)
    kfree = np.sum(diff * nrm[:, None, :], axis=-1) / (2 * np.pi * d2)
    np.fill_diagonal(kfree, grid.curvature / (4 * np.pi))

    img2 = _image_log_sq(pts[:, None, :], pts[None, :, :])
    zz = np.sum(pts * pts, axis=-1)
    vec = zz[None, :, None] * pts[:, None, :] - pts[None, :, :]
    kimg = np.sum(vec * nrm[:, None, :], axis=-1) / (2 * np.pi * img2)

    return (kfree + kimg) * (h * jac[None, :])


def assemble(grid: BoundaryGrid) -> KernelMatrices:
    """Discrete S_D and K*_D on an inclusion boundary grid."""
    if grid.n < 32:
        raise ResolutionTooLow(f"need n >= 32 nodes, got {grid.n}")
    return KernelMatrices(S=_assemble_single_layer(grid),
                          Kstar=_assemble_np_operator(grid), grid=grid)


def eval_S(grid: BoundaryGrid, density, targets) -> np.ndarray:
    """S_D[phi] at off-boundary targets by plain trapezoid (kernel smooth).

    Targets must keep a distance of at least one local grid spacing
    2 pi max|x'| / n from the boundary.
    """
    density = np.asarray(density)
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    dist = np.sqrt(np.min(np.sum(
        (targets[:, None, :] - grid.points[None, :, :]) ** 2, axis=-1), axis=1))
    zone = grid.h * float(np.max(grid.jacobian))
    if np.any(dist <= zone):
        raise TargetTooClose(
            f"target at distance {dist.min():.3g} inside accuracy zone {zone:.3g}")
    ker = neumann_kernel(targets[:, None, :], grid.points[None, :, :])
    return ker @ (density * grid.weights)


def eval_S_normal_derivative(grid: BoundaryGrid, density, targets,
                             target_normals) -> np.ndarray:
    """Directional derivative of S_D[phi] at off-boundary targets."""
    density = np.asarray(density)
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    target_normals = np.atleast_2d(np.asarray(target_normals, dtype=float))
    diff = targets[:, None, :] - grid.points[None, :, :]
    d2 = np.sum(diff * diff, axis=-1)
    if np.any(d2 == 0):
        raise SingularEvaluation("derivative target on the source boundary")
    gfree = diff / (2 * np.pi * d2)[..., None]
    img2 = _image_log_sq(targets[:, None, :], grid.points[None, :, :])
    zz = np.sum(grid.points * grid.points, axis=-1)
    gimg = (zz[None, :, None] * targets[:, None, :] - grid.points[None, :, :]) \
        / (2 * np.pi * img2)[..., None]
    ker = np.sum((gfree + gimg) * target_normals[:, None, :], axis=-1)
    return ker @ (density * grid.weights)


def s_inner(kernels: KernelMatrices, phi, psi) -> float:
    """Energy inner product <-S_D phi, psi>; symmetric positive definite."""
    phi = np.asarray(phi)
    psi = np.asarray(psi)
    return float(psi @ (kernels.B @ phi))
