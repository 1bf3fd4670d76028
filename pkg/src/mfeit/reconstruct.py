"""Shape recovery from perfect-conductor Cauchy data, and stability sweeps.

A single zero-mean current f and the trace u0 of the perfect-conductor
voltage on the unit circle determine a star-shaped inclusion uniquely; the
inverter here is a damped Gauss-Newton iteration on the radial Fourier
coefficients with a curvature penalty, finite-difference derivatives, and
radial projection back into the admissible band. Errors between shapes are
measured by the area of the symmetric difference, which for star shapes
about the origin reduces to a 1D integral of |r_a^2 - r_b^2| / 2.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .disentangle import extract_u0, fit_rational
from .errors import Diverged, MfeitError
from .forward import (CauchyData, FrequencyProfile, current_from_fourier,
                      solve_u0, synthesize)
from .geometry import DomainConfig, StarShape, discretize, unit_circle_grid
from .potential import _assemble_single_layer

_FD_BASE_STEP = 1e-6


@dataclass(frozen=True)
class InversionSettings:
    """Knobs of the Gauss-Newton shape inverter."""

    n_fourier_modes: int = 8      # M; unknowns are a0, a1..aM, b1..bM
    alpha: float = 1e-6           # curvature penalty weight
    max_iter: int = 60
    grad_tol: float = 1e-10
    backtrack_factor: float = 0.5
    max_backtracks: int = 25
    levenberg: float = 1e-10      # floor damping of the normal equations
    n_boundary: int = 128         # inclusion quadrature nodes per solve
    initial_radius: float | None = None  # default (b0 + b1 - delta) / 2
    config: DomainConfig = field(default_factory=DomainConfig)

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("regularization weight alpha must be >= 0")
        if self.n_fourier_modes > 16:
            raise ValueError("at most 16 Fourier modes are supported")


@dataclass
class InversionResult:
    shape: StarShape
    misfit: float
    history: list          # accepted misfit values, one per iterate
    rho: float | None
    hit_constraint: bool
    converged: bool
    n_iter: int


def _params_to_shape(x: np.ndarray, M: int) -> StarShape:
    return StarShape(cos=tuple(x[:M + 1]), sin=tuple(x[M + 1:]))


def _shape_to_params(shape: StarShape, M: int) -> np.ndarray:
    cos = list(shape.cos) + [0.0] * (M + 1 - len(shape.cos))
    sin = list(shape.sin) + [0.0] * (M - len(shape.sin))
    return np.array(cos[:M + 1] + sin[:M], dtype=float)


def _project_band(x: np.ndarray, M: int, config: DomainConfig,
                  margin: float = 1e-3) -> tuple[np.ndarray, bool]:
    """Pull the radius into (b0, b1 - delta) by shrinking toward the band center.

    Scales the oscillatory part and blends a0 toward the midpoint just enough
    to restore a strict margin; a no-op for feasible iterates.
    """
    lo = config.b0 + margin
    hi = config.b1 - config.delta - margin
    mid = 0.5 * (lo + hi)
    theta = np.linspace(0.0, 2 * np.pi, 720, endpoint=False)
    x = x.copy()
    hit = False
    for _ in range(60):
        r = _params_to_shape(x, M).radius(theta)
        if r.min() > lo and r.max() < hi:
            return x, hit
        hit = True
        x[0] = mid + 0.8 * (x[0] - mid)
        x[1:] *= 0.8
    return x, hit


class _Objective:
    """Weighted residual vector r(x) with J = 1/2 |r|^2 (data + penalty)."""

    def __init__(self, data: CauchyData, settings: InversionSettings):
        if data.f is None:
            raise ValueError("inversion needs the injected current f")
        self.data = data
        self.settings = settings
        self.M = settings.n_fourier_modes
        self.bgrid_omega = unit_circle_grid(data.u0.size)
        self.sqrt_w = np.sqrt(self.bgrid_omega.weights)
        M = self.M
        # penalty 1/2 alpha |r''|^2 = 1/2 alpha pi sum m^4 (a_m^2 + b_m^2)
        pen = np.zeros(2 * M + 1)
        for m in range(1, M + 1):
            pen[m] = m * m
            pen[M + m] = m * m
        self.pen_scale = math.sqrt(settings.alpha * math.pi) * pen
        self.n_solves = 0

    def residual(self, x: np.ndarray) -> np.ndarray:
        shape = _params_to_shape(x, self.M)
        grid = discretize(shape, self.settings.n_boundary)
        S = _assemble_single_layer(grid)
        sim = solve_u0(shape, self.data.f, bgrid_omega=self.bgrid_omega,
                       grid=grid, S=S)
        self.n_solves += 1
        r_data = self.sqrt_w * (sim.u0 - self.data.u0)
        return np.concatenate([r_data, self.pen_scale * x])

    def value(self, x: np.ndarray) -> float:
        r = self.residual(x)
        return 0.5 * float(r @ r)

    def jacobian(self, x: np.ndarray, threads: int = 1) -> np.ndarray:
        steps = _FD_BASE_STEP * np.maximum(np.abs(x), 1.0)

        def column(i):
            e = np.zeros_like(x)
            e[i] = steps[i]
            return (self.residual(x + e) - self.residual(x - e)) / (2 * steps[i])

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                cols = list(ex.map(column, range(x.size)))
        else:
            cols = [column(i) for i in range(x.size)]
        return np.column_stack(cols)


def misfit(shape: StarShape, data: CauchyData,
           settings: InversionSettings | None = None,
           threads: int = 1) -> tuple[float, np.ndarray]:
    """Objective J and its finite-difference gradient in the Fourier coefficients.

    J = 1/2 ||u0(shape) - u0_meas||^2_{L2(circle)} + alpha/2 ||r''||^2.
    """
    if settings is None:
        settings = InversionSettings()
    M = settings.n_fourier_modes
    obj = _Objective(data, settings)
    x = _shape_to_params(shape, M)
    r = obj.residual(x)
    Jac = obj.jacobian(x, threads=threads)
    return 0.5 * float(r @ r), Jac.T @ r


def invert(data: CauchyData, settings: InversionSettings | None = None,
           threads: int = 1) -> InversionResult:
    """Damped Gauss-Newton recovery of the inclusion from Cauchy data."""
    if settings is None:
        settings = InversionSettings()
    cfg = settings.config
    M = settings.n_fourier_modes
    r0 = settings.initial_radius
    if r0 is None:
        r0 = 0.5 * (cfg.b0 + cfg.b1 - cfg.delta)
    x = _shape_to_params(StarShape(cos=(r0,)), M)

    obj = _Objective(data, settings)
    J = obj.value(x)
    history = [J]
    hit = False
    converged = False
    it = 0
    for it in range(1, settings.max_iter + 1):
        r = obj.residual(x)
        Jac = obj.jacobian(x, threads=threads)
        grad = Jac.T @ r
        if np.linalg.norm(grad) < settings.grad_tol:
            converged = True
            break
        H = Jac.T @ Jac
        nu = settings.levenberg * max(np.trace(H).real / H.shape[0], 1.0)
        step = np.linalg.solve(H + nu * np.eye(H.shape[0]), -grad)

        accepted = False
        s = 1.0
        for _ in range(settings.max_backtracks):
            x_try, hit_try = _project_band(x + s * step, M, cfg)
            J_try = obj.value(x_try)
            if J_try < J:
                x, J = x_try, J_try
                hit = hit or hit_try
                history.append(J)
                accepted = True
                break
            s *= settings.backtrack_factor
        if not accepted:
            # stationary up to line-search resolution: treat tiny gradients
            # relative to the data scale as convergence, else report divergence
            scale = max(J, 1e-300)
            if np.linalg.norm(grad) < 1e-6 * math.sqrt(scale) + settings.grad_tol:
                converged = True
                break
            best = _finalize(x, J, history, hit, False, it, data, settings)
            raise Diverged("no descent direction found", result=best)
        if len(history) >= 2 and abs(history[-2] - history[-1]) \
                < 1e-15 * max(1.0, history[-2]):
            converged = True
            break

    return _finalize(x, J, history, hit, converged, it, data, settings)


def _finalize(x, J, history, hit, converged, it, data, settings):
    shape = _params_to_shape(x, settings.n_fourier_modes)
    rec = solve_u0(shape, data.f, n=settings.n_boundary)
    return InversionResult(shape=shape, misfit=J, history=history, rho=rec.rho,
                           hit_constraint=hit, converged=converged, n_iter=it)


def symmetric_difference(shape_a: StarShape, shape_b: StarShape,
                         n_quad: int = 8192) -> float:
    """Area of the symmetric difference of two star-shaped sets about 0."""
    theta = np.linspace(0.0, 2 * np.pi, n_quad, endpoint=False)
    ra = shape_a.radius(theta)
    rb = shape_b.radius(theta)
    return float(np.sum(np.abs(ra * ra - rb * rb)) * (np.pi / n_quad))


def rho_gap(data_a: CauchyData, data_b: CauchyData) -> float:
    """|rho_a - rho_b|, the gap between the constant inclusion voltages."""
    if data_a.rho is None or data_b.rho is None:
        raise ValueError("both Cauchy data must carry the constant value rho")
    return abs(data_a.rho - data_b.rho)


def _fit_power(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float, float]:
    """Least-squares fit y = C x^tau in log-log; returns (C, tau, residual)."""
    lx, ly = np.log(xs), np.log(ys)
    A = np.column_stack([np.ones_like(lx), lx])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = float(np.linalg.norm(A @ coef - ly))
    return float(np.exp(coef[0])), float(coef[1]), resid


@dataclass
class SweepResult:
    rows: list       # dicts: level, eps_measured, seed, sym_diff, status
    summary: dict    # fitted (C, tau) and (C, tau_prime) with residuals

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "eps_measured", "seed", "sym_diff", "status"])
        for row in self.rows:
            w.writerow([repr(float(row["level"])),
                        repr(float(row["eps_measured"])),
                        "" if row["seed"] is None else int(row["seed"]),
                        repr(float(row["sym_diff"])), row["status"]])
        return buf.getvalue()

    def summary_json(self) -> str:
        return json.dumps(self.summary, sort_keys=True, indent=2)


def stability_sweep(truth: StarShape, f_coeffs: tuple, profile: FrequencyProfile,
                    omega_grid, noise_levels, settings: InversionSettings,
                    seeds, max_poles: int = 6, threads: int = 1,
                    n_forward: int = 256, n_measure: int = 64,
                    allow_degenerate: bool = False) -> SweepResult:
    """Noise-to-error curve of the full pipeline, with fitted stability laws.

    Per (level, seed): synthesize multifrequency data, fit the shared-pole
    rational model, extract u0, invert, and compare with the truth by
    symmetric difference. Fits |D delta D~| = C (1/ln eps^-1)^tau and
    C' eps^tau' over the noisy levels.
    """
    noise_levels = sorted(float(v) for v in noise_levels)
    if not allow_degenerate:
        if len(noise_levels) < 4:
            raise ValueError("need at least 4 noise levels")
        if len(seeds) < 3:
            raise ValueError("need at least 3 seeds per level")
    if not seeds:
        raise ValueError("need at least one seed")
    omega_grid = np.asarray(omega_grid, dtype=float)
    bgrid_omega = unit_circle_grid(n_measure)

    from .potential import assemble
    import scipy.linalg as sla
    kernels = assemble(discretize(truth, n_forward))
    eigs = np.sort(sla.eigvals(kernels.Kstar).real)
    f = current_from_fourier(f_coeffs[0], f_coeffs[1], bgrid_omega)
    clean = synthesize(truth, f, profile, omega_grid, eta=0.0, seed=None,
                       kernels=kernels, resonance_eigs=eigs)

    jobs = [(lv, sd) for lv in noise_levels
            for sd in (seeds if lv > 0 else [seeds[0]])]

    def run(job):
        level, seed = job
        eps = float("nan")
        try:
            data = synthesize(truth, f, profile, omega_grid, eta=level,
                              seed=seed if level > 0 else None,
                              kernels=kernels, resonance_eigs=eigs)
            eps = float(np.max(np.abs(data.U - clean.U)))
            # fit down to the noise floor, never below quadrature accuracy
            tol = max(level / max(float(np.max(np.abs(data.U))), 1e-300), 1e-11)
            model = fit_rational(data, max_poles=max_poles, tol=tol,
                                 config=settings.config)
            u0_hat = extract_u0(model, settings.config.k0)
            u0_hat.f = f
            res = invert(u0_hat, settings)
            d = symmetric_difference(truth, res.shape)
            return {"level": level, "eps_measured": eps, "seed": seed,
                    "sym_diff": d, "status": "ok"}
        except Diverged as exc:
            d = symmetric_difference(truth, exc.result.shape)
            return {"level": level, "eps_measured": eps, "seed": seed,
                    "sym_diff": d, "status": "diverged"}
        except MfeitError as exc:
            return {"level": level, "eps_measured": float("nan"), "seed": seed,
                    "sym_diff": float("nan"),
                    "status": f"failed:{type(exc).__name__}"}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(run, jobs))
    else:
        rows = [run(job) for job in jobs]

    # per-level medians over seeds, noisy levels only, for the stability fits
    eps_med, dif_med = [], []
    for lv in noise_levels:
        ok = [r for r in rows if r["level"] == lv and r["status"] == "ok"
              and np.isfinite(r["sym_diff"])]
        if lv > 0 and ok:
            eps_med.append(float(np.median([r["eps_measured"] for r in ok])))
            dif_med.append(float(np.median([r["sym_diff"] for r in ok])))
    summary: dict = {"levels": noise_levels, "eps_median": eps_med,
                     "sym_diff_median": dif_med}
    if len(eps_med) >= 2 and all(d > 0 for d in dif_med):
        eps = np.array(eps_med)
        dif = np.array(dif_med)
        C, tau, res_log = _fit_power(1.0 / np.log(1.0 / eps), dif)
        Cp, taup, res_hold = _fit_power(eps, dif)
        summary["log_model"] = {"C": C, "tau": tau, "residual": res_log}
        summary["holder_model"] = {"C": Cp, "tau_prime": taup,
                                   "residual": res_hold}
    return SweepResult(rows=rows, summary=summary)
