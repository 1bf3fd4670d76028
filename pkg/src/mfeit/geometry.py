"""Star-shaped inclusions in the unit disk and boundary quadrature grids.

The ambient domain is always the unit disk, so the admissible radial band
(b0, b1 - delta) with b1 = 1 pins every inclusion strictly inside it.
Radial functions are truncated Fourier series

    r(theta) = a0 + sum_m a_m cos(m theta) + b_m sin(m theta),

which keeps shapes finitely parameterized and smooth.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintViolation, InvalidResolution

#: number of sample angles used for constraint checks
N_CHECK = 1024


@dataclass(frozen=True)
class DomainConfig:
    """Admissibility constants of the inclusion class plus background conductivity."""

    b0: float = 0.2
    b1: float = 1.0
    delta: float = 0.1
    m: float = 50.0
    k0: float = 1.0

    def __post_init__(self):
        if self.k0 <= 0:
            raise ValueError("background conductivity k0 must be positive")
        if not (0 < self.b0 < self.b1 - self.delta):
            raise ValueError("need 0 < b0 < b1 - delta")
        if self.b1 != 1.0:
            raise ValueError("ambient domain is the unit disk, b1 must equal 1")

    def to_dict(self) -> dict:
        return {"b0": self.b0, "b1": self.b1, "delta": self.delta,
                "m": self.m, "k0": self.k0}

    @classmethod
    def from_dict(cls, d: dict) -> "DomainConfig":
        return cls(b0=d["b0"], b1=d.get("b1", 1.0), delta=d["delta"],
                   m=d.get("m", 50.0), k0=d.get("k0", 1.0))


@dataclass(frozen=True)
class StarShape:
    """Radial Fourier description of a closed curve around the origin.

    ``cos[0]`` is the mean radius a0; ``sin`` starts at mode 1.
    Instances built through :func:`build_star_shape` satisfy the class
    constraints; direct construction performs no validation (used for
    trial shapes inside iterative inversion).
    """

    cos: tuple = field(default_factory=tuple)
    sin: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "cos", tuple(float(c) for c in self.cos))
        object.__setattr__(self, "sin", tuple(float(s) for s in self.sin))
        if not self.cos:
            raise ValueError("need at least the constant coefficient a0")

    def radius(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = np.full_like(theta, self.cos[0])
        for m, a in enumerate(self.cos[1:], start=1):
            if a:
                r = r + a * np.cos(m * theta)
        for m, b in enumerate(self.sin, start=1):
            if b:
                r = r + b * np.sin(m * theta)
        return r

    def radius_d1(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = np.zeros_like(theta)
        for m, a in enumerate(self.cos[1:], start=1):
            if a:
                r = r - a * m * np.sin(m * theta)
        for m, b in enumerate(self.sin, start=1):
            if b:
                r = r + b * m * np.cos(m * theta)
        return r

    def radius_d2(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = np.zeros_like(theta)
        for m, a in enumerate(self.cos[1:], start=1):
            if a:
                r = r - a * m * m * np.cos(m * theta)
        for m, b in enumerate(self.sin, start=1):
            if b:
                r = r - b * m * m * np.sin(m * theta)
        return r

    def points(self, theta):
        r = self.radius(theta)
        return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    def to_dict(self) -> dict:
        return {"cos": list(self.cos), "sin": list(self.sin)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "StarShape":
        return cls(cos=tuple(d["cos"]), sin=tuple(d.get("sin", ())))

    @classmethod
    def from_json(cls, s: str) -> "StarShape":
        return cls.from_dict(json.loads(s))


def circle(radius: float) -> StarShape:
    return StarShape(cos=(float(radius),))


def build_star_shape(cos_coeffs, sin_coeffs, config: DomainConfig) -> StarShape:
    """Validate class constraints on a dense angle grid and return the shape.

    Raises :class:`ConstraintViolation` naming the failed bound and the
    worst offending angle.
    """
    shape = StarShape(cos=tuple(cos_coeffs), sin=tuple(sin_coeffs))
    theta = np.linspace(0.0, 2 * np.pi, N_CHECK, endpoint=False)
    r = shape.radius(theta)
    i = int(np.argmin(r))
    if r[i] <= config.b0:
        raise ConstraintViolation("lower bound b0", theta[i], r[i], config.b0)
    j = int(np.argmax(r))
    upper = config.b1 - config.delta
    if r[j] >= upper:
        raise ConstraintViolation("upper bound b1 - delta", theta[j], r[j], upper)
    # discrete C^2 norm proxy
    c2 = np.abs(r) + np.abs(shape.radius_d1(theta)) + np.abs(shape.radius_d2(theta))
    k = int(np.argmax(c2))
    if c2[k] > config.m:
        raise ConstraintViolation("C2 norm bound m", theta[k], c2[k], config.m)
    return shape


@dataclass(frozen=True)
class BoundaryGrid:
    """Trapezoidal quadrature grid on a closed parametrized curve.

    Nodes are equispaced in the parameter; normals and Jacobians come from
    the analytic Fourier derivatives, never finite differences.
    """

    t: np.ndarray          # (n,) parameters in [0, 2pi)
    points: np.ndarray     # (n, 2)
    normals: np.ndarray    # (n, 2) outward unit normals
    jacobian: np.ndarray   # (n,) |x'(t)|
    curvature: np.ndarray  # (n,) signed curvature (positive for ccw convex)

    @property
    def n(self) -> int:
        return self.t.size

    @property
    def h(self) -> float:
        return 2 * np.pi / self.n

    @property
    def weights(self) -> np.ndarray:
        """Arc-length quadrature weights h * |x'(t_i)|."""
        return self.h * self.jacobian

    @property
    def perimeter(self) -> float:
        return float(np.sum(self.weights))

    @property
    def signed_area(self) -> float:
        x, y = self.points[:, 0], self.points[:, 1]
        # x'(t) reconstructed from normal and jacobian: tangent = (-ny, nx)
        tx = -self.normals[:, 1] * self.jacobian
        ty = self.normals[:, 0] * self.jacobian
        return float(0.5 * self.h * np.sum(x * ty - y * tx))


def discretize(shape: StarShape, n: int) -> BoundaryGrid:
    """Quadrature grid with n nodes on the boundary of a star shape."""
    if n % 2 != 0 or n < 16:
        raise InvalidResolution(f"need even n >= 16, got {n}")
    t = 2 * np.pi * np.arange(n) / n
    r = shape.radius(t)
    r1 = shape.radius_d1(t)
    r2 = shape.radius_d2(t)
    ct, st = np.cos(t), np.sin(t)
    pts = np.stack([r * ct, r * st], axis=-1)
    # x'(t) = r'(cos,sin) + r(-sin,cos)
    xp = np.stack([r1 * ct - r * st, r1 * st + r * ct], axis=-1)
    jac = np.hypot(xp[:, 0], xp[:, 1])
    # outward normal for counterclockwise parametrization
    nrm = np.stack([xp[:, 1], -xp[:, 0]], axis=-1) / jac[:, None]
    # x''(t) = (r'' - r)(cos,sin) + 2 r'(-sin,cos)
    xpp = np.stack([(r2 - r) * ct - 2 * r1 * st,
                    (r2 - r) * st + 2 * r1 * ct], axis=-1)
    kappa = (xp[:, 0] * xpp[:, 1] - xp[:, 1] * xpp[:, 0]) / jac**3
    return BoundaryGrid(t=t, points=pts, normals=nrm, jacobian=jac,
                        curvature=kappa)


def unit_circle_grid(n: int) -> BoundaryGrid:
    """Measurement grid on the boundary of the ambient unit disk."""
    return discretize(circle(1.0), n)


def r_inf(shape: StarShape, n_samples: int = 100_000) -> float:
    """inf over the boundary of x . nu(x); strictly positive for star shapes.

    Equals r^2 / sqrt(r^2 + r'^2) pointwise for a radial parametrization.
    """
    theta = np.linspace(0.0, 2 * np.pi, n_samples, endpoint=False)
    r = shape.radius(theta)
    r1 = shape.radius_d1(theta)
    return float(np.min(r * r / np.sqrt(r * r + r1 * r1)))
