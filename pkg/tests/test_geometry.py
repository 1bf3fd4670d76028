import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfeit.errors import ConstraintViolation, InvalidResolution
from mfeit.geometry import (DomainConfig, StarShape, build_star_shape, circle,
                            discretize, r_inf, unit_circle_grid)

CFG = DomainConfig()


def test_domain_config_defaults_and_validation():
    assert CFG.b0 == 0.2 and CFG.b1 == 1.0 and CFG.delta == 0.1
    with pytest.raises(ValueError):
        DomainConfig(k0=-1.0)
    with pytest.raises(ValueError):
        DomainConfig(b0=0.95)
    with pytest.raises(ValueError):
        DomainConfig(b1=2.0)
    assert DomainConfig.from_dict(CFG.to_dict()) == CFG


def test_star_shape_requires_constant_term():
    with pytest.raises(ValueError):
        StarShape(cos=())


def test_radius_derivatives_match_finite_differences():
    shape = StarShape(cos=(0.5, 0.03, 0.0, 0.08), sin=(0.02, 0.0, 0.01))
    theta = np.linspace(0, 2 * np.pi, 17)
    h = 1e-6
    d1_fd = (shape.radius(theta + h) - shape.radius(theta - h)) / (2 * h)
    d2_fd = (shape.radius(theta + h) - 2 * shape.radius(theta)
             + shape.radius(theta - h)) / h**2
    assert np.allclose(shape.radius_d1(theta), d1_fd, atol=1e-8)
    assert np.allclose(shape.radius_d2(theta), d2_fd, atol=1e-3)


def test_points_lie_at_radius():
    shape = StarShape(cos=(0.5, 0.0, 0.0, 0.08))
    theta = np.linspace(0, 2 * np.pi, 33)
    pts = shape.points(theta)
    assert np.allclose(np.hypot(pts[..., 0], pts[..., 1]), shape.radius(theta))


@given(st.lists(st.floats(-0.02, 0.02), min_size=0, max_size=4),
       st.lists(st.floats(-0.02, 0.02), min_size=0, max_size=4))
@settings(max_examples=30)
def test_shape_json_round_trip(cos_tail, sin_coeffs):
    shape = StarShape(cos=tuple([0.5] + cos_tail), sin=tuple(sin_coeffs))
    again = StarShape.from_json(shape.to_json())
    assert again == shape


def test_build_star_shape_validates_band_and_norm():
    assert build_star_shape((0.5, 0, 0, 0.08), (), CFG) is not None
    with pytest.raises(ConstraintViolation) as e:
        build_star_shape((0.15,), (), CFG)
    assert "b0" in str(e.value)
    with pytest.raises(ConstraintViolation) as e:
        build_star_shape((0.95,), (), CFG)
    assert "b1" in str(e.value)
    # high mode with large second derivative breaks the C2 bound
    coeffs = [0.5] + [0.0] * 15 + [0.25]  # mode 16: |r''| alone is 64
    with pytest.raises(ConstraintViolation) as e:
        build_star_shape(tuple(coeffs), (), CFG)
    assert "norm" in str(e.value) or "m" in str(e.value)


def test_constraint_violation_carries_location():
    with pytest.raises(ConstraintViolation) as e:
        build_star_shape((0.5, 0.35), (), CFG)
    exc = e.value
    assert hasattr(exc, "theta") and hasattr(exc, "value") and hasattr(exc, "bound")
    # 0.5 + 0.35 cos(theta) first dips under b0, worst at theta = pi
    assert "b0" in exc.which
    assert abs(exc.theta - np.pi) < 0.1


def test_discretize_rejects_bad_resolution():
    with pytest.raises(InvalidResolution):
        discretize(circle(0.5), 15)
    with pytest.raises(InvalidResolution):
        discretize(circle(0.5), 8)


def test_circle_grid_geometry():
    r = 0.5
    g = discretize(circle(r), 128)
    assert g.n == 128
    assert np.isclose(g.perimeter, 2 * np.pi * r, rtol=1e-12)
    assert np.isclose(g.signed_area, np.pi * r * r, rtol=1e-12)
    assert np.allclose(g.curvature, 1 / r)
    assert np.allclose(g.jacobian, r)
    # outward unit normals
    assert np.allclose(np.hypot(g.normals[:, 0], g.normals[:, 1]), 1.0)
    assert np.allclose(g.normals, g.points / r, atol=1e-14)


def test_star_grid_normals_outward_and_area():
    shape = StarShape(cos=(0.5, 0, 0, 0.08))
    g = discretize(shape, 256)
    # star-shaped about origin: x . nu > 0 everywhere
    assert np.all(np.sum(g.points * g.normals, axis=1) > 0)
    # area of r = a0 + a3 cos(3t): pi (a0^2 + a3^2 / 2)
    assert np.isclose(g.signed_area, np.pi * (0.25 + 0.08**2 / 2), rtol=1e-12)


def test_unit_circle_grid():
    g = unit_circle_grid(64)
    assert np.isclose(g.perimeter, 2 * np.pi, rtol=1e-13)
    assert np.allclose(np.hypot(g.points[:, 0], g.points[:, 1]), 1.0)


def test_r_inf_closed_forms():
    assert np.isclose(r_inf(circle(0.3)), 0.3, rtol=1e-12)
    shape = StarShape(cos=(0.5, 0, 0, 0.08))
    theta = np.linspace(0, 2 * np.pi, 100_000, endpoint=False)
    r = shape.radius(theta)
    r1 = shape.radius_d1(theta)
    expect = np.min(r * r / np.sqrt(r * r + r1 * r1))
    assert np.isclose(r_inf(shape), expect, rtol=1e-12)
