import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfeit.forward import solve_u0
from mfeit.geometry import StarShape, circle
from mfeit.reconstruct import (InversionSettings, _Objective, _shape_to_params,
                               invert, misfit, rho_gap, stability_sweep,
                               symmetric_difference)

from conftest import R0, TREFOIL, g_two_phase


@pytest.fixture(scope="module")
def conc_data(f_cos):
    return solve_u0(circle(R0), f_cos, n=256)


@pytest.fixture(scope="module")
def tre_data(f_cos):
    return solve_u0(TREFOIL, f_cos, n=256)


def test_settings_validation():
    with pytest.raises(ValueError):
        InversionSettings(alpha=-1.0)
    with pytest.raises(ValueError):
        InversionSettings(n_fourier_modes=17)


def test_misfit_zero_at_truth(conc_data):
    st0 = InversionSettings(n_fourier_modes=0, alpha=0.0, n_boundary=256)
    J, _ = misfit(circle(R0), conc_data, st0)
    assert J < 1e-14


def test_misfit_concentric_closed_form(conc_data):
    # J = pi/2 (g(0.4) - g(0.5))^2 for a radius-0.4 candidate, f = cos
    st0 = InversionSettings(n_fourier_modes=0, alpha=0.0, n_boundary=256)
    J, grad = misfit(circle(0.4), conc_data, st0)
    expect = np.pi / 2 * (g_two_phase(0.4) - g_two_phase(R0)) ** 2
    assert np.isclose(J, expect, rtol=1e-12)
    assert grad.shape == (1,)


def test_gradient_finite_difference_consistency(tre_data):
    # central-difference gradient vs forward differences at half the step
    settings_ = InversionSettings(n_fourier_modes=3, alpha=1e-6)
    shape = StarShape(cos=(0.52, 0.01, 0.0, 0.06))
    _, grad = misfit(shape, tre_data, settings_)
    obj = _Objective(tre_data, settings_)
    x = _shape_to_params(shape, 3)
    h = 0.5e-6 * np.maximum(np.abs(x), 1.0)
    J0 = obj.value(x)
    fwd = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        fwd[i] = (obj.value(x + e) - J0) / h[i]
    assert np.max(np.abs(fwd - grad)) / np.max(np.abs(grad)) < 1e-4


def test_invert_circle_radius_only(conc_data):
    st0 = InversionSettings(n_fourier_modes=0, alpha=0.0)
    res = invert(conc_data, st0)
    assert abs(res.shape.cos[0] - R0) < 1e-6
    assert symmetric_difference(res.shape, circle(R0)) < 1e-6
    assert res.converged


def test_invert_descends(tre_data):
    settings_ = InversionSettings(n_fourier_modes=8, alpha=1e-7)
    res = invert(tre_data, settings_)
    hist = np.array(res.history)
    assert np.all(np.diff(hist) < 0)


def test_reinversion_is_fixed_point(conc_data, f_cos):
    st0 = InversionSettings(n_fourier_modes=0, alpha=0.0)
    first = invert(conc_data, st0)
    data2 = solve_u0(first.shape, f_cos, n=128)
    second = invert(data2, st0)
    assert abs(first.shape.cos[0] - second.shape.cos[0]) < 1e-8


def test_invert_requires_current(conc_data):
    from mfeit.forward import CauchyData
    bare = CauchyData(theta=conc_data.theta, f=None, u0=conc_data.u0)
    with pytest.raises(ValueError):
        invert(bare, InversionSettings(n_fourier_modes=0))


def test_symmetric_difference_oracles():
    assert symmetric_difference(TREFOIL, TREFOIL) == 0.0
    assert np.isclose(symmetric_difference(circle(0.5), circle(0.4)),
                      0.09 * np.pi, rtol=1e-12)
    # dense-quadrature oracle for circle vs trefoil
    th = np.linspace(0, 2 * np.pi, 1_000_000, endpoint=False)
    dense = np.sum(np.abs(circle(R0).radius(th) ** 2
                          - TREFOIL.radius(th) ** 2)) / 2 * (2 * np.pi / 1e6)
    assert np.isclose(symmetric_difference(circle(R0), TREFOIL), dense,
                      atol=1e-7)


@given(st.lists(st.floats(0.25, 0.8), min_size=3, max_size=3),
       st.lists(st.floats(-0.05, 0.05), min_size=3, max_size=3))
@settings(max_examples=25, deadline=None)
def test_symmetric_difference_is_a_metric(radii, wobbles):
    shapes = [StarShape(cos=(r, 0.0, w)) for r, w in zip(radii, wobbles)]
    a, b, c = shapes
    dab = symmetric_difference(a, b)
    assert np.isclose(dab, symmetric_difference(b, a), rtol=1e-12)
    assert dab >= 0
    assert dab <= symmetric_difference(a, c) + symmetric_difference(c, b) + 1e-12


def test_rho_gap(conc_data, f_cos):
    assert rho_gap(conc_data, conc_data) == 0.0
    other = solve_u0(circle(0.4), f_cos, n=256)
    # concentric circles both have rho = 0 by symmetry
    assert rho_gap(conc_data, other) < 1e-12
    # asymmetric inclusion: value locked by regression
    bent = solve_u0(StarShape(cos=(0.5, 0.1)), f_cos, n=256)
    assert np.isclose(rho_gap(conc_data, bent), 0.0790234926459577, atol=1e-8)
    from mfeit.forward import CauchyData
    with pytest.raises(ValueError):
        rho_gap(conc_data, CauchyData(theta=conc_data.theta, f=None,
                                      u0=conc_data.u0))


def test_stability_sweep_validates_inputs():
    st0 = InversionSettings(n_fourier_modes=0, alpha=0.0)
    from mfeit.forward import FrequencyProfile
    prof = FrequencyProfile("affine", {"k_r": -0.5, "c": 0.05})
    with pytest.raises(ValueError):
        stability_sweep(circle(R0), ([1.0], []), prof, [1, 2], [0.0, 1e-3],
                        st0, seeds=[1, 2, 3])
    with pytest.raises(ValueError):
        stability_sweep(circle(R0), ([1.0], []), prof, [1, 2],
                        [0.0, 1e-4, 1e-3, 1e-2], st0, seeds=[1])
