import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fractal_burgers.errors import ConvergenceError, DegenerateInputError, DomainError
from fractal_burgers.profiles import (
    InviscidShock,
    ViscousProfile,
    compute_profile,
    evaluate_scaled,
    evaluate_scaled_derivative,
    load_profile,
    profile_residual,
    rankine_hugoniot_speed,
    save_profile,
    tail_gap,
)
from fractal_burgers.solver import BURGERS, power_flux


def test_rankine_hugoniot_values():
    assert rankine_hugoniot_speed(BURGERS, 1.0, -1.0) == 0.0
    assert rankine_hugoniot_speed(BURGERS, 2.0, 0.0) == 1.0
    assert rankine_hugoniot_speed(power_flux(4), 1.0, 0.0) == 1.0
    with pytest.raises(DegenerateInputError):
        rankine_hugoniot_speed(BURGERS, 0.5, 0.5)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_burgers_speed_is_mean(a, b):
    if a != b:
        assert rankine_hugoniot_speed(BURGERS, a, b) == pytest.approx(0.5 * (a + b), abs=1e-12)


def test_inviscid_shock():
    s = InviscidShock.from_flux(BURGERS, 2.0, 0.0)
    assert s.sigma == 1.0
    assert np.array_equal(s(np.array([-1.0, 0.5, 1.5]), t=1.0), [2.0, 2.0, 0.0])
    with pytest.raises(DomainError):
        InviscidShock.from_flux(BURGERS, 0.0, 1.0)


def test_profile_monotone_pinned_and_converged(profile15):
    p = profile15
    assert p.max_slope() <= 1e-6
    assert np.max(np.diff(p.values)) <= 1e-6
    assert float(p(0.0)) == pytest.approx(0.0, abs=1e-10)
    assert p.residual < p.tol
    assert profile_residual(p) <= 10 * p.tol


def test_profile_is_odd_for_symmetric_burgers(profile15):
    xi = np.linspace(-60, 60, 1201)
    assert np.max(np.abs(profile15(xi) + profile15(-xi))) < 1e-3
    assert profile15.sigma == 0.0


def test_profile_endpoints(profile15):
    p = profile15
    gap_end = tail_gap(p, p.xi_max**2)
    assert abs(p.values[0] - p.u_minus) <= max(p.tol, gap_end) + 1e-3
    assert abs(p.values[-1] - p.u_plus) <= max(p.tol, gap_end) + 1e-3
    # clamped outside the samples
    assert float(p(1e6)) == p.u_plus and float(p(-1e6)) == p.u_minus


def test_profile_tails_are_algebraic(profile15):
    # the layer approaches its end states like a power of xi, not exponentially
    p = profile15.tail_decay_exponent()
    assert 0.2 < p < 2.0
    assert profile15.meta["tail_decay_exponent"] == pytest.approx(p)


def test_profile_with_shifted_states():
    p = compute_profile(1.5, BURGERS, 2.0, 0.0, xi_max=32.0, n_cells=512, tol=1e-7)
    assert p.sigma == 1.0
    assert float(p(0.0)) == pytest.approx(1.0, abs=1e-9)
    assert p.max_slope() <= 1e-6
    assert profile_residual(p) <= 10 * p.tol


def test_profile_nonconvergence_raises():
    with pytest.raises(ConvergenceError) as err:
        compute_profile(1.5, xi_max=16.0, n_cells=128, tol=1e-12, max_iter=5)
    assert err.value.residual > 1e-12 and err.value.iterations == 5


def test_profile_needs_entropy_states():
    with pytest.raises(DomainError):
        compute_profile(1.5, BURGERS, -1.0, 1.0)


def test_evaluate_scaled(profile15):
    x = np.linspace(-5, 5, 11)
    assert np.array_equal(evaluate_scaled(profile15, 1.0, x), profile15(x))
    for eps in (1.0, 0.5, 0.1):
        assert float(evaluate_scaled(profile15, eps, 0.0)) == pytest.approx(0.0, abs=1e-10)
    # chain rule
    eps = 0.5
    xs = np.array([-0.3, 0.1, 0.7])
    d = 1e-6
    fd = (evaluate_scaled(profile15, eps, xs + d) - evaluate_scaled(profile15, eps, xs - d)) / (2 * d)
    assert np.allclose(evaluate_scaled_derivative(profile15, eps, xs), fd, rtol=1e-4)
    with pytest.raises(DomainError):
        evaluate_scaled(profile15, 0.0, xs)


def test_scaling_identity(profile15):
    # || S_eps - S0 ||_2 = eps^(beta/2) || S1 - S0 ||_2, by quadrature on a log grid
    def gap(eps):
        r = np.geomspace(1e-9, 200.0, 200001)
        left = (evaluate_scaled(profile15, eps, -r) - 1.0) ** 2
        right = (evaluate_scaled(profile15, eps, r) + 1.0) ** 2
        return np.sqrt(np.trapezoid(left + right, r))

    base = gap(1.0)
    for eps in (0.5, 0.25, 0.125):
        assert gap(eps) / (eps ** (profile15.beta / 2) * base) == pytest.approx(1.0, abs=0.01)


def test_tail_gap_properties(profile15):
    d = np.geomspace(4, (profile15.xi_max / 2) ** 2, 60)
    g = tail_gap(profile15, d)
    assert np.all(g >= 0)
    assert np.all(np.diff(g) <= 1e-12)
    assert tail_gap(profile15, 1e12) == 0.0  # beyond the samples the clamped states are exact
    with pytest.raises(DomainError):
        tail_gap(profile15, 3.9)


def test_save_load_roundtrip(profile15, tmp_path):
    csv_path, json_path = save_profile(profile15, tmp_path / "prof")
    assert csv_path.read_text().splitlines()[0] == "xi,S1"
    meta = json.loads(json_path.read_text())
    for key in ("alpha", "u_minus", "u_plus", "tol", "residual", "pinning"):
        assert key in meta
    q = load_profile(tmp_path / "prof")
    assert np.array_equal(q.xi, profile15.xi) and np.array_equal(q.values, profile15.values)
    assert q.alpha == profile15.alpha and q.residual == profile15.residual


def test_synthetic_profile_object():
    xi = np.linspace(-50, 50, 1001)
    p = ViscousProfile(alpha=1.5, u_minus=1.0, u_plus=-1.0, sigma=0.0, xi=xi, values=-np.tanh(xi), residual=0.0, tol=0.0)
    assert p.beta == 2.0 and p.xi_max == 50.0
    assert tail_gap(p, 16.0) == pytest.approx(2 * (1 - np.tanh(4.0)), rel=1e-5)
