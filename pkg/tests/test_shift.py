import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.interpolate import PchipInterpolator

from fractal_burgers.entropy import entropy_pair
from fractal_burgers.errors import BoundaryProximityError
from fractal_burgers.fractional_operator import Grid1D
from fractal_burgers.profiles import evaluate_scaled
from fractal_burgers.shift import ShiftState, advance, interpolate_at, shift_rhs, speed_bound
from fractal_burgers.solver import BURGERS, power_flux

PAIR = entropy_pair(BURGERS)


def test_interpolation_reproduces_linear_data():
    g = Grid1D(3.0, 64)
    u = 2.0 * g.x - 0.5
    for X in (-1.234, 0.0, 0.01, 2.5):
        assert interpolate_at(u, g, X) == pytest.approx(2 * X - 0.5, abs=1e-13)


@settings(max_examples=100, deadline=None)
@given(X=st.floats(-2.9, 2.9), seed=st.integers(0, 1000))
def test_local_interpolation_matches_global(X, seed):
    g = Grid1D(3.0, 64)
    u = np.cumsum(np.random.default_rng(seed).uniform(-1, 0, g.N))
    assert interpolate_at(u, g, X) == pytest.approx(float(PchipInterpolator(g.x, u)(X)), abs=1e-12)


def test_interpolation_clamps_outside_centres():
    g = Grid1D(1.0, 16)
    u = np.arange(16.0)
    assert interpolate_at(u, g, -0.999) == 0.0 and interpolate_at(u, g, 0.999) == 15.0


def test_shift_rhs_values(profile15):
    g = Grid1D(10.0, 512)
    eps = 0.5
    S = evaluate_scaled(profile15, eps, g.x)
    # on the layer itself the shift does not move
    assert shift_rhs(S, 0.0, profile15, eps, BURGERS, PAIR, g) == pytest.approx(0.0, abs=1e-9)
    # Burgers: f(u, 0) = 2u / 3
    assert shift_rhs(np.full(g.N, 0.6), 0.3, profile15, eps, BURGERS, PAIR, g) == pytest.approx(0.4, rel=1e-12)


def test_shift_rhs_boundary_guard(profile15):
    g = Grid1D(4.0, 64)
    with pytest.raises(BoundaryProximityError):
        shift_rhs(np.zeros(g.N), 3.5, profile15, 0.5, BURGERS, PAIR, g)


def test_advance_is_heun():
    s = ShiftState()
    out = advance(s, (None, None), 0.1, lambda U, X: 2.0)
    assert out.X == pytest.approx(0.2) and out.t == pytest.approx(0.1)
    # X' = -X from X = 1: Heun gives 1 - dt + dt^2 / 2
    s = ShiftState(X=1.0)
    out = advance(s, (None, None), 0.1, lambda U, X: -X)
    assert out.X == pytest.approx(1 - 0.1 + 0.005, rel=1e-14)
    assert out.Xdot_last == pytest.approx(-0.9)


def test_advance_uses_both_stages():
    out = advance(ShiftState(), (1.0, 3.0), 0.5, lambda U, X: U)
    assert out.X == pytest.approx(0.5 * 0.5 * (1.0 + 3.0))


def test_speed_bound():
    assert speed_bound(BURGERS, PAIR, 1.0) == pytest.approx(1.0)
    q = power_flux(4)
    assert speed_bound(q, entropy_pair(q), 1.0) >= 4 * 0.5  # at least the diagonal value A'(u) for u = 1/2
