import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fractal_burgers.errors import ConfigurationError, DomainError, IntegrationError
from fractal_burgers.fractional_operator import FarField, Grid1D, build_operator
from fractal_burgers.profiles import evaluate_scaled
from fractal_burgers.solver import (
    FluxSpec,
    SolverConfig,
    State,
    _stages,
    boundary_mass_rate,
    max_norm,
    positive_slope_l2,
    power_flux,
    rhs,
    solve,
    stable_timestep,
    step,
)


def _setup(L=10.0, N=256, alpha=1.5, ul=1.0, ur=-1.0):
    g = Grid1D(L, N)
    return g, build_operator(g, alpha, FarField(ul, ur))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        SolverConfig(epsilon=-1, t_end=1, alpha=1.5)
    with pytest.raises(ConfigurationError):
        SolverConfig(epsilon=0.1, t_end=1, alpha=1.5, cfl=1.5)
    with pytest.raises(ConfigurationError):
        SolverConfig(epsilon=0.1, t_end=1, alpha=1.5, reconstruction="weno")
    with pytest.raises(ConfigurationError):
        SolverConfig(epsilon=0.1, t_end=1, alpha=2.0)
    assert SolverConfig(epsilon=0.1, t_end=1, alpha=1.25).beta == pytest.approx(4.0)


def test_flux_must_be_convex():
    with pytest.raises(DomainError):
        FluxSpec(A=np.sin, A_prime=np.cos, A_double_prime_min=-1.0)
    with pytest.raises(DomainError):
        power_flux(3)


def test_timestep_diffusive_bound_binds_at_rest():
    g, op = _setup(ul=0.0, ur=0.0)
    cfg = SolverConfig(epsilon=0.3, t_end=1, alpha=1.5, cfl=0.5)
    dt = stable_timestep(State(0, np.zeros(g.N), g), cfg, op)
    assert dt == pytest.approx(0.5 * g.h**1.5 / (0.3 * op.row_bound), rel=1e-14)


def test_timestep_inviscid_is_cfl_h():
    g, op = _setup()
    cfg = SolverConfig(epsilon=0.0, t_end=1, alpha=1.5, cfl=0.8)
    u = np.where(g.x < 0, 1.0, -1.0)
    assert stable_timestep(State(0, u, g), cfg, op) == pytest.approx(0.8 * g.h, rel=1e-14)


def test_timestep_scales_like_h_alpha():
    cfg = SolverConfig(epsilon=1.0, t_end=1, alpha=1.5)
    dts = []
    for N in (256, 512):
        g, op = _setup(N=N, ul=0.0, ur=0.0)
        dts.append(stable_timestep(State(0, np.zeros(N), g), cfg, op))
    # K_alpha = h^alpha max|M_ii| is essentially h-independent, so the ratio is ~2^alpha
    assert dts[0] / dts[1] == pytest.approx(2**1.5, rel=1e-3)


@pytest.mark.parametrize("scheme", ["ssp_rk2", "imex"])
def test_constants_are_steady(scheme):
    g, op = _setup(ul=0.7, ur=0.7)
    cfg = SolverConfig(epsilon=0.5, t_end=1, alpha=1.5, scheme=scheme)
    s = step(State(0.0, np.full(g.N, 0.7), g), cfg, op)
    assert np.max(np.abs(s.u - 0.7)) < 1e-14


def test_inviscid_stationary_shock():
    g, op = _setup(N=200)
    cfg = SolverConfig(epsilon=0.0, t_end=2.0, alpha=1.5)
    u0 = np.where(g.x < 0, 1.0, -1.0)
    final, _ = solve(u0, cfg, op)
    # only the cells next to the jump may move, by O(1) at most
    assert np.sum(np.abs(final.u - u0)) * g.h <= 3 * g.h


def test_linear_advection_order():
    linear = FluxSpec(A=lambda u: np.asarray(u, float) * 1.0, A_prime=lambda u: np.ones_like(np.asarray(u, float)),
                      A_double_prime_min=0.0, name="linear")
    errs = []
    for N in (200, 400, 800):
        g, op = _setup(L=5.0, N=N, ul=0.0, ur=0.0)
        cfg = SolverConfig(epsilon=0.0, t_end=1.0, alpha=1.5, flux=linear, cfl=0.4)
        f = lambda x: np.exp(-4 * x**2)
        final, _ = solve(f(g.x), cfg, op)
        errs.append(np.sum(np.abs(final.u - f(g.x - 1.0))) * g.h)
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.3), orders


def test_zero_duration_returns_initial_datum():
    g, op = _setup()
    u0 = -np.tanh(g.x)
    final, series = solve(u0, SolverConfig(epsilon=0.1, t_end=0.0, alpha=1.5), op)
    assert np.array_equal(final.u, u0) and final.t == 0.0
    assert list(series["t"]) == [0.0]


def test_positive_slope_l2_formula():
    g = Grid1D(1.0, 32)
    assert positive_slope_l2(State(0, -g.x, g)) == 0.0
    u = np.zeros(g.N)
    u[10:] = g.h  # one cell pair with slope 1
    assert positive_slope_l2(State(0, u, g)) == pytest.approx(np.sqrt(g.h), rel=1e-14)


@pytest.mark.parametrize("scheme", ["ssp_rk2", "imex"])
def test_mass_bookkeeping_per_step(scheme, rng):
    g, op = _setup(N=256)
    cfg = SolverConfig(epsilon=0.2, t_end=1, alpha=1.5, scheme=scheme)
    u = np.where(g.x < 0, 1.0, -1.0) + 0.3 * np.exp(-(g.x - 2) ** 2) * rng.uniform(0.5, 1.0)
    for _ in range(20):
        dt = stable_timestep(State(0, u, g), cfg, op)
        u_new, stages = _stages(u, op, cfg, dt)
        # both schemes combine the stage rates with weights 1/2, 1/2
        expected = 0.5 * dt * sum(boundary_mass_rate(s, op, cfg) for s in stages)
        assert abs((u_new.sum() - u.sum()) * g.h - expected) <= 1e-10
        u = u_new


def test_nonfinite_values_raise():
    g, op = _setup()
    u = np.zeros(g.N)
    u[5] = np.nan
    with pytest.raises(IntegrationError):
        step(State(0.0, u, g), SolverConfig(epsilon=0.1, t_end=1, alpha=1.5), op, dt=1e-3)


def test_imex_agrees_with_explicit():
    g, op = _setup(N=256)
    u0 = -np.tanh(g.x) + 0.2 * np.exp(-(g.x + 3) ** 2)
    a, _ = solve(u0, SolverConfig(epsilon=0.2, t_end=0.5, alpha=1.5, scheme="ssp_rk2", cfl=0.1), op)
    b, _ = solve(u0, SolverConfig(epsilon=0.2, t_end=0.5, alpha=1.5, scheme="imex", cfl=0.1), op)
    assert np.sqrt(np.sum((a.u - b.u) ** 2) * g.h) < 2e-3


def test_rhs_zero_for_constant_and_power_flux():
    g, op = _setup(ul=0.4, ur=0.4)
    cfg = SolverConfig(epsilon=0.2, t_end=1, alpha=1.5, flux=power_flux(4))
    assert np.max(np.abs(rhs(np.full(g.N, 0.4), op, cfg))) < 1e-13


def test_layer_stays_close_to_itself(profile15):
    # the scaled layer is (nearly) a discrete steady state when it is resolved
    eps = 0.5 ** 0.5  # eps^beta = 0.5 for alpha = 1.5
    g, op = _setup(L=20.0, N=1024)
    u0 = evaluate_scaled(profile15, eps, g.x)
    final, _ = solve(u0, SolverConfig(epsilon=eps, t_end=0.5, alpha=1.5), op)
    err = np.sqrt(np.sum((final.u - u0) ** 2) * g.h)
    assert err < 5 * g.h


@settings(max_examples=12, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), amp=st.floats(0.05, 0.6), scheme=st.sampled_from(["ssp_rk2", "imex"]))
def test_monitors_non_increasing(seed, amp, scheme):
    r = np.random.default_rng(seed)
    g, op = _setup(L=10.0, N=256)
    u0 = np.where(g.x < 0, 1.0, -1.0)
    for c in r.uniform(-6, 6, 3):
        u0 = u0 + amp * r.choice([-1, 1]) * np.exp(-((g.x - c) / r.uniform(0.5, 1.5)) ** 2)
    cfg = SolverConfig(epsilon=float(r.uniform(0.05, 0.5)), t_end=0.3, alpha=float(r.uniform(1.2, 1.8)), scheme=scheme)
    _, s = solve(u0, cfg, op)
    assert np.all(np.diff(s["max_norm"]) <= 1e-8)
    assert np.all(np.diff(s["positive_slope_l2"]) <= 1e-6)
    assert s["max_norm"][-1] <= max_norm(State(0, u0, g)) + 1e-8


def test_max_norm_counts_far_field():
    g = Grid1D(1.0, 16)
    st_ = State(0.0, np.full(16, 0.5), g)
    assert max_norm(st_) == 0.5
    assert max_norm(st_, FarField(0.9, -0.2)) == 0.9
    # a layer that has not reached its end states inside the box: the solver's
    # sup-norm series includes the exterior and therefore stays flat
    g, op = _setup(L=3.0, N=256)
    u0 = 0.9 * -np.tanh(g.x)
    _, s = solve(u0, SolverConfig(epsilon=0.5, t_end=0.2, alpha=1.5), op)
    assert s["max_norm"][0] == 1.0 and np.all(np.diff(s["max_norm"]) <= 1e-8)
