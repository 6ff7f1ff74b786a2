"""Controller tests: demodulation oracle by quadrature, washout filter
behavior, clamping, warm-up, and fault handling."""

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flapesc import controller as ctrl
from flapesc.errors import MeasurementFaultError


def period_average_xi(params, z_hat, z_d, nodes=64):
    """Independent Gauss-Legendre quadrature of the demodulated signal for a
    frozen plant: z(t) = z_hat + a cos(omega t), J = (z - z_d)^2."""
    T = 2.0 * math.pi / params.omega
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * T * (x + 1.0)
    total = 0.0
    for ti, wi in zip(t, w):
        z = z_hat + params.a * math.cos(params.omega * ti)
        J = (z - z_d) ** 2
        total += wi * ctrl.demodulate(J, ti, params)
    return (0.5 * T * total) / T


def test_demodulation_matches_gradient_oracle():
    # period-averaged xi = (c a / 2) * J'(z_hat) for a quadratic objective
    rng = random.Random(20260823)
    for _ in range(10):
        params = ctrl.EscParams(omega=rng.uniform(50, 150),
                                k=0.0,
                                a=rng.uniform(0.1, 1.0),
                                c=rng.uniform(0.5, 2.0))
        z_hat = rng.uniform(-50, 50)
        z_d = rng.uniform(-50, 50)
        avg = period_average_xi(params, z_hat, z_d)
        expected = (params.c * params.a / 2.0) * 2.0 * (z_hat - z_d)
        assert abs(avg - expected) <= 1e-9 * max(1.0, abs(expected))


def test_hpf_rejects_dc():
    # constant objective: washout output decays as e^{-h t}
    params = ctrl.EscParams(omega=120.0, k=0.5, a=0.7, c=1.1, h=0.2,
                            hpf_enabled=True)
    state = ctrl.reset(params)
    J0 = 1000.0
    dt = 1e-3
    J_hp = J0
    for _ in range(25000):
        state, J_hp = ctrl.hpf_update(state, J0, params.h, dt)
    assert abs(J_hp) <= 0.007 * J0
    # exact discretization: matches the closed form, not just the bound
    assert math.isclose(J_hp, J0 * math.exp(-0.2 * 25.0), rel_tol=1e-9)


def test_hpf_disabled_passes_through():
    state = ctrl.EscState()
    state2, J_hp = ctrl.hpf_update(state, 42.0, 0.2, 1e-3, enabled=False)
    assert J_hp == 42.0
    assert state2.eta == 0.0


def test_demodulate_spot_value():
    params = ctrl.EscParams(omega=100.0, k=0.003, a=0.7, c=1.095)
    t = 0.0137
    assert math.isclose(ctrl.demodulate(3.5, t, params),
                        1.095 * 3.5 * math.cos(100.0 * t), rel_tol=1e-15)


def test_reset_defaults_to_midpoint():
    params = ctrl.EscParams(omega=100, k=0.1, a=0.1, c=1.0,
                            m_min=10.0, m_max=30.0)
    assert ctrl.reset(params).m_hat == 20.0


def test_reset_clamps_out_of_range_initial(caplog):
    params = ctrl.EscParams(omega=100, k=0.1, a=0.1, c=1.0,
                            m_min=0.0, m_max=1.0, m_init=5.0)
    with caplog.at_level("WARNING"):
        state = ctrl.reset(params)
    assert state.m_hat == 1.0
    assert any("clamped" in rec.message for rec in caplog.records)


def test_nonfinite_measurement_raises():
    params = ctrl.EscParams(omega=100, k=0.1, a=0.1, c=1.0)
    state = ctrl.reset(params)
    with pytest.raises(MeasurementFaultError):
        ctrl.esc_step(state, float("nan"), 1e-3, params)
    with pytest.raises(MeasurementFaultError):
        ctrl.esc_step(state, float("inf"), 1e-3, params)


def test_conditioning_warmup_holds_command():
    # with gradient conditioning, adaptation waits one full dither period
    params = ctrl.EscParams(omega=100.0, k=1.0, a=0.1, c=1.0,
                            m_min=0.0, m_max=100.0, m_init=38.0,
                            grad_avg=True, t_lead=2.0, lead_pole=15.0)
    state = ctrl.reset(params)
    dt = 1e-3
    n_period = int(round(2.0 * math.pi / (params.omega * dt)))
    for i in range(n_period):
        state, _ = ctrl.esc_step(state, 100.0 + i, dt, params)
        assert state.m_hat == 38.0
    state, _ = ctrl.esc_step(state, 200.0, dt, params)
    assert state.m_hat != 38.0


def test_param_validation():
    good = dict(omega=100.0, k=0.1, a=0.1, c=1.0)
    ctrl.EscParams(**good).validate()
    with pytest.raises(ValueError):
        ctrl.EscParams(**{**good, "omega": 0.0}).validate()
    with pytest.raises(ValueError):
        ctrl.EscParams(**{**good, "c": 0.0}).validate()
    with pytest.raises(ValueError):
        ctrl.EscParams(**{**good, "k": -1.0}).validate()
    with pytest.raises(ValueError):
        ctrl.EscParams(**good, hpf_enabled=True, h=0.0).validate()
    with pytest.raises(ValueError):
        ctrl.EscParams(**good, m_min=1.0, m_max=1.0).validate()
    with pytest.raises(ValueError):
        ctrl.EscParams(**good, sign=0).validate()


@settings(max_examples=60, deadline=None)
@given(J=st.floats(0, 1e6), k=st.floats(0, 10), a=st.floats(0, 2),
       m0=st.floats(0, 1), steps=st.integers(1, 50))
def test_command_always_in_bounds(J, k, a, m0, steps):
    params = ctrl.EscParams(omega=100.0, k=k, a=a, c=1.0,
                            m_min=0.0, m_max=1.0, m_init=m0)
    state = ctrl.reset(params)
    for _ in range(steps):
        state, m = ctrl.esc_step(state, J, 1e-3, params)
        assert 0.0 <= m <= 1.0
        assert 0.0 <= state.m_hat <= 1.0


def test_sign_flips_adaptation_direction():
    base = dict(omega=100.0, k=0.5, a=0.0, c=1.0, m_min=0.0, m_max=10.0,
                m_init=5.0)
    up = ctrl.reset(ctrl.EscParams(**base, sign=1))
    dn = ctrl.reset(ctrl.EscParams(**base, sign=-1))
    up, _ = ctrl.esc_step(up, 7.0, 1e-3, ctrl.EscParams(**base, sign=1))
    dn, _ = ctrl.esc_step(dn, 7.0, 1e-3, ctrl.EscParams(**base, sign=-1))
    assert math.isclose(up.m_hat - 5.0, -(dn.m_hat - 5.0), rel_tol=1e-12)
