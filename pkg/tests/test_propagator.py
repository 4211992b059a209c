import math

import numpy as np
import pytest

from nlkg import spectral as sp
from nlkg.diagnostics import energy_norm, sobolev_y_state
from nlkg.propagator import inverse_wave, linear_flow, mode_flow, rescale_solution
from nlkg.spectral import FieldState

from conftest import grid_for, random_state


def rk4_oscillator(u0, v0, w2, t, dt=1e-5):
    """Integrate u'' = -w2 u as a first-order system with classical RK4."""
    n = max(1, round(t / dt))
    h = t / n
    y = np.array([u0, v0], dtype=complex)

    def f(y):
        return np.array([y[1], -w2 * y[0]])

    for _ in range(n):
        k1 = f(y)
        k2 = f(y + h / 2 * k1)
        k3 = f(y + h / 2 * k2)
        k4 = f(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def test_mode_flow_unit_oscillator():
    for t in (0.0, 0.3, 2.0, -1.1):
        u, v = mode_flow(1.0, 0.0, 0.0, 0.0, t)
        assert abs(u - math.cos(t)) < 1e-15 and abs(v + math.sin(t)) < 1e-15


def test_mode_flow_identity_at_zero():
    u, v = mode_flow(0.3 - 1j, 2.0 + 0.5j, 4.0, 7.0, 0.0)
    assert u == 0.3 - 1j and v == 2.0 + 0.5j


def test_mode_flow_matches_rk4():
    u0, v0 = 1 + 2j, 0.3
    u, v = mode_flow(u0, v0, 5.0, 2.0, 0.7)
    ref = rk4_oscillator(u0, v0, 8.0, 0.7)
    assert abs(u - ref[0]) < 1e-8 and abs(v - ref[1]) < 1e-8


def test_mode_flow_rejects_nonpositive_frequency():
    with pytest.raises(ValueError):
        mode_flow(1.0, 0.0, 0.0, 0.0, 1.0, m_sq=0.0)


def test_linear_flow_zero_time(rng):
    g = grid_for(d=2, k=1, L=10.0, nx=16, ny=4)
    s = random_state(g, rng)
    out = linear_flow(s, 0.0)
    assert np.abs(out.u - s.u).max() < 1e-12 * np.abs(s.u).max()
    assert np.abs(out.v - s.v).max() < 1e-12 * np.abs(s.v).max()


def test_single_mode_stays_single_mode():
    g = grid_for(d=1, k=1, L=2 * np.pi, ell=2 * np.pi, nx=16, ny=8)
    u = np.exp(1j * (3 * g.x[0] + 2 * g.y[0])) * 0.5
    s = FieldState(g, 0.0, u, np.zeros(g.shape))
    out = sp.forward_transform(linear_flow(s, 1.3))
    w = math.sqrt(1 + 4 + 9)
    coeff = 0.5 * np.exp(1j * 3 * np.pi)  # samples start at x = -pi
    assert abs(out.u_hat[3, 2] - coeff * math.cos(1.3 * w)) < 1e-14
    assert abs(out.v_hat[3, 2] + coeff * w * math.sin(1.3 * w)) < 1e-13
    out.u_hat[3, 2] = out.v_hat[3, 2] = 0
    assert np.abs(out.u_hat).max() < 1e-14 and np.abs(out.v_hat).max() < 1e-14


def test_energy_isometry_group_law_inverse(rng):
    g = grid_for(d=2, k=1, L=12.0, ell=3.0, nx=16, ny=8)
    for _ in range(5):
        s = random_state(g, rng)
        e0 = energy_norm(s)
        a = linear_flow(s, 0.8)
        assert abs(energy_norm(a) - e0) <= 1e-11 * e0
        b = linear_flow(linear_flow(s, 0.8), 1.7)
        c = linear_flow(s, 2.5)
        assert energy_norm(FieldState(g, 0, b.u - c.u, b.v - c.v)) <= 1e-11 * e0
        back = inverse_wave(a, 0.8)
        assert energy_norm(FieldState(g, 0, back.u - s.u, back.v - s.v)) <= 1e-11 * e0


def test_free_solution_has_constant_pullback(rng):
    g = grid_for(d=1, k=2, L=9.0, nx=16, ny=4)
    s = random_state(g, rng)
    e0 = energy_norm(s)
    for t in (0.5, 3.0, 11.0):
        pulled = inverse_wave(linear_flow(s, t), t)
        assert energy_norm(FieldState(g, 0, pulled.u - s.u, pulled.v - s.v)) <= 1e-10 * e0


def test_y_sobolev_commutes_with_flow(rng):
    g = grid_for(d=1, k=2, L=9.0, ell=2.0, nx=16, ny=8)
    s = random_state(g, rng)
    a = linear_flow(sobolev_y_state(s, 1.1), 0.9)
    b = sobolev_y_state(linear_flow(s, 0.9), 1.1)
    scale = np.abs(a.u).max()
    assert np.abs(a.u - b.u).max() <= 1e-12 * scale


# --- rescaling ---------------------------------------------------------------


def _flat_solution(L=64.0, nx=512, times=(0.0, 0.5, 1.0)):
    g = grid_for(d=1, k=1, L=L, ell=2 * np.pi, nx=nx, ny=4)
    u0 = np.exp(-g.x[0] ** 2 / 4) * np.ones(g.shape)
    v0 = 0.5 * g.x[0] * np.exp(-g.x[0] ** 2 / 4) * np.ones(g.shape)
    s0 = FieldState(g, 0.0, u0, v0)
    return g, [linear_flow(s0, t) for t in times]


def test_rescale_identity():
    g, states = _flat_solution()
    out = rescale_solution(states, 1.0)
    for a, b in zip(states, out.states):
        assert a.time == b.time and np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)


def test_rescale_same_box_moves_modes():
    g = grid_for(d=1, k=1, L=2 * np.pi, nx=32, ny=4)
    u = np.exp(4j * g.x[0]) * np.ones(g.shape)
    s = FieldState(g, 0.0, u, np.zeros(g.shape))
    out = rescale_solution([s], 0.25, same_box=True).states[0]
    assert np.abs(out.u - np.exp(2j * g.x[0])).max() < 1e-13
    odd = FieldState(g, 0.0, np.exp(3j * g.x[0]) * np.ones(g.shape), np.zeros(g.shape))
    with pytest.raises(ValueError):
        rescale_solution([odd], 0.25, same_box=True)
    with pytest.raises(ValueError):
        rescale_solution([s], 2.0, same_box=True)
    with pytest.raises(ValueError):
        rescale_solution([s], -1.0)


def _l2(g, a):
    return sp.l2_norm(g, a) / math.sqrt(g.vol_y)


def _hdot1(g, a):
    return math.sqrt(g.vol_x * float(np.sum(g.xi_sq * np.abs(sp.fft(a, axes=g.x_axes)) ** 2)) / a.shape[-1])


def test_rescale_norm_bookkeeping():
    g, states = _flat_solution()
    lam, d = 4.0, 1
    out = rescale_solution(states, lam)
    g2 = out.states[0].grid
    f, f_l = states[0].u, out.states[0].u
    gg, gg_l = states[0].v, out.states[0].v
    assert abs(_l2(g2, f_l) - lam ** (-d / 4) * _l2(g, f)) <= 1e-10 * _l2(g, f)
    assert abs(_hdot1(g2, f_l) - lam ** (0.5 - d / 4) * _hdot1(g, f)) <= 1e-10 * _hdot1(g, f)
    assert abs(_l2(g2, gg_l) - lam ** (0.5 - d / 4) * _l2(g, gg)) <= 1e-10 * _l2(g, gg)
