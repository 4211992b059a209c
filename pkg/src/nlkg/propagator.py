"""Exact linear Klein-Gordon flows, mode by mode.

Each joint mode (xi, n) evolves as a flat oscillator with frequency
``omega = sqrt(m^2 + lambda_n + |xi|^2)``; ``linear_flow`` is the group
``e^{tH}`` acting on ``(u, du/dt)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .spectral import (
    DomainSpec,
    FieldState,
    Grid,
    fft,
    ifft,
    make_grid,
)


def mode_flow(u0, v0, lam, xi_sq, t, m_sq=1.0):
    """Flow one mode (or arrays of modes) of ``u'' + (m^2 + lam + xi^2) u = 0`` for time t."""
    w2 = m_sq + np.asarray(lam) + np.asarray(xi_sq)
    if np.any(w2 <= 0):
        raise ValueError("m_sq + lambda + xi^2 must be positive")
    omega = np.sqrt(w2)
    c, s = np.cos(omega * t), np.sin(omega * t)
    return c * u0 + (s / omega) * v0, -omega * s * u0 + c * v0


def flow_modal(grid: Grid, u_hat, v_hat, t: float, m_sq: float = 1.0):
    """Apply ``e^{tH}`` to modal coefficients (any leading shape matching the grid)."""
    omega = grid.omega(m_sq)
    c, s = np.cos(omega * t), np.sin(omega * t)
    return c * u_hat + (s / omega) * v_hat, -omega * s * u_hat + c * v_hat


def linear_flow(state: FieldState, t: float, m_sq: float = 1.0) -> FieldState:
    u_hat, v_hat = flow_modal(state.grid, fft(state.u), fft(state.v), t, m_sq)
    return FieldState(state.grid, state.time + t, ifft(u_hat), ifft(v_hat))


def inverse_wave(state: FieldState, t: float) -> FieldState:
    """``V(t) = e^{-tH}(u, du/dt)(t)``: pull a state back along the free flow."""
    return linear_flow(state, -t)


def energy_norm_modal(grid: Grid, u_hat, v_hat) -> float:
    weight = 1.0 + grid.lam + grid.xi_sq
    total = np.sum(weight * np.abs(u_hat) ** 2) + np.sum(np.abs(v_hat) ** 2)
    return math.sqrt(grid.volume * float(total))


def y_multiplier(grid: Grid, gamma: float) -> np.ndarray:
    return (1.0 + grid.lam) ** (gamma / 2)


# --- mass rescaling ----------------------------------------------------------


def _as_ratio(x: float, max_den: int = 64) -> Fraction:
    frac = Fraction(x).limit_denominator(max_den)
    if not math.isclose(float(frac), x, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError(f"sqrt(lambda) = {x} is not a simple rational; off-lattice rescaling is refused")
    return frac


@dataclass(frozen=True)
class RescaledTrajectory:
    times: tuple[float, ...]
    states: tuple[FieldState, ...]
    lam: float


def _rescale_state_same_box(state: FieldState, grid: Grid, scale: Fraction, rel_cutoff: float) -> FieldState:
    """u(scale * x) on the same box: mode m moves to m * scale, which must be an integer inside the lattice."""
    out = []
    for arr, factor in ((state.u, 1.0), (state.v, float(scale))):
        a_hat = fft(arr, axes=grid.x_axes)
        b_hat = np.zeros_like(a_hat)
        amp = np.abs(a_hat)
        thresh = rel_cutoff * (amp.max() if amp.size else 0.0)
        for idx in zip(*np.nonzero(amp > thresh)):
            target, sign = [], 1
            for ax in range(grid.d):
                n = grid.spec.nx[ax]
                m = idx[ax] if idx[ax] < n // 2 else idx[ax] - n
                mm = Fraction(m) * scale
                if mm.denominator != 1 or not -n // 2 <= mm < n // 2:
                    raise ValueError(f"mode {m} maps off the lattice under scale {scale}")
                target.append(int(mm) % n)
                # samples start at -L/2, so each mode carries the phase (-1)^m
                sign *= -1 if (m - int(mm)) % 2 else 1
            b_hat[tuple(target) + idx[grid.d:]] += sign * a_hat[idx]
        out.append(factor * ifft(b_hat, axes=grid.x_axes))
    return FieldState(grid, state.time / float(scale), out[0], out[1])


def rescale_solution(states, lam: float, same_box: bool = False, rel_cutoff: float = 1e-13) -> RescaledTrajectory:
    """``u_lam(t, x) = u(sqrt(lam) t, sqrt(lam) x)``, ``v_lam = sqrt(lam) v(...)``.

    By default the result lives on the box contracted by ``sqrt(lam)`` with the
    same number of points, where the map is an exact relabelling of samples.
    With ``same_box=True`` the field is re-expanded on the original lattice,
    which is only possible when every active mode lands on a lattice point.
    Only the x-variables are rescaled.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    states = list(states)
    if not states:
        raise ValueError("empty trajectory")
    root = math.sqrt(lam)
    grid = states[0].grid
    if same_box:
        scale = _as_ratio(root)
        out = [_rescale_state_same_box(s, grid, scale, rel_cutoff) for s in states]
    else:
        spec = grid.spec
        new_spec = DomainSpec(
            spec.d, spec.k, tuple(L / root for L in spec.box_lengths), spec.torus_lengths, spec.nx, spec.ny
        )
        new_grid = make_grid(new_spec)
        out = [FieldState(new_grid, s.time / root, s.u.copy(), root * s.v) for s in states]
    return RescaledTrajectory(tuple(s.time for s in out), tuple(out), lam)
