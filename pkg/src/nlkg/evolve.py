"""Nonlinear evolution: Strang splitting and the Duhamel/Picard fixed point.

Both substeps of the splitting are exact: the linear part is the modal
rotation of :mod:`nlkg.propagator`, and the nonlinear sub-flow freezes u and
shifts ``v`` by ``tau * sign * |u|^{p-1} u``.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .propagator import flow_modal
from .spectral import FieldState, Grid, fft, ifft

log = logging.getLogger(__name__)


class Status(enum.Enum):
    OK = "OK"
    BLOWUP = "BLOWUP"
    NONCONTRACTIVE = "NONCONTRACTIVE"
    HORIZON_REFUSED = "HORIZON_REFUSED"


@dataclass(frozen=True)
class EvolveConfig:
    p: float
    sign: int = 1
    dt: float = 0.01
    T: float = 1.0
    snapshot_stride: int = 1
    nonlinear: bool = True
    blowup_ceiling: float = 1e6

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f"p must be >= 2, got {self.p}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if not (self.dt > 0 and self.T > 0):
            raise ValueError("dt and T must be positive")
        if self.dt > self.T:
            raise ValueError("dt must not exceed T")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be a positive integer")

    @property
    def n_steps(self) -> int:
        n = round(self.T / self.dt)
        if not math.isclose(n * self.dt, self.T, rel_tol=1e-9):
            raise ValueError(f"T={self.T} is not a multiple of dt={self.dt}")
        return n

    @property
    def snapshot_dt(self) -> float:
        return self.dt * self.snapshot_stride


@dataclass
class Trajectory:
    states: list[FieldState]
    config: EvolveConfig
    status: Status = Status.OK
    info: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])

    @property
    def grid(self) -> Grid:
        return self.states[0].grid

    def __len__(self) -> int:
        return len(self.states)

    def final(self) -> FieldState:
        return self.states[-1]


def nonlinearity(u, p: float, sign: int):
    """``sign * |u|^{p-1} u``, evaluated pointwise."""
    u = np.asarray(u)
    if p == 3:
        return sign * (u.real**2 + u.imag**2) * u
    return sign * np.abs(u) ** (p - 1) * u


def _kick(u, v, tau, config: EvolveConfig):
    if not config.nonlinear:
        return v
    return v + tau * nonlinearity(u, config.p, config.sign)


def strang_step(state: FieldState, dt: float, config: EvolveConfig) -> FieldState:
    """Half kick, exact linear flow over dt, half kick."""
    grid = state.grid
    v = _kick(state.u, state.v, dt / 2, config)
    u_hat, v_hat = flow_modal(grid, fft(state.u), fft(v), dt)
    u, v = ifft(u_hat), ifft(v_hat)
    v = _kick(u, v, dt / 2, config)
    out = FieldState(grid, state.time + dt, u, v)
    if not out.is_finite():
        raise FloatingPointError(f"non-finite values after step to t={out.time:.6g}")
    return out


def evolve(initial: FieldState, config: EvolveConfig) -> Trajectory:
    """Repeated Strang steps with snapshots every ``snapshot_stride`` steps."""
    from .diagnostics import conserved_energy  # local: diagnostics imports this module

    if not initial.is_finite():
        raise ValueError("initial data must be finite")
    n_steps = config.n_steps
    state = initial
    states = [state]
    status = Status.OK
    for step in range(1, n_steps + 1):
        state = strang_step(state, config.dt, config)
        if float(np.abs(state.u).max(initial=0.0)) > config.blowup_ceiling:
            log.warning("sup|u| exceeded %g at t=%.4g", config.blowup_ceiling, state.time)
            states.append(state)
            status = Status.BLOWUP
            break
        if step % config.snapshot_stride == 0 or step == n_steps:
            states.append(state)
    traj = Trajectory(states, config, status)
    e0 = conserved_energy(states[0], config.p, config.sign if config.nonlinear else 0)
    e1 = conserved_energy(states[-1], config.p, config.sign if config.nonlinear else 0)
    traj.info["energy_initial"] = e0
    traj.info["energy_final"] = e1
    traj.info["energy_drift"] = abs(e1 - e0) / abs(e0) if e0 else abs(e1 - e0)
    return traj


# --- Picard / Duhamel --------------------------------------------------------


def _duhamel(grid: Grid, f_hat, g_hat, times, forcing, config: EvolveConfig, want_v: bool):
    """Free flow of (f, g) plus the trapezoid Duhamel integral of the forcing.

    ``forcing(i)`` returns the physical-space nonlinearity at ``times[i]``.
    Written in the pulled-back form ``e^{tH}[(f, g) + int_0^t e^{-sH}(0, F(s)) ds]``
    so only a running modal sum is kept.
    """
    acc_u = np.zeros(grid.shape, dtype=complex)
    acc_v = np.zeros(grid.shape, dtype=complex)
    prev = None
    us, vs = [], []
    for i, t in enumerate(times):
        if config.nonlinear:
            gu, gv = flow_modal(grid, 0.0, fft(forcing(i)), -t)
            if prev is not None:
                h = t - times[i - 1]
                acc_u += 0.5 * h * (prev[0] + gu)
                acc_v += 0.5 * h * (prev[1] + gv)
            prev = (gu, gv)
        u_hat, v_hat = flow_modal(grid, f_hat + acc_u, g_hat + acc_v, t)
        us.append(ifft(u_hat))
        if want_v:
            vs.append(ifft(v_hat))
    return us, vs


def _snapshot_times(config: EvolveConfig) -> np.ndarray:
    n_snap = config.n_steps // config.snapshot_stride
    if n_snap * config.snapshot_stride != config.n_steps:
        raise ValueError("T/dt must be a multiple of snapshot_stride for Duhamel quadrature")
    return np.arange(n_snap + 1) * config.snapshot_dt


def picard_map(data: FieldState, candidate: Trajectory, config: EvolveConfig) -> Trajectory:
    """One application of the Duhamel map to a candidate trajectory."""
    times = _snapshot_times(config)
    if len(candidate) != len(times) or not np.allclose(candidate.times - candidate.times[0], times, atol=1e-9):
        raise ValueError("candidate snapshots do not match the configured stride")
    grid = data.grid
    us, vs = _duhamel(
        grid, fft(data.u), fft(data.v), times,
        lambda i: nonlinearity(candidate.states[i].u, config.p, config.sign), config, want_v=True,
    )
    return Trajectory([FieldState(grid, data.time + t, u, v) for t, u, v in zip(times, us, vs)], config)


def lp_lq_norm(grid: Grid, times, fields, q: float, rho: float) -> float:
    """Discrete ``L^q_t L^rho_{x,y}`` norm with trapezoid weights in t."""
    from .diagnostics import time_norm, joint_lebesgue

    return time_norm(times, [joint_lebesgue(grid, f, rho) for f in fields], q)


@dataclass
class PicardResult:
    trajectory: Trajectory
    ratios: list[float]
    increments: list[float]
    iterations: int
    status: Status
    converged: bool


def picard_solve(data: FieldState, config: EvolveConfig, tol: float = 1e-10, max_iter: int = 50) -> PicardResult:
    """Iterate the Duhamel map from the free evolution until the update is below ``tol``.

    Increments are measured in the discrete ``L^p_t L^{2p}_{x,y}`` norm, relative
    to the current iterate.  Three consecutive ratios above one stop the
    iteration with NONCONTRACTIVE.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid = data.grid
    times = _snapshot_times(config)
    p, rho = config.p, 2 * config.p
    f_hat, g_hat = fft(data.u), fft(data.v)
    current, _ = _duhamel(grid, f_hat, g_hat, times, None, replace(config, nonlinear=False), want_v=False)
    increments: list[float] = []
    ratios: list[float] = []
    status, converged, above = Status.OK, False, 0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        nxt, _ = _duhamel(
            grid, f_hat, g_hat, times,
            lambda i: nonlinearity(current[i], config.p, config.sign), config, want_v=False,
        )
        inc = lp_lq_norm(grid, times, (a - b for a, b in zip(nxt, current)), p, rho)
        size = lp_lq_norm(grid, times, nxt, p, rho)
        if increments:
            ratio = inc / increments[-1] if increments[-1] > 0 else 0.0
            ratios.append(ratio)
            above = above + 1 if ratio > 1 else 0
        increments.append(inc)
        current = nxt
        log.info("picard iter %d: increment %.3e (relative %.3e)", iterations, inc, inc / size if size else 0.0)
        if inc <= tol * size:
            converged = True
            break
        if above >= 3:
            status = Status.NONCONTRACTIVE
            break
    # rebuild the full (u, v) trajectory from the last iterate
    us, vs = _duhamel(
        grid, f_hat, g_hat, times,
        lambda i: nonlinearity(current[i], config.p, config.sign), config, want_v=True,
    )
    traj = Trajectory([FieldState(grid, data.time + t, u, v) for t, u, v in zip(times, us, vs)], config, status)
    return PicardResult(traj, ratios, increments, iterations, status, converged)
