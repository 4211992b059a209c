"""Norms and the scattering measurement pipeline.

All spatial integrals use the rectangle rule with the grid measure; time
integrals use the composite trapezoid rule over the snapshot times.
Empirical constants are reported, never compared with a theoretical value.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .evolve import EvolveConfig, Trajectory, nonlinearity
from .propagator import energy_norm_modal, flow_modal, y_multiplier
from .spectral import FieldState, Grid, eigenvalues_torus, fft, ifft, l2_norm, mixed_lr_x_l2_y


class SpatialMode(enum.Enum):
    LRHO_XY = "Lrho_xy"
    LRHO_X_L2_Y = "Lrho_x_L2_y"
    H1XL2_ENERGY = "H1xL2_energy"
    HGAMMA_Y_WEIGHTED = "Hgamma_y_weighted"


@dataclass(frozen=True)
class NormSpec:
    q: float
    mode: SpatialMode = SpatialMode.LRHO_XY
    rho: float = 2.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("time exponent must be >= 1")
        if self.mode in (SpatialMode.LRHO_XY, SpatialMode.LRHO_X_L2_Y, SpatialMode.HGAMMA_Y_WEIGHTED) and self.rho < 1:
            raise ValueError("rho must be >= 1")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")


def joint_lebesgue(grid: Grid, f: np.ndarray, rho: float) -> float:
    a = np.abs(f)
    if rho == math.inf:
        return float(a.max(initial=0.0))
    if rho == 2:
        return math.sqrt(grid.cell_volume * float(np.sum(a * a)))
    return float((grid.cell_volume * np.sum(a**rho)) ** (1.0 / rho))


def lebesgue_norm(grid: Grid, f: np.ndarray, rho: float, mode=SpatialMode.LRHO_XY) -> float:
    mode = SpatialMode(mode)
    if not rho >= 1:
        raise ValueError("rho must be >= 1")
    if mode is SpatialMode.LRHO_XY:
        return joint_lebesgue(grid, f, rho)
    if mode is SpatialMode.LRHO_X_L2_Y:
        return mixed_lr_x_l2_y(grid, f, rho)
    raise ValueError(f"{mode.value} is not a Lebesgue mode")


def l2_y(grid: Grid, f: np.ndarray) -> np.ndarray:
    """``||f(x, .)||_{L^2_y}`` for every x."""
    return np.sqrt(math.prod(grid.dy) * np.sum(np.abs(f) ** 2, axis=grid.y_axes))


def linf_y(grid: Grid, f: np.ndarray) -> np.ndarray:
    return np.abs(f).max(axis=grid.y_axes)


def time_weights(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    w = np.zeros_like(t)
    if t.size > 1:
        h = np.diff(t)
        w[:-1] += h / 2
        w[1:] += h / 2
    return w


def time_norm(times, values, q: float) -> float:
    """Trapezoid ``(int |a(t)|^q dt)^{1/q}``; ``q = inf`` is the max."""
    values = np.asarray(values, dtype=float)
    if q == math.inf:
        return float(values.max(initial=0.0))
    return float(np.sum(time_weights(times) * values**q) ** (1.0 / q))


def sobolev_y_apply(grid: Grid, f: np.ndarray, gamma: float) -> np.ndarray:
    """``(1 - Delta_y)^{gamma/2} f`` as the modal multiplier ``(1 + lambda_n)^{gamma/2}``."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if gamma == 0:
        return np.array(f, dtype=complex)
    return ifft(fft(f, axes=grid.y_axes) * y_multiplier(grid, gamma), axes=grid.y_axes)


def sobolev_y_state(state: FieldState, gamma: float) -> FieldState:
    g = state.grid
    return FieldState(g, state.time, sobolev_y_apply(g, state.u, gamma), sobolev_y_apply(g, state.v, gamma))


def energy_norm(state: FieldState) -> float:
    """``(||u||_{H^1}^2 + ||v||_{L^2}^2)^{1/2}`` computed modally."""
    return energy_norm_modal(state.grid, fft(state.u), fft(state.v))


def conserved_energy(state: FieldState, p: float, sign: int) -> float:
    """``1/2(||v||^2 + ||grad u||^2 + ||u||^2) - sign/(p+1) ||u||_{p+1}^{p+1}``; sign 0 gives the free energy."""
    quadratic = 0.5 * energy_norm(state) ** 2
    if sign == 0:
        return quadratic
    potential = state.grid.cell_volume * float(np.sum(np.abs(state.u) ** (p + 1)))
    return quadratic - sign * potential / (p + 1)


def spatial_norm(state: FieldState, spec: NormSpec) -> float:
    grid = state.grid
    if spec.mode is SpatialMode.H1XL2_ENERGY:
        return energy_norm(state)
    if spec.mode is SpatialMode.HGAMMA_Y_WEIGHTED:
        return mixed_lr_x_l2_y(grid, sobolev_y_apply(grid, state.u, spec.gamma), spec.rho)
    return lebesgue_norm(grid, state.u, spec.rho, spec.mode)


def strichartz_norm(traj: Trajectory, q: float, mode=SpatialMode.LRHO_XY, rho: float = 2.0, gamma: float = 0.0) -> float:
    if not len(traj):
        raise ValueError("empty trajectory")
    spec = NormSpec(q, SpatialMode(mode), rho, gamma)
    values = [spatial_norm(s, spec) for s in traj.states]
    return time_norm(traj.times, values, q)


def partial_and_tail(times, values, q: float) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative ``||.||_{L^q([0, t_i])}`` and ``||.||_{L^q([t_i, T])}`` from trapezoid panels.

    Both are built from the same nonnegative panel contributions, so the first
    is nondecreasing and the second nonincreasing exactly.
    """
    t = np.asarray(times, dtype=float)
    a = np.asarray(values, dtype=float) ** q
    panels = np.diff(t) * (a[:-1] + a[1:]) / 2
    partial = np.concatenate([[0.0], np.cumsum(panels)])
    tail = np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]])
    return partial ** (1.0 / q), tail ** (1.0 / q)


# --- H^gamma algebra on the torus --------------------------------------------


@dataclass
class AlgebraReport:
    k: int
    gamma: float
    ny: int
    band: int
    trials: int
    max_ratio: float
    mean_ratio: float


def _hgamma_norms(coeffs: np.ndarray, weight: np.ndarray, vol: float) -> np.ndarray:
    axes = tuple(range(1, coeffs.ndim))
    return np.sqrt(vol * np.sum(weight * np.abs(coeffs) ** 2, axis=axes))


def algebra_ratio(f_hat: np.ndarray, g_hat: np.ndarray, gamma: float, torus_length: float = 2 * np.pi) -> np.ndarray:
    """``||fg||_{H^gamma} / (||f||_{H^gamma} ||g||_{H^gamma})`` for a batch of coefficient arrays.

    Axis 0 indexes pairs; the remaining axes are the torus modes (FFT order).
    The product is taken pointwise on the grid, so the caller keeps it alias-free.
    """
    shape = f_hat.shape[1:]
    k = len(shape)
    weight = (1.0 + eigenvalues_torus((torus_length,) * k, shape)) ** gamma
    vol = torus_length**k
    axes = tuple(range(1, k + 1))
    prod_hat = fft(ifft(f_hat, axes=axes) * ifft(g_hat, axes=axes), axes=axes)
    return _hgamma_norms(prod_hat, weight, vol) / (_hgamma_norms(f_hat, weight, vol) * _hgamma_norms(g_hat, weight, vol))


def algebra_check(k: int, gamma: float, trials: int = 1000, ny: int = 16, band: int = 3,
                  torus_length: float = 2 * np.pi, seed: int = 0, batch: int = 500) -> AlgebraReport:
    """Max of ``||fg||_{H^gamma} / (||f||_{H^gamma} ||g||_{H^gamma})`` over random band-limited pairs.

    Coefficients are drawn on the modes ``|n_i| <= band`` independently of
    ``ny``, so the same pairs are tested at every resolution; ``ny > 4 band``
    keeps the product alias-free.
    """
    if gamma <= k / 2:
        raise ValueError(f"the algebra property needs gamma > k/2, got gamma={gamma}, k={k}")
    if ny <= 4 * band:
        raise ValueError("ny must exceed 4*band for an alias-free product")
    rng = np.random.default_rng(seed)
    shape = (ny,) * k
    width = 2 * band + 1
    ratios = []
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        pair = []
        for _ in range(2):
            small = rng.standard_normal((m,) + (width,) * k) + 1j * rng.standard_normal((m,) + (width,) * k)
            full = np.zeros((m,) + shape, dtype=complex)
            idx = np.arange(-band, band + 1) % ny
            full[(slice(None),) + np.ix_(*([idx] * k))] = small
            pair.append(full)
        ratios.append(algebra_ratio(pair[0], pair[1], gamma, torus_length))
        done += m
    ratios = np.concatenate(ratios)
    return AlgebraReport(k, gamma, ny, band, trials, float(ratios.max()), float(ratios.mean()))


# --- scattering --------------------------------------------------------------


@dataclass
class ScatteringReport:
    times: np.ndarray
    strichartz_partials: np.ndarray
    tail_norms: np.ndarray
    v_increments: np.ndarray
    energy_series: np.ndarray
    energy_norm_series: np.ndarray
    source_norms: np.ndarray  # ||F(t_i)||_{L^2} at each snapshot
    source_integrals: np.ndarray  # trapezoid int ||F||_{L^2} over each snapshot panel
    scatter_state: FieldState
    gamma: float = 0.0
    scalars: dict = field(default_factory=dict)

    def window_increments(self, width: float) -> tuple[np.ndarray, np.ndarray]:
        """``||V(t + width) - V(t)||`` on successive windows starting at 0; needs V at the window edges."""
        edges = np.arange(0.0, self.times[-1] + 1e-9, width)
        idx = [int(np.argmin(np.abs(self.times - e))) for e in edges]
        if any(abs(self.times[i] - e) > 1e-9 for i, e in zip(idx, edges)):
            raise ValueError("window edges must coincide with snapshot times")
        vals = [self._pulled_back_diff(i, j) for i, j in zip(idx[:-1], idx[1:])]
        return edges, np.array(vals)

    def tail_at(self, t: float) -> float:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9:
            raise ValueError(f"t={t} is not a snapshot time")
        return float(self.tail_norms[i])

    # filled in by scattering_profile
    _pulled_back: list = field(default_factory=list, repr=False)

    def _pulled_back_diff(self, i: int, j: int) -> float:
        grid = self.scatter_state.grid
        ui, vi = self._pulled_back[i]
        uj, vj = self._pulled_back[j]
        return energy_norm_modal(grid, uj - ui, vj - vi)


def scattering_profile(traj: Trajectory, config: EvolveConfig | None = None, gamma: float = 0.0) -> ScatteringReport:
    """Strichartz partial/tail norms, ``V(t)`` increments and the scattering pair ``V(T)``.

    With ``gamma > 0`` the snapshots are first hit with ``(1 - Delta_y)^{gamma/2}``
    and the spatial norm is ``L^{2p}_x L^2_y`` (the anisotropic variant).
    """
    config = config or traj.config
    grid = traj.grid
    p = config.p
    sign = config.sign if config.nonlinear else 0
    times = traj.times
    weight = y_multiplier(grid, gamma) if gamma > 0 else None
    spatial, pulled, energies, enorms, f_l2 = [], [], [], [], []
    for state in traj.states:
        u_hat, v_hat = fft(state.u), fft(state.v)
        energies.append(conserved_energy(state, p, sign))
        enorms.append(energy_norm_modal(grid, u_hat, v_hat))
        if weight is not None:
            u_hat, v_hat = u_hat * weight, v_hat * weight
            spatial.append(mixed_lr_x_l2_y(grid, ifft(u_hat), 2 * p))
        else:
            spatial.append(joint_lebesgue(grid, state.u, 2 * p))
        pulled.append(flow_modal(grid, u_hat, v_hat, -state.time))
        f_l2.append(l2_norm(grid, nonlinearity(state.u, p, 1)) if sign else 0.0)
    partial, tail = partial_and_tail(times, spatial, p)
    incs = np.array([
        energy_norm_modal(grid, pulled[i + 1][0] - pulled[i][0], pulled[i + 1][1] - pulled[i][1])
        for i in range(len(pulled) - 1)
    ])
    f_l2 = np.asarray(f_l2)
    source = np.diff(times) * (f_l2[:-1] + f_l2[1:]) / 2
    u_T, v_T = pulled[-1]
    if weight is not None:
        u_T, v_T = u_T / weight, v_T / weight
    scatter = FieldState(grid, 0.0, ifft(u_T), ifft(v_T))
    report = ScatteringReport(
        times=times, strichartz_partials=partial, tail_norms=tail, v_increments=incs,
        energy_series=np.asarray(energies), energy_norm_series=np.asarray(enorms),
        source_norms=f_l2, source_integrals=source, scatter_state=scatter, gamma=gamma,
    )
    report._pulled_back = pulled
    with np.errstate(divide="ignore", invalid="ignore"):
        factors = np.where(source > 0, incs / source, 0.0)
    e0 = energies[0]
    report.scalars = {
        "scatter_energy_norm": energy_norm(scatter),
        "final_energy_norm": float(enorms[-1]),
        "strichartz_total": float(partial[-1]),
        "max_duhamel_factor": float(factors.max(initial=0.0)),
        "energy_drift": float(abs(energies[-1] - e0) / abs(e0)) if e0 else float(abs(energies[-1] - e0)),
        "gamma": gamma,
    }
    return report


def energy_estimate_slack(report: ScatteringReport) -> np.ndarray:
    """``||(u,v)(t)|| - ||(u,v)(0)|| - int_0^t ||F||_{L^2}``; nonpositive up to quadrature error."""
    cumulative = np.concatenate([[0.0], np.cumsum(report.source_integrals)])
    return report.energy_norm_series - report.energy_norm_series[0] - cumulative
