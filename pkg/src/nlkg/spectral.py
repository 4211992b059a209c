"""Periodic grids on box^d x torus^k, Fourier transforms, Littlewood-Paley blocks.

Axis convention: the first ``d`` array axes are the x-directions (a periodic box
standing in for R^d, centred on the origin), the last ``k`` are the torus
directions y in ``[0, l_i)``.  Modal coefficients are Fourier-series
coefficients (``fft / N``) in numpy FFT order, so a constant field ``c`` has the
single coefficient ``c`` at the zero mode.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft as sfft

MIN_POINTS = 4


@dataclass(frozen=True)
class DomainSpec:
    d: int
    k: int
    box_lengths: tuple[float, ...]
    torus_lengths: tuple[float, ...]
    nx: tuple[int, ...]
    ny: tuple[int, ...]

    def __post_init__(self):
        for name in ("box_lengths", "torus_lengths", "nx", "ny"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not 1 <= self.d <= 5:
            raise ValueError(f"d must lie in [1, 5], got {self.d}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if len(self.box_lengths) != self.d or len(self.nx) != self.d:
            raise ValueError("box_lengths and nx need exactly d entries")
        if len(self.torus_lengths) != self.k or len(self.ny) != self.k:
            raise ValueError("torus_lengths and ny need exactly k entries")
        for length in self.box_lengths + self.torus_lengths:
            if not (math.isfinite(length) and length > 0):
                raise ValueError(f"lengths must be positive and finite, got {length}")
        for n in self.nx + self.ny:
            if int(n) != n or n % 2:
                raise ValueError(f"grid sizes must be even integers, got {n}")
            if n < MIN_POINTS:
                raise ValueError(f"grid sizes must be >= {MIN_POINTS}, got {n}")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.nx + self.ny


def _centered_modes(n: int) -> np.ndarray:
    # integer modes in numpy FFT order; as a set this is [-n/2, n/2 - 1]
    return np.fft.fftfreq(n, 1.0 / n)


def eigenvalues_torus(torus_lengths, ny) -> np.ndarray:
    """Laplace-Beltrami eigenvalues on the flat torus, shape ``ny``, FFT order."""
    torus_lengths, ny = tuple(torus_lengths), tuple(ny)
    if any(not length > 0 for length in torus_lengths):
        raise ValueError("torus lengths must be positive")
    lam = np.zeros(ny)
    for axis, (length, n) in enumerate(zip(torus_lengths, ny)):
        eta = 2 * np.pi * _centered_modes(n) / length
        shape = [1] * len(ny)
        shape[axis] = n
        lam = lam + (eta**2).reshape(shape)
    return lam


@dataclass(frozen=True, eq=False)
class Grid:
    spec: DomainSpec

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def shape(self) -> tuple[int, ...]:
        return self.spec.shape

    @property
    def x_axes(self) -> tuple[int, ...]:
        return tuple(range(self.d))

    @property
    def y_axes(self) -> tuple[int, ...]:
        return tuple(range(self.d, self.d + self.k))

    @cached_property
    def dx(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.spec.box_lengths, self.spec.nx))

    @cached_property
    def dy(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.spec.torus_lengths, self.spec.ny))

    @cached_property
    def cell_volume(self) -> float:
        return math.prod(self.dx) * math.prod(self.dy)

    @cached_property
    def vol_x(self) -> float:
        return math.prod(self.spec.box_lengths)

    @cached_property
    def vol_y(self) -> float:
        return math.prod(self.spec.torus_lengths)

    @property
    def volume(self) -> float:
        return self.vol_x * self.vol_y

    @cached_property
    def size(self) -> int:
        return math.prod(self.shape)

    def _along(self, axis: int, values: np.ndarray) -> np.ndarray:
        shape = [1] * len(self.shape)
        shape[axis] = values.size
        return values.reshape(shape)

    @cached_property
    def x(self) -> tuple[np.ndarray, ...]:
        """Broadcastable physical x-coordinates, centred: ``-L/2 + i dx``."""
        return tuple(
            self._along(a, -L / 2 + np.arange(n) * (L / n))
            for a, (L, n) in enumerate(zip(self.spec.box_lengths, self.spec.nx))
        )

    @cached_property
    def y(self) -> tuple[np.ndarray, ...]:
        return tuple(
            self._along(self.d + a, np.arange(n) * (L / n))
            for a, (L, n) in enumerate(zip(self.spec.torus_lengths, self.spec.ny))
        )

    @cached_property
    def xi_axes(self) -> tuple[np.ndarray, ...]:
        """1-D x-frequency lattices ``2 pi m / L`` in FFT order."""
        return tuple(2 * np.pi * _centered_modes(n) / L for L, n in zip(self.spec.box_lengths, self.spec.nx))

    @cached_property
    def eta_axes(self) -> tuple[np.ndarray, ...]:
        return tuple(2 * np.pi * _centered_modes(n) / L for L, n in zip(self.spec.torus_lengths, self.spec.ny))

    @cached_property
    def xi_sq(self) -> np.ndarray:
        """|xi|^2, broadcastable over the full grid (singleton y axes)."""
        out = np.zeros(self.spec.nx + (1,) * self.k)
        for a, xi in enumerate(self.xi_axes):
            out = out + self._along(a, xi**2)
        return out

    @cached_property
    def xi_norm_x(self) -> np.ndarray:
        return np.sqrt(self.xi_sq)

    @cached_property
    def lam(self) -> np.ndarray:
        """Torus eigenvalues broadcastable over the full grid (singleton x axes)."""
        return eigenvalues_torus(self.spec.torus_lengths, self.spec.ny).reshape((1,) * self.d + self.spec.ny)

    def omega(self, m_sq: float = 1.0) -> np.ndarray:
        """Joint-mode frequencies ``sqrt(m^2 + lambda + |xi|^2)``, full shape."""
        if m_sq == 1.0:
            return self._omega_unit
        return np.sqrt(m_sq + self.lam + self.xi_sq)

    @cached_property
    def _omega_unit(self) -> np.ndarray:
        return np.sqrt(1.0 + self.lam + self.xi_sq)

    @cached_property
    def nyquist_x(self) -> float:
        """Largest |xi| on the x-lattice (Euclidean norm of the corner frequency)."""
        return float(math.sqrt(sum((np.pi * n / L) ** 2 for L, n in zip(self.spec.box_lengths, self.spec.nx))))

    @cached_property
    def j_max(self) -> int:
        """Last dyadic index: blocks 0..j_max cover the whole x-lattice."""
        return max(0, math.ceil(math.log2(self.nyquist_x)))

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape, dtype=complex)


def make_grid(spec: DomainSpec) -> Grid:
    return Grid(spec)


@dataclass(frozen=True, eq=False)
class FieldState:
    """``(u, v = du/dt)`` sampled on the physical grid at one time."""

    grid: Grid = field(repr=False)
    time: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        v = np.asarray(self.v, dtype=complex)
        if u.shape != self.grid.shape or v.shape != self.grid.shape:
            raise ValueError(f"u, v must have shape {self.grid.shape}, got {u.shape} and {v.shape}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.u).all() and np.isfinite(self.v).all())

    def with_time(self, time: float) -> "FieldState":
        return FieldState(self.grid, time, self.u, self.v)


@dataclass(frozen=True, eq=False)
class ModalState:
    grid: Grid = field(repr=False)
    time: float
    u_hat: np.ndarray
    v_hat: np.ndarray

    def l2_norms(self) -> tuple[float, float]:
        """Coefficient l^2 norms weighted by the domain volume (Plancherel scale)."""
        vol = self.grid.volume
        return (
            math.sqrt(vol * float(np.sum(np.abs(self.u_hat) ** 2))),
            math.sqrt(vol * float(np.sum(np.abs(self.v_hat) ** 2))),
        )


def fft(a: np.ndarray, axes=None) -> np.ndarray:
    return sfft.fftn(a, axes=axes, norm="forward")


def ifft(a: np.ndarray, axes=None) -> np.ndarray:
    return sfft.ifftn(a, axes=axes, norm="forward")


def forward_transform(state: FieldState) -> ModalState:
    return ModalState(state.grid, state.time, fft(state.u), fft(state.v))


def inverse_transform(modal: ModalState) -> FieldState:
    return FieldState(modal.grid, modal.time, ifft(modal.u_hat), ifft(modal.v_hat))


def l2_norm(grid: Grid, a: np.ndarray) -> float:
    return math.sqrt(grid.cell_volume * float(np.sum(np.abs(a) ** 2)))


# --- Littlewood-Paley --------------------------------------------------------


def chi0(xi_abs) -> np.ndarray:
    """Radial cutoff: 1 on [0, 1], 0 on [2, inf), ``exp(1 - 1/(1 - (r-1)^2))`` between."""
    r = np.asarray(xi_abs, dtype=float)
    out = np.zeros_like(r)
    out[r <= 1.0] = 1.0
    mid = (r > 1.0) & (r < 2.0)
    t = r[mid] - 1.0
    out[mid] = np.exp(1.0 - 1.0 / (1.0 - t * t))
    return out


def dyadic_multiplier(xi_abs, j: int) -> np.ndarray:
    if j < 0:
        raise ValueError("dyadic index must be >= 0")
    if j == 0:
        return chi0(xi_abs)
    return chi0(np.ldexp(xi_abs, -j)) - chi0(np.ldexp(xi_abs, -j + 1))


@dataclass(frozen=True, eq=False)
class DyadicBlock:
    j: int
    field: np.ndarray


def littlewood_paley_project(grid: Grid, f: np.ndarray, j: int, f_hat_x: np.ndarray | None = None) -> DyadicBlock:
    """``P_j f``: x-frequency multiplier ``phi_j(xi)``; y untouched.

    ``f_hat_x`` (the x-only transform of ``f``) may be passed to avoid recomputing it.
    """
    if f_hat_x is None:
        f_hat_x = fft(f, axes=grid.x_axes)
    mult = dyadic_multiplier(grid.xi_norm_x, j)
    return DyadicBlock(j, ifft(f_hat_x * mult, axes=grid.x_axes))


def dyadic_blocks(grid: Grid, f: np.ndarray) -> list[DyadicBlock]:
    f_hat_x = fft(f, axes=grid.x_axes)
    return [littlewood_paley_project(grid, f, j, f_hat_x) for j in range(grid.j_max + 1)]


def mixed_lr_x_l2_y(grid: Grid, f: np.ndarray, r: float) -> float:
    """``|| ||f(x, .)||_{L^2_y} ||_{L^r_x}`` with rectangle-rule quadrature."""
    dy_cell = math.prod(grid.dy)
    dx_cell = math.prod(grid.dx)
    inner = np.sqrt(dy_cell * np.sum(np.abs(f) ** 2, axis=grid.y_axes))
    if r == math.inf:
        return float(inner.max())
    return float((dx_cell * np.sum(inner**r)) ** (1.0 / r))


def besov_norm(grid: Grid, f: np.ndarray, s: float, r: float) -> float:
    """``||P_0 f|| + (sum_{j>0} 2^{2sj} ||P_j f||^2)^{1/2}`` in ``L^r_x L^2_y``."""
    if r < 1:
        raise ValueError("r must be >= 1")
    blocks = dyadic_blocks(grid, f)
    low = mixed_lr_x_l2_y(grid, blocks[0].field, r)
    high = sum(4.0 ** (s * b.j) * mixed_lr_x_l2_y(grid, b.field, r) ** 2 for b in blocks[1:])
    return low + math.sqrt(high)


def validity_horizon(spec: DomainSpec, support_radius: float) -> float:
    """Largest T for which speed-1 propagation from a ball of radius R stays off the box seam."""
    return (min(spec.box_lengths) - 2 * support_radius) / 2


# --- snapshot files ----------------------------------------------------------

MAGIC = b"KGPS"
SNAPSHOT_VERSION = 1


def write_snapshot(path, state: FieldState) -> None:
    """Little-endian: magic, version, d, k, nx[], ny[], lengths (f64), time (f64), u, v."""
    spec = state.grid.spec
    header = MAGIC + struct.pack(
        f"<III{spec.d}I{spec.k}I{spec.d + spec.k}dd",
        SNAPSHOT_VERSION, spec.d, spec.k, *spec.nx, *spec.ny,
        *spec.box_lengths, *spec.torus_lengths, float(state.time),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(state.u, dtype="<c16").tobytes())
        fh.write(np.ascontiguousarray(state.v, dtype="<c16").tobytes())


def read_snapshot(path, grid: Grid | None = None) -> FieldState:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not a KGPS snapshot")
    version, d, k = struct.unpack_from("<III", data, 4)
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    off = 16
    dims = struct.unpack_from(f"<{d + k}I", data, off)
    off += 4 * (d + k)
    lengths = struct.unpack_from(f"<{d + k}d", data, off)
    off += 8 * (d + k)
    (time,) = struct.unpack_from("<d", data, off)
    off += 8
    spec = DomainSpec(d, k, lengths[:d], lengths[d:], dims[:d], dims[d:])
    if grid is None:
        grid = make_grid(spec)
    elif grid.spec != spec:
        raise ValueError(f"{path}: snapshot grid does not match")
    n = grid.size
    payload = np.frombuffer(data, dtype="<c16", offset=off)
    if payload.size != 2 * n:
        raise ValueError(f"{path}: expected {2 * n} complex values, found {payload.size}")
    u = payload[:n].reshape(grid.shape).astype(complex)
    v = payload[n:].reshape(grid.shape).astype(complex)
    return FieldState(grid, time, u, v)
