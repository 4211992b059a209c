import sys

import numpy as np
import pytest

from nlkg.spectral import DomainSpec, FieldState, make_grid


def grid_for(d=1, k=1, L=2 * np.pi, ell=2 * np.pi, nx=16, ny=8):
    return make_grid(DomainSpec(d, k, (L,) * d, (ell,) * k, (nx,) * d, (ny,) * k))


def random_state(grid, rng, band=None):
    """Random complex (u, v); with ``band`` the x- and y-modes are limited to |m| <= band."""
    shape = grid.shape
    u = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    if band is not None:
        mask = np.ones(shape, dtype=bool)
        for axis, n in enumerate(shape):
            m = np.abs(np.fft.fftfreq(n, 1.0 / n))
            sl = [None] * len(shape)
            sl[axis] = slice(None)
            mask &= (m <= band)[tuple(sl)]
        u = np.fft.ifftn(np.fft.fftn(u) * mask)
        v = np.fft.ifftn(np.fft.fftn(v) * mask)
    return FieldState(grid, 0.0, u, v)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
