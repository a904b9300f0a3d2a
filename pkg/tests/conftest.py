import numpy as np
import pytest

from filmbounds.grid import Grid
from filmbounds.params import Params


@pytest.fixture
def unit_params():
    return Params(sigma=0.1, gamma=1.0, l1=1.0, l2=1.0)


@pytest.fixture
def unit_grid():
    return Grid(nx=33, ny=33, lx=1.0, ly=1.0)


def cell_grid(h: float, delta: float, length: float, spd: int, nx: int | None = None) -> Grid:
    """Cell grid on (0, length) x (-h, h) with hy = delta / spd (aligned)."""
    hy = delta / spd
    ny = int(round(2.0 * h / hy)) + 1
    if nx is None:
        nx = max(9, int(round(length / hy)) + 1)
    return Grid(nx=nx, ny=ny, lx=length, ly=2.0 * h, y0=-h)


def random_admissible_field(rng: np.random.Generator, grid: Grid, params: Params):
    """Smooth random clamped field with w >= 0 for gradient/minimizer tests."""
    from filmbounds.field import DisplacementField

    x, y = grid.mesh()
    shape = grid.shape

    def smooth():
        acc = np.zeros(shape)
        for _ in range(3):
            kx, ky = rng.integers(1, 4, size=2)
            acc += rng.normal() * np.sin(np.pi * kx * x / grid.lx) * np.cos(
                np.pi * ky * y / grid.ly
            )
        return acc

    u = 0.05 * smooth()
    v = 0.05 * smooth()
    w = 0.05 * (smooth() ** 2) + 0.01 * x / grid.lx
    u[0] = 0.0
    v[0] = 0.0
    w[0] = 0.0
    w[1] = 0.25 * w[2]
    return DisplacementField(
        u=u, v=v, w=w, support_mask=w > 0.0, grid=grid, params=params,
        clamped=True, analytic_mask=False,
    )
