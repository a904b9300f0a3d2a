"""Uniform tensor-product sample grids on axis-aligned rectangles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_SAMPLES = 4  # second-difference stencils need four points per axis


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``nx`` x ``ny`` nodes on [x0, x0+lx] x [y0, y0+ly].

    Arrays indexed ``a[i, j]`` hold samples at ``(x[i], y[j])``.
    """

    nx: int
    ny: int
    lx: float
    ly: float
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self) -> None:
        if self.nx < MIN_SAMPLES or self.ny < MIN_SAMPLES:
            raise ValueError(f"grid needs at least {MIN_SAMPLES} samples per axis")
        if self.lx <= 0.0 or self.ly <= 0.0:
            raise ValueError("grid extents must be positive")

    @property
    def hx(self) -> float:
        return self.lx / (self.nx - 1)

    @property
    def hy(self) -> float:
        return self.ly / (self.ny - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    def x(self) -> np.ndarray:
        return self.x0 + self.hx * np.arange(self.nx)

    def y(self) -> np.ndarray:
        return self.y0 + self.hy * np.arange(self.ny)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x(), self.y(), indexing="ij")

    @classmethod
    def for_rectangle(
        cls,
        lx: float,
        ly: float,
        hx_target: float,
        hy_target: float,
        x0: float = 0.0,
        y0: float = 0.0,
        max_nodes: int = 200_000_000,
    ) -> "Grid":
        """Grid with spacings at most the targets (node counts rounded up)."""
        nx = max(MIN_SAMPLES, int(np.ceil(lx / hx_target)) + 1)
        ny = max(MIN_SAMPLES, int(np.ceil(ly / hy_target)) + 1)
        if nx * ny > max_nodes:
            raise ValueError(
                f"requested grid {nx} x {ny} exceeds the node budget {max_nodes}"
            )
        return cls(nx=nx, ny=ny, lx=lx, ly=ly, x0=x0, y0=y0)


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    """Composite trapezoid weights for n uniformly spaced nodes."""
    w = np.full(n, h)
    w[0] = 0.5 * h
    w[-1] = 0.5 * h
    return w


def cumulative_trapezoid(f: np.ndarray, h: float, axis: int = -1) -> np.ndarray:
    """Cumulative trapezoid integral along ``axis``, zero at the first node."""
    f = np.moveaxis(f, axis, -1)
    out = np.zeros_like(f)
    np.cumsum(0.5 * h * (f[..., 1:] + f[..., :-1]), axis=-1, out=out[..., 1:])
    return np.moveaxis(out, -1, axis)
