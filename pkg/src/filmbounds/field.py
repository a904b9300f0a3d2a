"""Sampled displacement fields, energy breakdowns, and their file formats."""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Any

import numpy as np

from .grid import Grid
from .params import Params

# Threshold rule for the delaminated set of numerically produced fields.
W_THRESHOLD_SCALE = 1e-8


@dataclass(frozen=True)
class EnergyBreakdown:
    """Stretching / bending / bonding split of the rescaled energy."""

    stretching: float
    bending: float
    bonding: float

    def __post_init__(self) -> None:
        for name in ("stretching", "bending", "bonding"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} energy is not finite: {value}")
            if value < 0.0:
                raise ValueError(f"{name} energy must be >= 0, got {value}")

    @property
    def total(self) -> float:
        return self.stretching + self.bending + self.bonding

    def to_dict(self) -> dict[str, float]:
        return {
            "stretching": self.stretching,
            "bending": self.bending,
            "bonding": self.bonding,
            "total": self.total,
        }

    def to_json(self, **kwargs: Any) -> str:
        kwargs.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "EnergyBreakdown":
        d = json.loads(text)
        return cls(d["stretching"], d["bending"], d["bonding"])


def support_mask_from_w(w: np.ndarray) -> np.ndarray:
    """Delaminated set of a numeric field: w above a small relative threshold."""
    tau = W_THRESHOLD_SCALE * max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    return w > tau


@dataclass
class DisplacementField:
    """In-plane (u, v) and vertical (w) displacement samples on a grid.

    ``support_mask`` marks the delaminated set. For analytic constructions it
    is derived from the construction's exact support (``analytic_mask=True``);
    for numeric fields it is a threshold of w. ``clamped`` says whether the
    field claims membership in the clamped admissible class along x = x0
    (interior cell pieces set it to False). ``clamp_height`` is the prescribed
    vertical displacement along the clamped edge (0 without a buffer layer).
    """

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    support_mask: np.ndarray
    grid: Grid
    params: Params
    clamped: bool = True
    clamp_height: float = 0.0
    analytic_mask: bool = True
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self) -> None:
        shape = self.grid.shape
        for name in ("u", "v", "w", "support_mask"):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
        if self.support_mask.dtype != bool:
            raise ValueError("support_mask must be boolean")

    def validate_finite(self) -> None:
        for name in ("u", "v", "w"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains NaN or Inf samples")

    def copy(self) -> "DisplacementField":
        return DisplacementField(
            u=self.u.copy(),
            v=self.v.copy(),
            w=self.w.copy(),
            support_mask=self.support_mask.copy(),
            grid=self.grid,
            params=self.params,
            clamped=self.clamped,
            clamp_height=self.clamp_height,
            analytic_mask=self.analytic_mask,
            meta=dict(self.meta),
        )


def _header_dict(f: DisplacementField, fmt: str) -> dict[str, Any]:
    return {
        "format": fmt,
        "nx": f.grid.nx,
        "ny": f.grid.ny,
        "lx": f.grid.lx,
        "ly": f.grid.ly,
        "x0": f.grid.x0,
        "y0": f.grid.y0,
        "hx": f.grid.hx,
        "hy": f.grid.hy,
        "sigma": f.params.sigma,
        "gamma": f.params.gamma,
        "l1": f.params.l1,
        "l2": f.params.l2,
        "clamped": f.clamped,
        "clamp_height": f.clamp_height,
    }


def write_field(f: DisplacementField, path: str | Path, fmt: str = "csv") -> Path:
    """Dump a field: one JSON header line, then u, v, w in row-major order.

    ``fmt="csv"`` writes one ``u,v,w`` triple per node; ``fmt="bin"`` writes
    the three arrays as consecutive little-endian float64 blocks.
    """
    path = Path(path)
    if fmt not in ("csv", "bin"):
        raise ValueError(f"unknown field format {fmt!r}")
    header = json.dumps(_header_dict(f, fmt), sort_keys=True)
    if fmt == "csv":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(header + "\n")
            fh.write("u,v,w\n")
            data = np.column_stack(
                [f.u.ravel(order="C"), f.v.ravel(order="C"), f.w.ravel(order="C")]
            )
            np.savetxt(fh, data, fmt="%.17g", delimiter=",")
    else:
        with open(path, "wb") as fh:
            fh.write(header.encode("utf-8") + b"\n")
            for arr in (f.u, f.v, f.w):
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return path


def read_field(path: str | Path) -> DisplacementField:
    """Read a field dump; the support mask is rebuilt by thresholding w."""
    path = Path(path)
    with open(path, "rb") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValueError(f"{path}: missing or corrupt JSON header") from exc
        nx, ny = int(header["nx"]), int(header["ny"])
        n = nx * ny
        if header["format"] == "csv":
            rest = fh.read().decode("utf-8").splitlines()
            data = np.loadtxt(rest[1:], delimiter=",").reshape(n, 3)
            u = data[:, 0].reshape(nx, ny)
            v = data[:, 1].reshape(nx, ny)
            w = data[:, 2].reshape(nx, ny)
        elif header["format"] == "bin":
            raw = np.frombuffer(fh.read(), dtype="<f8")
            if raw.size != 3 * n:
                raise ValueError(f"{path}: expected {3 * n} floats, found {raw.size}")
            u = raw[:n].reshape(nx, ny).copy()
            v = raw[n : 2 * n].reshape(nx, ny).copy()
            w = raw[2 * n :].reshape(nx, ny).copy()
        else:
            raise ValueError(f"{path}: unknown format {header['format']!r}")
    grid = Grid(
        nx=nx, ny=ny, lx=header["lx"], ly=header["ly"],
        x0=header.get("x0", 0.0), y0=header.get("y0", 0.0),
    )
    params = Params(header["sigma"], header["gamma"], header["l1"], header["l2"])
    return DisplacementField(
        u=u,
        v=v,
        w=w,
        support_mask=support_mask_from_w(w),
        grid=grid,
        params=params,
        clamped=bool(header.get("clamped", True)),
        clamp_height=float(header.get("clamp_height", 0.0)),
        analytic_mask=False,
    )
