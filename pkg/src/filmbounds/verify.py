"""Sweeps, exponent fits, convergence studies, sandwich and Poincare checks."""

from __future__ import annotations

import csv
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import constructions as cons
from .constructions import (
    BRANCHING,
    FLAT,
    LAMINATE,
    LaminateCellSpec,
    best_construction_energy,
    branch_layout,
    cell_energy_closed_form,
    construction_energy,
    flat_energy,
    laminate_cell,
    laminate_scales,
    pattern_period,
)
from .energy import evaluate_energy
from .grid import Grid, trapezoid_weights
from .params import Params
from .profiles import RAISED_COSINE
from .regimes import classify, lower_bound_scaling

POINCARE_CONSTANT = 6.0 / math.pi**2

AUTO = "auto"


def worker_count(requested: int | None = None) -> int:
    """Worker cap for sweep evaluation: flag, then env, then CPU count."""
    if requested is not None and requested > 0:
        return requested
    env = os.environ.get("FILM_BOUNDS_THREADS")
    if env:
        try:
            n = int(env)
            if n > 0:
                return n
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# sweep specification and table


@dataclass(frozen=True)
class SweepSpec:
    """A single-regime ray in the (sigma, gamma) plane.

    ``coordinate`` names the swept parameter; ``fixed`` is the other one.
    With ``curve_power`` set, the sweep follows the log-parameterized curve
    gamma = fixed * sigma^curve_power instead of a fixed-gamma line (the
    coordinate must then be sigma). ``construction`` selects which test field
    to evaluate (``auto`` compares all applicable ones). With ``snap_l2`` the
    domain height of each point is snapped to a whole number of fold periods,
    which keeps the flat remainder strip from polluting scaling fits; fits
    always use the energy density.
    """

    coordinate: str                      # "sigma" | "gamma"
    values: tuple[float, ...]
    fixed: float
    construction: str = AUTO
    samples_per_delta: int = 12
    l1: float = 1.0
    l2: float = 1.0
    snap_l2: bool = True
    curve_power: float | None = None

    def params(self, value: float) -> Params:
        if self.coordinate == "sigma":
            gamma = (
                self.fixed * value**self.curve_power
                if self.curve_power is not None
                else self.fixed
            )
            return Params(value, gamma, self.l1, self.l2)
        return Params(self.fixed, value, self.l1, self.l2)

    def validate(self) -> None:
        if self.coordinate not in ("sigma", "gamma"):
            raise ValueError(f"unknown sweep coordinate {self.coordinate!r}")
        if self.curve_power is not None and self.coordinate != "sigma":
            raise ValueError("curve sweeps parameterize gamma by sigma")
        if self.construction not in (AUTO, FLAT, LAMINATE, BRANCHING):
            raise ValueError(f"unknown construction selector {self.construction!r}")
        if len(self.values) < 4:
            raise ValueError("sweeps need at least 4 points")
        if any(v <= 0.0 for v in self.values):
            raise ValueError("sweep values must be positive")
        if list(self.values) != sorted(self.values):
            raise ValueError("sweep values must be sorted ascending")
        span = math.log10(max(self.values) / min(self.values))
        if span < 1.0 - 1e-9:
            raise ValueError(
                f"sweep spans {span:.2f} decades; need at least 1 decade"
            )
        if span < 1.5:
            warnings.warn(
                f"sweep spans only {span:.2f} decades; fitted exponents may be "
                "sensitive to endpoint effects",
                stacklevel=2,
            )
        labels = {classify(p.sigma, p.gamma).label for p in map(self.params, self.values)}
        if len(labels) > 1:
            raise ValueError(f"sweep crosses regimes {sorted(labels)}")


@dataclass(frozen=True)
class SweepRow:
    sigma: float
    gamma: float
    stretching: float
    bending: float
    bonding: float
    total: float
    regime: str
    nx: int
    ny: int
    N: int
    h0: float
    deltaN: float
    l1: float
    l2: float
    density: float
    construction: str

    CSV_FIELDS = (
        "sigma", "gamma", "stretching", "bending", "bonding", "total",
        "regime", "nx", "ny", "N", "h0", "deltaN", "l1", "l2", "density",
        "construction",
    )


@dataclass
class SweepTable:
    spec: SweepSpec
    rows: list[SweepRow] = dc_field(default_factory=list)

    def validate(self) -> None:
        for row in self.rows:
            for name in ("stretching", "bending", "bonding", "total", "density"):
                if not math.isfinite(getattr(row, name)):
                    raise ValueError(f"row has non-finite {name}")
        coords = [getattr(r, self.spec.coordinate) for r in self.rows]
        if coords != sorted(coords):
            raise ValueError("rows are not sorted by the sweep coordinate")

    def coordinates(self) -> np.ndarray:
        return np.array([getattr(r, self.spec.coordinate) for r in self.rows])

    def densities(self) -> np.ndarray:
        return np.array([r.density for r in self.rows])

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(SweepRow.CSV_FIELDS)
            for row in self.rows:
                writer.writerow(
                    [repr(getattr(row, k)) if isinstance(getattr(row, k), float)
                     else getattr(row, k) for k in SweepRow.CSV_FIELDS]
                )
        return path


def _snap_l2(l1: float, l2: float, period: float | None) -> float:
    if period is None or period <= 0.0:
        return l2
    m = max(1, round(l2 / period))
    while m * period < l1 - 1e-12:
        m += 1
    return m * period


def _equivalent_grid_shape(kind: str, params: Params, spd: int) -> tuple[int, int]:
    """Node counts of the resolution-equivalent full grid (bookkeeping only)."""
    if kind == FLAT:
        return (33, 33)
    if kind == LAMINATE:
        h, delta, eps = laminate_scales(params)
        return (
            int(math.ceil(params.l1 / (eps / spd))) + 1,
            int(math.ceil(params.l2 / (delta / spd))) + 1,
        )
    layout = branch_layout(params)
    sched = layout.sched
    min_l = min((sched.L[i] for i in layout.used_levels), default=sched.eps)
    hx_t = min(sched.eps, min_l / 4.0) / spd
    return (
        int(math.ceil(params.l1 / hx_t)) + 1,
        int(math.ceil(params.l2 / (sched.deltaN / spd))) + 1,
    )


def _sweep_point(spec: SweepSpec, value: float) -> SweepRow:
    base = spec.params(value)
    kind = spec.construction
    if kind == AUTO:
        kind, _, _ = best_construction_energy(base, spec.samples_per_delta)
    params = base
    if spec.snap_l2:
        params = base.with_l2(_snap_l2(base.l1, base.l2, pattern_period(kind, base)))
    try:
        eb, info = construction_energy(kind, params, spec.samples_per_delta)
    except ValueError as exc:
        raise ValueError(
            f"sweep point {spec.coordinate}={value}: {exc}"
        ) from exc
    sched = info.get("schedule")
    nx, ny = _equivalent_grid_shape(kind, params, spec.samples_per_delta)
    return SweepRow(
        sigma=params.sigma,
        gamma=params.gamma,
        stretching=eb.stretching,
        bending=eb.bending,
        bonding=eb.bonding,
        total=eb.total,
        regime=classify(params.sigma, params.gamma).label,
        nx=nx,
        ny=ny,
        N=sched.N if sched is not None else 0,
        h0=sched.h0 if sched is not None else info.get("h", 0.0),
        deltaN=sched.deltaN if sched is not None else info.get("delta", 0.0),
        l1=params.l1,
        l2=params.l2,
        density=eb.total / (params.l1 * params.l2),
        construction=kind,
    )


def run_sweep(spec: SweepSpec, threads: int | None = None) -> SweepTable:
    """Evaluate every sweep point; rows keep the spec's coordinate order."""
    spec.validate()
    n = worker_count(threads)
    if n > 1 and len(spec.values) > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(lambda v: _sweep_point(spec, v), spec.values))
    else:
        rows = [_sweep_point(spec, v) for v in spec.values]
    table = SweepTable(spec=spec, rows=rows)
    table.validate()
    return table


# ---------------------------------------------------------------------------
# exponent fitting


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    stderr: float
    r2: float
    intercept: float
    n: int

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "stderr": self.stderr,
            "r2": self.r2,
            "intercept": self.intercept,
            "n": self.n,
        }


def fit_loglog(x: np.ndarray, y: np.ndarray) -> ExponentFit:
    """Ordinary least squares of log y on log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 4:
        raise ValueError("need at least 4 points for an exponent fit")
    if np.any(y <= 0.0):
        raise ValueError("exponent fit needs positive energies")
    lx = np.log(x)
    ly = np.log(y)
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    if sxx == 0.0:
        raise ValueError("degenerate sweep: all coordinates equal")
    slope = float(np.sum((lx - lx.mean()) * (ly - ly.mean())) / sxx)
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (intercept + slope * lx)
    sse = float(np.sum(resid**2))
    sst = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if sst == 0.0 else 1.0 - sse / sst
    dof = max(1, x.size - 2)
    stderr = math.sqrt(sse / dof / sxx)
    return ExponentFit(slope=slope, stderr=stderr, r2=r2, intercept=intercept, n=x.size)


def fit_exponent(table: SweepTable, coordinate: str | None = None) -> ExponentFit:
    """Power-law fit of the energy density against the sweep coordinate."""
    if coordinate is None:
        coordinate = table.spec.coordinate
    if coordinate != table.spec.coordinate:
        raise ValueError(
            f"table sweeps {table.spec.coordinate}, cannot fit against {coordinate}"
        )
    if len(table.rows) < 4:
        raise ValueError("need at least 4 rows for an exponent fit")
    return fit_loglog(table.coordinates(), table.densities())


# ---------------------------------------------------------------------------
# convergence study


@dataclass(frozen=True)
class ConvergenceResult:
    label: str
    samples_per_delta: tuple[int, ...]
    energies: tuple[float, ...]
    errors: tuple[float, ...]
    orders: tuple[float, ...]
    reference: float
    reference_kind: str  # "closed_form" | "finest" | "exact"

    @property
    def observed_order(self) -> float:
        return self.orders[-1] if self.orders else math.inf


def _laminate_cell_energy(params: Params, spec: LaminateCellSpec, spd: int) -> float:
    hy = spec.delta / spd
    ny = int(round(2.0 * spec.h / hy)) + 1
    nx = max(9, int(round(spec.l / hy)) + 1)
    grid = Grid(nx=nx, ny=ny, lx=spec.l, ly=2.0 * spec.h, y0=-spec.h)
    return evaluate_energy(laminate_cell(spec, grid, params)).total


def convergence_study(
    label: str,
    params: Params,
    ladder: tuple[int, ...] = (12, 24, 48),
    cell: LaminateCellSpec | None = None,
) -> ConvergenceResult:
    """Observed convergence order of a construction's energy under refinement.

    The ladder lists samples-per-finest-scale values; each entry must double
    its predecessor (nested grids). The laminate cell is compared against its
    closed-form energy; the flat construction is exact at every resolution;
    other constructions use the finest level as the Richardson reference.
    """
    if len(ladder) < 3:
        raise ValueError("need at least 3 nested grids")
    for a, b in zip(ladder, ladder[1:]):
        if b != 2 * a:
            raise ValueError(f"ladder {ladder} is not nested (each level must double)")
    if label == "laminate_cell":
        spec = cell or LaminateCellSpec(h=1.0, delta=0.25, l=1.0)
        energies = [_laminate_cell_energy(params, spec, spd) for spd in ladder]
        reference = cell_energy_closed_form(spec, params)
        kind = "closed_form"
    elif label == FLAT:
        energies = [flat_energy(params).total for _ in ladder]
        reference = params.l1 * params.l2
        kind = "exact"
    elif label in (LAMINATE, BRANCHING):
        energies = [construction_energy(label, params, spd)[0].total for spd in ladder]
        reference = energies[-1]
        kind = "finest"
    else:
        raise ValueError(f"unknown construction label {label!r}")
    errors = [abs(e - reference) for e in energies]
    if kind == "finest":
        errors = errors[:-1]
    orders = []
    for e0, e1 in zip(errors, errors[1:]):
        if e0 == 0.0 and e1 == 0.0:
            orders.append(math.inf)
        elif e1 == 0.0:
            orders.append(math.inf)
        else:
            orders.append(math.log2(e0 / e1))
    return ConvergenceResult(
        label=label,
        samples_per_delta=tuple(ladder),
        energies=tuple(energies),
        errors=tuple(errors),
        orders=tuple(orders),
        reference=reference,
        reference_kind=kind,
    )


# ---------------------------------------------------------------------------
# sandwich check (regimes with matching exponents)


@dataclass(frozen=True)
class SandwichReport:
    ratios: tuple[float, ...]
    variation: float
    passed: bool
    regime: str


def sandwich_check(
    points: list[Params], samples_per_delta: int = 12, max_variation: float = 5.0
) -> SandwichReport:
    """Construction energy over lower-bound scaling across matched regimes.

    Only boundedness of the ratio's variation is asserted (the bounds'
    constants are unknown); mixing regimes A and D is rejected.
    """
    if not points:
        raise ValueError("sandwich check needs at least one point")
    labels = {classify(p.sigma, p.gamma).label for p in points}
    if not labels <= {"A", "D"}:
        raise ValueError(f"sandwich check applies to regimes A and D, got {sorted(labels)}")
    if len(labels) > 1:
        raise ValueError("sandwich check points must share a regime")
    ratios = []
    for p in points:
        _, eb, _ = best_construction_energy(p, samples_per_delta)
        ratios.append(eb.total / lower_bound_scaling(p.sigma, p.gamma, p.l1, p.l2))
    variation = max(ratios) / min(ratios)
    return SandwichReport(
        ratios=tuple(ratios),
        variation=variation,
        passed=variation <= max_variation,
        regime=labels.pop(),
    )


# ---------------------------------------------------------------------------
# Poincare property check


@dataclass(frozen=True)
class PoincareResult:
    n: int
    max_ratio: float
    bound: float
    passed: bool
    ratios: tuple[float, ...]


def _random_half_supported_field(
    rng: np.random.Generator, xg: np.ndarray, yg: np.ndarray
) -> tuple[np.ndarray, ...]:
    """Random smooth 2-component field vanishing on a half of the unit square.

    Components are sums of tensor-product fold bumps with random centers,
    radii, and coefficients, supported in the allowed half. Returns
    (f1, f2, f1x, f1y, f2x, f2y) with analytic partial derivatives.
    """
    side = int(rng.integers(0, 4))  # half left free: 0 right, 1 left, 2 top, 3 bottom
    x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if side == 0:
        x0 = 0.5
    elif side == 1:
        x1 = 0.5
    elif side == 2:
        y0 = 0.5
    else:
        y1 = 0.5
    psi = RAISED_COSINE
    out: list[np.ndarray] = []
    grads: list[np.ndarray] = []
    for _ in range(2):
        f = np.zeros((xg.size, yg.size))
        fx = np.zeros_like(f)
        fy = np.zeros_like(f)
        for _ in range(3):
            rx = rng.uniform(0.06, 0.5 * (x1 - x0))
            ry = rng.uniform(0.06, 0.5 * (y1 - y0))
            cx = rng.uniform(x0 + rx, x1 - rx)
            cy = rng.uniform(y0 + ry, y1 - ry)
            c = rng.normal()
            tx = (xg - cx) / rx
            ty = (yg - cy) / ry
            bx, by = psi(tx), psi(ty)
            dbx, dby = psi.d1(tx) / rx, psi.d1(ty) / ry
            f += c * np.outer(bx, by)
            fx += c * np.outer(dbx, by)
            fy += c * np.outer(bx, dby)
        out.append(f)
        grads.extend([fx, fy])
    return out[0], out[1], grads[0], grads[1], grads[2], grads[3]


def poincare_ratio(fields: tuple[np.ndarray, ...], wts: np.ndarray) -> float:
    f1, f2, f1x, f1y, f2x, f2y = fields
    num = float(np.sum(wts * (f1 * f1 + f2 * f2)))
    den = float(np.sum(wts * (f1x * f1x + f1y * f1y + f2x * f2x + f2y * f2y)))
    if den == 0.0:
        return 0.0
    return num / den


def poincare_check(n: int, seed: int = 7, grid_n: int = 129) -> PoincareResult:
    """Half-supported random smooth fields obey the Poincare bound 6/pi^2.

    Integrals use trapezoid quadrature on a uniform grid with analytic
    gradients of the generated fields.
    """
    if n < 1:
        raise ValueError("need n >= 1 samples")
    rng = np.random.default_rng(seed)
    xg = np.linspace(0.0, 1.0, grid_n)
    yg = np.linspace(0.0, 1.0, grid_n)
    wts = np.outer(trapezoid_weights(grid_n, xg[1] - xg[0]),
                   trapezoid_weights(grid_n, yg[1] - yg[0]))
    ratios = []
    for _ in range(n):
        fields = _random_half_supported_field(rng, xg, yg)
        ratios.append(poincare_ratio(fields, wts))
    max_ratio = max(ratios)
    return PoincareResult(
        n=n,
        max_ratio=max_ratio,
        bound=POINCARE_CONSTANT,
        passed=max_ratio <= POINCARE_CONSTANT,
        ratios=tuple(ratios),
    )
