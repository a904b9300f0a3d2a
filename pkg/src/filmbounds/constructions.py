"""Explicit test displacement fields: flat, laminate, and branching patterns.

All constructions are admissible (clamped edge at x = 0, w >= 0) and built so
their membrane (stretching) residuals cancel not just analytically but on the
sample grid: the cosine laminate carries amplitudes matched to the
centered-difference operators, and the bump-profile fold cells are
renormalized per cell so the discrete fold-area normalization holds exactly.
Both corrections are O(h^2) perturbations of the analytic formulas and vanish
under grid refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import diff_x, diff_y, evaluate_energy
from .field import DisplacementField, EnergyBreakdown
from .grid import Grid, cumulative_trapezoid
from .params import Params
from .profiles import (  # noqa: F401  (MOLLIFIER re-exported for callers)
    MOLLIFIER,
    RAISED_COSINE,
    BumpProfile,
    bump_derivative_sq_integral,
    cubic_ramp,
    fold_center_curve,
    fold_width_curve,
    smoothstep5,
)

FLAT = "flat"
LAMINATE = "laminate"
BRANCHING = "branching"


def _sinc(x: float) -> float:
    return 1.0 if x == 0.0 else math.sin(x) / x


# Strict-inside guard for analytic support predicates: nodes within an ulp of
# the fold edge would otherwise classify differently between equivalent
# samplings of the same periodic pattern, moving the delamination front by a
# row. The excluded sliver carries O(eps^2) of displacement.
INSIDE_GUARD = 1.0 - 1e-12


def _inside_fold(t: np.ndarray, half_width) -> np.ndarray:
    return np.abs(t) < half_width * INSIDE_GUARD


# ---------------------------------------------------------------------------
# flat construction


def flat_construction(params: Params, grid: Grid | None = None) -> DisplacementField:
    """Fully bonded film relaxing in-plane compression: (u, v, w) = (x/2, 0, 0)."""
    if grid is None:
        grid = Grid(nx=33, ny=33, lx=params.l1, ly=params.l2)
    x = grid.x()
    shape = grid.shape
    u = np.broadcast_to(0.5 * x[:, None], shape).copy()
    zeros = np.zeros(shape)
    return DisplacementField(
        u=u,
        v=zeros.copy(),
        w=zeros.copy(),
        support_mask=np.zeros(shape, dtype=bool),
        grid=grid,
        params=params,
        clamped=True,
        analytic_mask=True,
        meta={"construction": FLAT, "full_domain": True},
    )


def flat_energy(params: Params) -> EnergyBreakdown:
    """Closed-form energy of the flat construction: area times 1."""
    return EnergyBreakdown(stretching=params.l1 * params.l2, bending=0.0, bonding=0.0)


# ---------------------------------------------------------------------------
# cosine laminate profile (single fold per period, bonded in between)


@dataclass(frozen=True)
class LaminateCellSpec:
    """One periodicity cell: fold of half-width delta in a period of 2h."""

    h: float
    delta: float
    l: float
    d: float = 0.0  # additive constant in u

    def __post_init__(self) -> None:
        if not (0.0 < self.delta <= self.h):
            raise ValueError(f"need 0 < delta <= h, got delta={self.delta}, h={self.h}")
        if self.l <= 0.0:
            raise ValueError("cell length l must be positive")

    @property
    def amplitude(self) -> float:
        """Fold height fixed by continuity of v: A^2 = (8 / pi^2) delta h."""
        return math.sqrt(8.0 * self.delta * self.h) / math.pi


def cell_energy_closed_form(spec: LaminateCellSpec, params: Params) -> float:
    """2 pi^2 (sigma l1)^2 l h / delta^2 + 2 gamma l delta."""
    return (
        2.0 * math.pi**2 * params.sl1**2 * spec.l * spec.h / spec.delta**2
        + 2.0 * params.gamma * spec.l * spec.delta
    )


def _cosine_rows(
    y_local: np.ndarray, h: float, delta: float, hy: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(w, v, mask) rows of the cosine fold profile at local y in [-h, h].

    The fold amplitude carries a 1/sinc(k hy) factor and the oscillatory part
    of v a 1/sinc(2 k hy) factor so that the sampled profile keeps
    2 D_y v + (D_y w)^2 - 1 = 0 under the centered difference D_y. Both
    factors tend to 1 as hy -> 0.
    """
    k = math.pi / delta
    a_exact = math.sqrt(8.0 * delta * h) / math.pi
    a_comp = a_exact / _sinc(k * hy)
    b = 0.5 * h / delta  # v-slope coefficient, fixed by continuity at |y| = delta
    s2 = _sinc(2.0 * k * hy)

    inside = _inside_fold(y_local, delta)
    w = np.where(inside, 0.5 * a_comp * (1.0 + np.cos(k * y_local)), 0.0)
    v_mid = 0.5 * y_local - b * (y_local - np.sin(2.0 * k * y_local) / (2.0 * k * s2))
    v_out = 0.5 * (y_local - np.sign(y_local) * h)
    v = np.where(inside, v_mid, v_out)
    return w, v, inside


def laminate_cell(
    spec: LaminateCellSpec, grid: Grid, params: Params
) -> DisplacementField:
    """Single x-independent fold cell on (0, l) x (-h, h); zero stretching."""
    y = grid.y()
    w_row, v_row, mask_row = _cosine_rows(y, spec.h, spec.delta, grid.hy)
    x = grid.x()
    shape = grid.shape
    u = np.broadcast_to(0.5 * x[:, None] + spec.d, shape).copy()
    v = np.broadcast_to(v_row[None, :], shape).copy()
    w = np.broadcast_to(w_row[None, :], shape).copy()
    mask = np.broadcast_to(mask_row[None, :], shape).copy()
    return DisplacementField(
        u=u,
        v=v,
        w=w,
        support_mask=mask,
        grid=grid,
        params=params,
        clamped=False,
        analytic_mask=True,
        meta={"construction": "laminate_cell", "h": spec.h, "delta": spec.delta,
              "A": spec.amplitude},
    )


def _periodic_local(y: np.ndarray, h: float, y_cut: float) -> tuple[np.ndarray, np.ndarray]:
    """Local fold coordinate in [-h, h] per 2h-period, and the pattern mask."""
    pattern = y < y_cut - 1e-12 * max(1.0, y_cut)
    period = 2.0 * h
    y_local = y - period * np.floor(y / period) - h
    return np.where(pattern, y_local, h), pattern


def laminate_boundary_layer(
    eps: float,
    h: float,
    delta: float,
    l2: float,
    grid: Grid,
    params: Params,
) -> DisplacementField:
    """Clamped-edge interpolation layer on (0, eps) x (0, l2).

    w and v ramp from zero at x = 0 to the periodic fold profile at x = eps
    via the cubic ramp (for v its square); u = x/2 throughout. Periods that do
    not fit below l2 are left flat (u = x/2, v = w = 0).
    """
    if not (0.0 < delta <= eps):
        raise ValueError(f"need 0 < delta <= eps, got delta={delta}, eps={eps}")
    if not (delta <= h <= l2):
        raise ValueError(f"need delta <= h <= l2, got delta={delta}, h={h}, l2={l2}")
    y_cut = 2.0 * h * math.floor(l2 / (2.0 * h) + 1e-12)
    y_local, pattern = _periodic_local(grid.y(), h, y_cut)
    w_row, v_row, mask_row = _cosine_rows(y_local, h, delta, grid.hy)
    w_row = np.where(pattern, w_row, 0.0)
    v_row = np.where(pattern, v_row, 0.0)
    mask_row = mask_row & pattern

    x = grid.x()
    ramp = cubic_ramp(x / eps)
    u = np.broadcast_to(0.5 * x[:, None], grid.shape).copy()
    v = ramp[:, None] ** 2 * v_row[None, :]
    w = ramp[:, None] * w_row[None, :]
    mask = (ramp[:, None] > 0.0) & mask_row[None, :]
    return DisplacementField(
        u=u,
        v=v,
        w=w,
        support_mask=mask,
        grid=grid,
        params=params,
        clamped=True,
        analytic_mask=True,
        meta={"construction": "laminate_boundary_layer", "eps": eps, "h": h,
              "delta": delta, "y_cut": y_cut},
    )


def laminate_scales(params: Params) -> tuple[float, float, float]:
    """(h, delta, eps) of the full laminate: h = l1 (sigma gamma)^{2/5},
    delta = l1 sigma^{4/5} gamma^{-1/5}, eps = h."""
    s, g, l1 = params.sigma, params.gamma, params.l1
    if g < 1.0:
        raise ValueError(f"laminate construction needs gamma >= 1, got {g}")
    if s * g > 1.0 + 1e-12:
        raise ValueError(f"laminate construction needs sigma*gamma <= 1, got {s * g}")
    h = l1 * (s * g) ** 0.4
    delta = l1 * s**0.8 * g ** (-0.2)
    return h, delta, h


def laminate_full(
    params: Params,
    grid: Grid | None = None,
    samples_per_delta: int = 12,
    h: float | None = None,
    delta: float | None = None,
    eps: float | None = None,
) -> DisplacementField:
    """Periodic fold pattern interpolated to the clamped edge (regime B).

    The balance scales may be overridden individually; overrides must keep
    0 < delta <= min(eps, h), h <= l2, and eps < l1.
    """
    h0, d0, e0 = laminate_scales(params)
    h = h0 if h is None else h
    delta = d0 if delta is None else delta
    eps = e0 if eps is None else eps
    if not (0.0 < delta <= min(eps, h) and h <= params.l2 and eps < params.l1):
        raise ValueError(
            f"inadmissible laminate scales h={h}, delta={delta}, eps={eps}"
        )
    if grid is None:
        grid = Grid.for_rectangle(
            lx=params.l1, ly=params.l2,
            hx_target=eps / samples_per_delta,
            hy_target=delta / samples_per_delta,
            max_nodes=60_000_000,
        )
    l2 = params.l2
    y_cut = 2.0 * h * math.floor(l2 / (2.0 * h) + 1e-12)
    y_local, pattern = _periodic_local(grid.y(), h, y_cut)
    w_row, v_row, mask_row = _cosine_rows(y_local, h, delta, grid.hy)
    w_row = np.where(pattern, w_row, 0.0)
    v_row = np.where(pattern, v_row, 0.0)
    mask_row = mask_row & pattern

    x = grid.x()
    ramp = np.where(x < eps, cubic_ramp(x / eps), 1.0)
    u = np.broadcast_to(0.5 * x[:, None], grid.shape).copy()
    v = ramp[:, None] ** 2 * v_row[None, :]
    w = ramp[:, None] * w_row[None, :]
    mask = (ramp[:, None] > 0.0) & mask_row[None, :]
    return DisplacementField(
        u=u,
        v=v,
        w=w,
        support_mask=mask,
        grid=grid,
        params=params,
        clamped=True,
        analytic_mask=True,
        meta={
            "construction": LAMINATE,
            "full_domain": True,
            "h": h,
            "delta": delta,
            "eps": eps,
            "y_cut": y_cut,
        },
    )


# ---------------------------------------------------------------------------
# in-plane reconstruction from w (fold cells)


def uv_from_w(
    w: np.ndarray,
    hx: float,
    hy: float,
    h: float,
    x: np.ndarray | None = None,
    rtol: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray]:
    """Reconstruct (u, v) from w on (0, l) x (-h, h) so stretching cancels.

    v = (1/2) int_{-h}^{y} (1 - w_y^2), u = x/2 - int_{-h}^{y} (w_x w_y + v_x),
    with centered-difference derivative samples and cumulative trapezoid
    integrals. Rejects w whose fold-area normalization (the integrated form
    int_{-h}^{h} (1 - w_y^2) dy = 0 of the per-half-cell condition) is
    violated beyond ``rtol`` relative to 2h.
    """
    if w.ndim != 2:
        raise ValueError("w must be a 2-d array of samples")
    wy = diff_y(w, hy)
    f = 0.5 * (1.0 - wy * wy)
    v = cumulative_trapezoid(f, hy, axis=1)
    resid = float(np.max(np.abs(v[:, -1]))) / h
    if resid > rtol:
        raise ValueError(
            f"fold-area normalization violated: residual {resid:.3e} > rtol {rtol:.0e}"
        )
    if x is None:
        x = hx * np.arange(w.shape[0])
    wx = diff_x(w, hx)
    vx = diff_x(v, hx)
    u = 0.5 * np.asarray(x, dtype=float)[:, None] - cumulative_trapezoid(
        wx * wy + vx, hy, axis=1
    )
    return u, v


def renormalize_fold_columns(w: np.ndarray, hy: float, h: float) -> np.ndarray:
    """Scale each column so the discrete integral of (D_y w)^2 over the cell
    equals 2h (the discrete fold-area normalization), assuming one cell spans
    the full second axis."""
    wy = diff_y(w, hy)
    integral = np.sum(
        0.5 * hy * (wy[:, 1:] ** 2 + wy[:, :-1] ** 2), axis=1
    )
    scale = np.sqrt(2.0 * h / integral)
    return w * scale[:, None]


# ---------------------------------------------------------------------------
# fold splitting / shrinkage cells (mollifier profile)


def _split_w_tilde(
    y: np.ndarray, phi: np.ndarray, delta: float, psi: BumpProfile
) -> np.ndarray:
    """psi_delta(y + phi) + psi_delta(y - phi) on a (columns, rows) block."""
    return psi((y[None, :] + phi[:, None]) / delta) + psi(
        (y[None, :] - phi[:, None]) / delta
    )


def _split_amplitude(
    phi: np.ndarray, h: float, delta: float, psi: BumpProfile
) -> np.ndarray:
    """A(x) with A^2 int_0^h w~_y^2 dy = h, by composite trapezoid in y.

    Uses at least 64 quadrature points per fold width.
    """
    y_top = min(h, float(np.max(phi)) + delta)
    nq = int(math.ceil(y_top / (delta / 64.0))) + 1
    nq = max(nq, 129)
    yq = np.linspace(0.0, y_top, nq)
    dy = yq[1] - yq[0]
    wty = (
        psi.d1((yq[None, :] + phi[:, None]) / delta)
        + psi.d1((yq[None, :] - phi[:, None]) / delta)
    ) / delta
    sq = wty * wty
    integral = dy * (np.sum(sq, axis=1) - 0.5 * (sq[:, 0] + sq[:, -1]))
    return np.sqrt(h / integral)


def fold_split_cell(
    h: float,
    delta_next: float,
    length: float,
    grid: Grid,
    params: Params,
    psi: BumpProfile = RAISED_COSINE,
) -> DisplacementField:
    """One fold at x = L splitting into two folds at +-h/2 at x = 0.

    Cell on (0, L) x (-h, h); fold half-width delta_next <= h/2 throughout.
    """
    if not (0.0 < delta_next <= 0.5 * h):
        raise ValueError(f"need 0 < delta <= h/2, got delta={delta_next}, h={h}")
    if h > length:
        raise ValueError(f"need h <= L, got h={h}, L={length}")
    x = grid.x()
    y = grid.y()
    phi = fold_center_curve(x, h, length)
    amp = _split_amplitude(phi, h, delta_next, psi)
    w = amp[:, None] * _split_w_tilde(y, phi, delta_next, psi)
    w = renormalize_fold_columns(w, grid.hy, h)
    u, v = uv_from_w(w, grid.hx, grid.hy, h, x=x)
    mask = _inside_fold(y[None, :] + phi[:, None], delta_next) | _inside_fold(
        y[None, :] - phi[:, None], delta_next
    )
    return DisplacementField(
        u=u,
        v=v,
        w=w,
        support_mask=mask,
        grid=grid,
        params=params,
        clamped=False,
        analytic_mask=True,
        meta={
            "construction": "fold_split_cell",
            "h": h,
            "delta": delta_next,
            "L": length,
            "A_min": float(np.min(amp)),
            "A_max": float(np.max(amp)),
        },
    )


def fold_shrink_cell(
    h: float,
    delta: float,
    lam: float,
    length: float,
    grid: Grid,
    params: Params,
    psi: BumpProfile = RAISED_COSINE,
) -> DisplacementField:
    """Single fold shrinking from half-width delta at x = L to lam*delta at x = 0."""
    if not (0.0 < delta <= h):
        raise ValueError(f"need 0 < delta <= h, got delta={delta}, h={h}")
    if not (0.25 <= lam <= 1.0):
        raise ValueError(f"shrink ratio must lie in [1/4, 1], got {lam}")
    if h > length:
        raise ValueError(f"need h <= L, got h={h}, L={length}")
    c_star = bump_derivative_sq_integral(psi)
    x = grid.x()
    y = grid.y()
    dhat = fold_width_curve(x, delta, lam, length)
    amp = np.sqrt(dhat * h / c_star)
    w = amp[:, None] * psi(y[None, :] / dhat[:, None])
    w = renormalize_fold_columns(w, grid.hy, h)
    u, v = uv_from_w(w, grid.hx, grid.hy, h, x=x)
    mask = _inside_fold(y[None, :], dhat[:, None])
    return DisplacementField(
        u=u,
        v=v,
        w=w,
        support_mask=mask,
        grid=grid,
        params=params,
        clamped=False,
        analytic_mask=True,
        meta={
            "construction": "fold_shrink_cell",
            "h": h,
            "delta": delta,
            "lambda": lam,
            "L": length,
            "A_min": float(np.min(amp)),
            "A_max": float(np.max(amp)),
            "c_star": c_star,
        },
    )


# ---------------------------------------------------------------------------
# branch schedule


GAMMA_GE_1 = "gamma_ge_1"
GAMMA_MID = "gamma_mid"
GAMMA_LT_SIGMA = "gamma_lt_sigma"

STRIP_ASPECT_FLOOR = 2.0  # minimum L_i / h_i of a branching strip


@dataclass(frozen=True)
class BranchSchedule:
    """Cascade of half-periods h_i, fold half-widths delta_i, strip half-widths
    L_i, boundary-layer width eps, and refinement count N.

    ``h0_formula`` is the balance value of the coarsest half-period before it
    is snapped to ``2^N h_N`` so the dyadic cascade ends exactly at the
    prescribed finest scale.
    """

    N: int
    h: tuple[float, ...]
    delta: tuple[float, ...]
    L: tuple[float, ...]
    eps: float
    h0_formula: float
    regime_case: str
    switch_index: int

    @property
    def h0(self) -> float:
        return self.h[0]

    @property
    def delta0(self) -> float:
        return self.delta[0]

    @property
    def hN(self) -> float:
        return self.h[-1]

    @property
    def deltaN(self) -> float:
        return self.delta[-1]

    def validate(self) -> None:
        for i in range(self.N + 1):
            if not self.delta[i] <= self.h[i] * (1.0 + 1e-12):
                raise AssertionError(f"delta_{i} > h_{i}")
        for i in range(self.N):
            if not self.h[i] <= self.L[i] * (1.0 + 1e-12):
                raise AssertionError(f"h_{i} > L_{i}")
            if not (0.25 * self.delta[i] <= self.delta[i + 1] <= self.delta[i] * (1.0 + 1e-12)):
                raise AssertionError(f"delta_{i + 1} outside [delta_{i}/4, delta_{i}]")
            if not math.isclose(self.h[i + 1], 0.5 * self.h[i], rel_tol=1e-12):
                raise AssertionError(f"h_{i + 1} != h_{i}/2")


def branch_schedule(params: Params) -> BranchSchedule:
    """Refinement cascade of the self-similar branching construction.

    The finest scale h_N (and eps, delta_N) follows the two-case choice
    (sigma l1 gamma for gamma >= 1, sigma l1 otherwise); the coarsest
    half-period balances bulk against branching energy and is snapped to a
    dyadic multiple of h_N. Requires gamma <= sigma^{-4/9}.
    """
    s, g, l1 = params.sigma, params.gamma, params.l1
    if g > s ** (-4.0 / 9.0) * (1.0 + 1e-12):
        raise ValueError(
            f"branching needs gamma <= sigma^(-4/9) = {s ** (-4.0 / 9.0):.4g}, got {g}"
        )
    sl1 = s * l1
    if g >= 1.0:
        case = GAMMA_GE_1
        h_fine = sl1 * g
        h0_formula = l1 * s**0.25 * g ** (1.0 / 16.0)
    elif g >= s:
        case = GAMMA_MID
        h_fine = sl1
        h0_formula = l1 * s**0.25 * g ** (1.0 / 16.0)
    else:
        case = GAMMA_LT_SIGMA
        h_fine = sl1
        h0_formula = l1 * math.sqrt(s)

    if h0_formula <= h_fine:
        n = 0
    else:
        n = int(math.floor(math.log2(h0_formula / h_fine)))
    h = tuple(h_fine * 2.0 ** (n - i) for i in range(n + 1))

    def delta_of(hi: float) -> float:
        if g == 0.0:
            return hi
        return min(hi, sl1 ** (2.0 / 3.0) * g ** (-1.0 / 3.0) * hi ** (1.0 / 3.0))

    delta = tuple(delta_of(hi) for hi in h)
    # Strip half-widths balance bending against the splitting cost. The lower
    # bound is a small multiple of h_i rather than h_i itself: near-square
    # cells make the fold centerlines slope steeply and the cross-curvature
    # term then dominates by (h/L)^4. The constant changes nothing
    # asymptotically (the second argument of the max wins for h_i >> finest).
    big_l = tuple(
        max(STRIP_ASPECT_FLOOR * h[i], sl1 ** (-0.5) * delta[i] ** 0.25 * h[i] ** 1.25)
        for i in range(n)
    )
    switch = -1
    if g > 0.0:
        thresh = sl1 * g ** (-0.5)
        for i in range(n - 1, -1, -1):
            if h[i] >= thresh:
                switch = i
                break
    sched = BranchSchedule(
        N=n,
        h=h,
        delta=delta,
        L=big_l,
        eps=h_fine,
        h0_formula=h0_formula,
        regime_case=case,
        switch_index=switch,
    )
    sched.validate()
    return sched


# ---------------------------------------------------------------------------
# assembled branching construction


def _cells_vu_from_w(
    w: np.ndarray,
    x: np.ndarray,
    hy: float,
    y: np.ndarray,
    bottoms: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """(u, v) reconstruction with per-cell integral resets.

    ``bottoms[j]`` is the y-coordinate of the bottom edge of the cell
    containing row j (equal to y[j] outside the pattern). Integrals restart
    at each cell bottom via linear interpolation of the cumulative values.
    """
    hx = x[1] - x[0] if len(x) > 1 else 1.0
    wy = diff_y(w, hy)

    def reset(cum: np.ndarray) -> np.ndarray:
        pos = np.clip((bottoms - y[0]) / hy, 0.0, len(y) - 1.0)
        i0 = np.minimum(pos.astype(int), len(y) - 2)
        frac = pos - i0
        base = cum[:, i0] * (1.0 - frac[None, :]) + cum[:, i0 + 1] * frac[None, :]
        return cum - base

    t1 = cumulative_trapezoid(0.5 * (1.0 - wy * wy), hy, axis=1)
    v = reset(t1)
    wx = diff_x(w, hx)
    vx = diff_x(v, hx)
    t2 = cumulative_trapezoid(wx * wy + vx, hy, axis=1)
    u = 0.5 * x[:, None] - reset(t2)
    return u, v


def _renorm_per_cell(
    w: np.ndarray, hy: float, y: np.ndarray, period: float, cell_index: np.ndarray
) -> np.ndarray:
    """Per-column, per-cell amplitude renormalization of a tiled fold field.

    Scales each cell so the discrete integral of (D_y w)^2 over the cell
    equals the period (the fold-area normalization in integrated form).
    """
    wy = diff_y(w, hy)
    t = cumulative_trapezoid(wy * wy, hy, axis=1)
    ncells = int(cell_index.max()) + 1 if cell_index.size else 0
    if ncells <= 0:
        return w
    bnds = y[0] + period * np.arange(ncells + 1)
    pos = np.clip((bnds - y[0]) / hy, 0.0, len(y) - 1.0)
    i0 = np.minimum(pos.astype(int), len(y) - 2)
    frac = pos - i0
    tb = t[:, i0] * (1.0 - frac[None, :]) + t[:, i0 + 1] * frac[None, :]
    integrals = tb[:, 1:] - tb[:, :-1]  # (ncols, ncells)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.sqrt(period / integrals)
    scale = np.where(np.isfinite(scale) & (integrals > 0.0), scale, 1.0)
    return w * scale[:, np.clip(cell_index, 0, ncells - 1)]


def _profile_block(
    y: np.ndarray,
    hy: float,
    h: float,
    y_cut: float,
    w_of_ylocal,
    mask_of_ylocal,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Periodic x-independent profile rows: (w, v, mask, bottoms, cell_index)."""
    period = 2.0 * h
    pattern = y < y_cut - 1e-12 * max(1.0, y_cut)
    cell_index = np.where(pattern, np.floor(y / period).astype(int), -1)
    y_local = np.where(pattern, y - (cell_index * period + h), h)
    w_row = np.where(pattern, w_of_ylocal(y_local), 0.0)
    mask_row = mask_of_ylocal(y_local) & pattern
    w2 = w_row[None, :]
    w2 = _renorm_per_cell(w2, hy, y, period, np.maximum(cell_index, 0))
    w_row = np.where(pattern, w2[0], 0.0)
    bottoms = np.where(pattern, cell_index * period, y)
    wy = diff_y(w_row[None, :], hy)
    t1 = cumulative_trapezoid(0.5 * (1.0 - wy * wy), hy, axis=1)[0]
    pos = np.clip((bottoms - y[0]) / hy, 0.0, len(y) - 1.0)
    i0 = np.minimum(pos.astype(int), len(y) - 2)
    frac = pos - i0
    v_row = t1 - (t1[i0] * (1.0 - frac) + t1[i0 + 1] * frac)
    v_row = np.where(pattern, v_row, 0.0)
    return w_row, v_row, mask_row, bottoms, cell_index


@dataclass(frozen=True)
class BranchLayout:
    """Realized geometry of the assembled branching construction.

    ``coarsest_level`` is the coarsest cascade level actually present: strips
    for levels N-1 down to ``coarsest_level`` are laid out left to right after
    the boundary layer, and the bulk laminate runs at that level's scales.
    Coarse strips that would push the layout past l1 are dropped entirely
    (restriction of the enlarged-domain construction to the physical domain),
    so no partial cells appear.
    """

    sched: BranchSchedule
    coarsest_level: int
    strip_x0: tuple[float, ...]  # start of each used strip, finest first
    bulk_x0: float
    y_cut: float

    @property
    def used_levels(self) -> tuple[int, ...]:
        return tuple(range(self.sched.N - 1, self.coarsest_level - 1, -1))

    @property
    def bulk_h(self) -> float:
        return self.sched.h[self.coarsest_level]

    @property
    def bulk_delta(self) -> float:
        return self.sched.delta[self.coarsest_level]


MAX_LAYOUT_FRACTION = 0.75  # cascade width allowed before coarse strips drop


def branch_layout(
    params: Params,
    sched: BranchSchedule | None = None,
    max_levels: int | None = None,
) -> BranchLayout:
    if sched is None:
        sched = branch_schedule(params)
    l1, l2 = params.l1, params.l2
    budget = MAX_LAYOUT_FRACTION * l1
    coarsest = sched.N
    extent = sched.eps
    cap = sched.N if max_levels is None else max(0, min(max_levels, sched.N))
    # add strips from the fine end while they fit
    for i in range(sched.N - 1, sched.N - 1 - cap, -1):
        if extent + 2.0 * sched.L[i] > budget:
            break
        extent += 2.0 * sched.L[i]
        coarsest = i
    strip_x0 = []
    x_off = sched.eps
    for i in range(sched.N - 1, coarsest - 1, -1):
        strip_x0.append(x_off)
        x_off += 2.0 * sched.L[i]
    bulk_h = sched.h[coarsest]
    y_cut = 2.0 * bulk_h * math.floor(l2 / (2.0 * bulk_h) + 1e-12)
    return BranchLayout(
        sched=sched,
        coarsest_level=coarsest,
        strip_x0=tuple(strip_x0),
        bulk_x0=x_off,
        y_cut=y_cut,
    )


def grid_for_branching(
    params: Params,
    samples_per_delta: int = 12,
    layout: BranchLayout | None = None,
    max_nodes: int = 30_000_000,
) -> Grid:
    if layout is None:
        layout = branch_layout(params)
    sched = layout.sched
    hy_t = sched.deltaN / samples_per_delta
    min_l = min((sched.L[i] for i in layout.used_levels), default=sched.eps)
    hx_t = min(sched.eps, min_l / 4.0) / samples_per_delta
    return Grid.for_rectangle(
        lx=params.l1, ly=params.l2, hx_target=hx_t, hy_target=hy_t, max_nodes=max_nodes
    )


def branching_full(
    params: Params,
    grid: Grid | None = None,
    samples_per_delta: int = 12,
    psi: BumpProfile = RAISED_COSINE,
    max_levels: int | None = None,
) -> DisplacementField:
    """Self-similar fold-branching construction (regimes C and D).

    Boundary layer at the finest scale, split/shrink cell strips for every
    cascade level that fits, and a fold laminate at the coarsest realized
    level in the bulk. Periods that do not fit below l2 are left flat.
    """
    sched = branch_schedule(params)
    layout = branch_layout(params, sched, max_levels)
    if grid is None:
        grid = grid_for_branching(params, samples_per_delta, layout)
    if grid.hy > sched.deltaN / 8.0 * (1.0 + 1e-9):
        raise ValueError(
            f"grid hy={grid.hy:.3g} does not resolve delta_N={sched.deltaN:.3g} "
            "with >= 8 samples"
        )
    l1 = params.l1
    c_star = bump_derivative_sq_integral(psi)
    x = grid.x()
    y = grid.y()
    hy = grid.hy
    y_cut = layout.y_cut

    u = np.broadcast_to(0.5 * x[:, None], grid.shape).copy()
    v = np.zeros(grid.shape)
    w = np.zeros(grid.shape)
    mask = np.zeros(grid.shape, dtype=bool)

    if y_cut > 0.0:
        amp_fine = math.sqrt(sched.deltaN * sched.hN / c_star)
        w_row, v_row, mask_row, _, _ = _profile_block(
            y, hy, sched.hN, y_cut,
            lambda yl: amp_fine * psi(yl / sched.deltaN),
            lambda yl: _inside_fold(yl, sched.deltaN),
        )
        cols = x <= sched.eps * (1.0 + 1e-12)
        ramp = cubic_ramp(x[cols] / sched.eps)
        w[cols] = ramp[:, None] * w_row[None, :]
        v[cols] = ramp[:, None] ** 2 * v_row[None, :]
        mask[cols] = (ramp[:, None] > 0.0) & mask_row[None, :]

        for i, x0 in zip(layout.used_levels, layout.strip_x0):
            cols = (x > x0 * (1.0 + 1e-12)) & (
                x <= min(x0 + 2.0 * sched.L[i], l1) + 1e-15
            )
            if np.count_nonzero(cols) < 2:
                continue
            _fill_strip(
                w, v, u, mask, cols, x, y, hy,
                h=sched.h[i],
                delta_lo=sched.delta[i + 1],
                delta_hi=sched.delta[i],
                big_l=sched.L[i],
                x0=x0,
                y_cut=y_cut,
                psi=psi,
                c_star=c_star,
            )

        if layout.bulk_x0 < l1:
            amp0 = math.sqrt(layout.bulk_delta * layout.bulk_h / c_star)
            w_row, v_row, mask_row, _, _ = _profile_block(
                y, hy, layout.bulk_h, y_cut,
                lambda yl: amp0 * psi(yl / layout.bulk_delta),
                lambda yl: _inside_fold(yl, layout.bulk_delta),
            )
            cols = x > layout.bulk_x0 * (1.0 + 1e-12)
            w[cols] = w_row[None, :]
            v[cols] = v_row[None, :]
            mask[cols] = mask_row[None, :]

    return DisplacementField(
        u=u,
        v=v,
        w=w,
        support_mask=mask,
        grid=grid,
        params=params,
        clamped=True,
        analytic_mask=True,
        meta={
            "construction": BRANCHING,
            "full_domain": True,
            "schedule": sched,
            "layout": layout,
            "y_cut": y_cut,
            "bulk_x0": layout.bulk_x0,
            "realized_bulk_width": max(0.0, l1 - layout.bulk_x0),
            "levels_used": len(layout.strip_x0),
        },
    )


def _fill_strip(
    w, v, u, mask, cols, x, y, hy,
    h: float,
    delta_lo: float,
    delta_hi: float,
    big_l: float,
    x0: float,
    y_cut: float,
    psi: BumpProfile,
    c_star: float,
) -> None:
    """Fill one branching strip: split cells on the left half, shrink on the right."""
    period = 2.0 * h
    pattern = y < y_cut - 1e-12 * max(1.0, y_cut)
    cell_index = np.where(pattern, np.floor(y / period).astype(int), -1)
    y_local = np.where(pattern, y - (cell_index * period + h), h)
    bottoms = np.where(pattern, cell_index * period, y)

    xl = x[cols] - x0
    split = xl <= big_l
    wb = np.zeros((xl.size, y.size))
    mb = np.zeros((xl.size, y.size), dtype=bool)

    if np.any(split):
        phi = fold_center_curve(xl[split], h, big_l)
        amp = _split_amplitude(phi, h, delta_lo, psi)
        wb[split] = amp[:, None] * (
            psi((y_local[None, :] + phi[:, None]) / delta_lo)
            + psi((y_local[None, :] - phi[:, None]) / delta_lo)
        )
        mb[split] = _inside_fold(y_local[None, :] + phi[:, None], delta_lo) | (
            _inside_fold(y_local[None, :] - phi[:, None], delta_lo)
        )
    shrink = ~split
    if np.any(shrink):
        lam = delta_lo / delta_hi
        dhat = fold_width_curve(xl[shrink] - big_l, delta_hi, lam, big_l)
        amp = np.sqrt(dhat * h / c_star)
        wb[shrink] = amp[:, None] * psi(y_local[None, :] / dhat[:, None])
        mb[shrink] = _inside_fold(y_local[None, :], dhat[:, None])

    wb[:, ~pattern] = 0.0
    mb[:, ~pattern] = False
    wb = _renorm_per_cell(wb, hy, y, period, np.maximum(cell_index, 0))
    wb[:, ~pattern] = 0.0
    ub, vb = _cells_vu_from_w(wb, x[cols], hy, y, bottoms)
    vb[:, ~pattern] = 0.0
    ub[:, ~pattern] = 0.5 * x[cols, None]

    w[cols] = wb
    v[cols] = vb
    u[cols] = ub
    mask[cols] = mb


# ---------------------------------------------------------------------------
# composite (per-cell) energy evaluation
#
# All constructions are periodic in y, and within each x-region every period
# repeats the same sampled cell. The energy of the assembled field therefore
# equals (per-cell energy) x (number of periods), summed over regions, up to
# stencil differences confined to cell edges where the fields are flat. The
# composite path evaluates one cell per region on its own small grid, which
# keeps extreme scale separations affordable; the delaminated area is taken
# from the constructions' exact support measure instead of mask counting.


def _cell_rows(h: float, delta_fine: float, samples_per_delta: int) -> int:
    ny = int(math.ceil(2.0 * h / (delta_fine / samples_per_delta))) + 1
    return max(ny, 9)


def _laminate_bl_cell(
    params: Params, eps: float, h: float, delta: float, samples_per_delta: int
) -> DisplacementField:
    ny = _cell_rows(h, delta, samples_per_delta)
    nx = 2 * samples_per_delta + 1
    grid = Grid(nx=nx, ny=ny, lx=eps, ly=2.0 * h, y0=-h)
    y = grid.y()
    w_row, v_row, mask_row = _cosine_rows(y, h, delta, grid.hy)
    x = grid.x()
    ramp = cubic_ramp(x / eps)
    return DisplacementField(
        u=np.broadcast_to(0.5 * x[:, None], grid.shape).copy(),
        v=ramp[:, None] ** 2 * v_row[None, :],
        w=ramp[:, None] * w_row[None, :],
        support_mask=(ramp[:, None] > 0.0) & mask_row[None, :],
        grid=grid,
        params=params,
        clamped=True,
        analytic_mask=True,
    )


def _breakdown_scale(eb: EnergyBreakdown, m: float) -> EnergyBreakdown:
    return EnergyBreakdown(eb.stretching * m, eb.bending * m, eb.bonding * m)


def _breakdown_sum(parts: list[EnergyBreakdown]) -> EnergyBreakdown:
    return EnergyBreakdown(
        stretching=float(math.fsum(p.stretching for p in parts)),
        bending=float(math.fsum(p.bending for p in parts)),
        bonding=float(math.fsum(p.bonding for p in parts)),
    )


def _with_bonding(eb: EnergyBreakdown, bonding: float) -> EnergyBreakdown:
    return EnergyBreakdown(eb.stretching, eb.bending, bonding)


def laminate_energy_composite(
    params: Params, samples_per_delta: int = 12
) -> tuple[EnergyBreakdown, dict]:
    h, delta, eps = laminate_scales(params)
    l1, l2, gamma = params.l1, params.l2, params.gamma
    y_cut = 2.0 * h * math.floor(l2 / (2.0 * h) + 1e-12)
    ncells = int(round(y_cut / (2.0 * h)))
    parts: list[EnergyBreakdown] = []
    info = {"h": h, "delta": delta, "eps": eps, "y_cut": y_cut, "ncells": ncells}
    if ncells > 0:
        bl = evaluate_energy(
            _laminate_bl_cell(params, eps, h, delta, samples_per_delta)
        )
        bl = _with_bonding(bl, gamma * eps * 2.0 * delta)
        parts.append(_breakdown_scale(bl, ncells))
        cell_l = l1 - eps
        if cell_l > 1e-12 * l1:
            ny = _cell_rows(h, delta, samples_per_delta)
            grid = Grid(nx=9, ny=ny, lx=cell_l, ly=2.0 * h, y0=-h)
            cell = laminate_cell(
                LaminateCellSpec(h=h, delta=delta, l=cell_l, d=0.5 * eps), grid, params
            )
            eb = _with_bonding(evaluate_energy(cell), gamma * cell_l * 2.0 * delta)
            parts.append(_breakdown_scale(eb, ncells))
    filler = EnergyBreakdown(l1 * (l2 - y_cut), 0.0, 0.0)
    parts.append(filler)
    return _breakdown_sum(parts), info


def _branching_bl_cell(
    params: Params,
    sched: BranchSchedule,
    psi: BumpProfile,
    c_star: float,
    samples_per_delta: int,
) -> DisplacementField:
    h, delta, eps = sched.hN, sched.deltaN, sched.eps
    ny = _cell_rows(h, delta, samples_per_delta)
    nx = 2 * samples_per_delta + 1
    grid = Grid(nx=nx, ny=ny, lx=eps, ly=2.0 * h, y0=-h)
    y = grid.y()
    amp = math.sqrt(delta * h / c_star)
    w_row = (amp * psi(y / delta))[None, :]
    w_row = renormalize_fold_columns(w_row, grid.hy, h)
    wy = diff_y(w_row, grid.hy)
    v_row = cumulative_trapezoid(0.5 * (1.0 - wy * wy), grid.hy, axis=1)[0]
    x = grid.x()
    ramp = cubic_ramp(x / eps)
    mask_row = _inside_fold(y, delta)
    return DisplacementField(
        u=np.broadcast_to(0.5 * x[:, None], grid.shape).copy(),
        v=ramp[:, None] ** 2 * v_row[None, :],
        w=ramp[:, None] * w_row[0][None, :],
        support_mask=(ramp[:, None] > 0.0) & mask_row[None, :],
        grid=grid,
        params=params,
        clamped=True,
        analytic_mask=True,
    )


def _bump_laminate_cell(
    params: Params,
    h: float,
    delta: float,
    length: float,
    psi: BumpProfile,
    c_star: float,
    samples_per_delta: int,
) -> DisplacementField:
    ny = _cell_rows(h, delta, samples_per_delta)
    grid = Grid(nx=9, ny=ny, lx=length, ly=2.0 * h, y0=-h)
    y = grid.y()
    amp = math.sqrt(delta * h / c_star)
    w_row = (amp * psi(y / delta))[None, :]
    w_row = renormalize_fold_columns(w_row, grid.hy, h)
    wy = diff_y(w_row, grid.hy)
    v_row = cumulative_trapezoid(0.5 * (1.0 - wy * wy), grid.hy, axis=1)[0]
    shape = grid.shape
    return DisplacementField(
        u=np.broadcast_to(0.5 * grid.x()[:, None], shape).copy(),
        v=np.broadcast_to(v_row[None, :], shape).copy(),
        w=np.broadcast_to(w_row[0][None, :], shape).copy(),
        support_mask=np.broadcast_to(_inside_fold(y, delta)[None, :], shape).copy(),
        grid=grid,
        params=params,
        clamped=False,
        analytic_mask=True,
    )


def _strip_pair_cell(
    params: Params,
    h: float,
    delta_lo: float,
    delta_hi: float,
    big_l: float,
    psi: BumpProfile,
    c_star: float,
    samples_per_delta: int,
) -> tuple[DisplacementField, float]:
    """One split + shrink cell pair on (0, 2L) x (-h, h) and its support area."""
    ny = _cell_rows(h, delta_lo, samples_per_delta)
    nx = 16 * samples_per_delta + 1
    grid = Grid(nx=nx, ny=ny, lx=2.0 * big_l, ly=2.0 * h, y0=-h)
    x = grid.x()
    y = grid.y()
    split = x <= big_l
    w = np.zeros(grid.shape)
    mask = np.zeros(grid.shape, dtype=bool)
    phi = fold_center_curve(x[split], h, big_l)
    amp = _split_amplitude(phi, h, delta_lo, psi)
    w[split] = amp[:, None] * (
        psi((y[None, :] + phi[:, None]) / delta_lo)
        + psi((y[None, :] - phi[:, None]) / delta_lo)
    )
    mask[split] = _inside_fold(y[None, :] + phi[:, None], delta_lo) | _inside_fold(
        y[None, :] - phi[:, None], delta_lo
    )
    lam = delta_lo / delta_hi
    dhat = fold_width_curve(x[~split] - big_l, delta_hi, lam, big_l)
    amp2 = np.sqrt(dhat * h / c_star)
    w[~split] = amp2[:, None] * psi(y[None, :] / dhat[:, None])
    mask[~split] = _inside_fold(y[None, :], dhat[:, None])
    w = renormalize_fold_columns(w, grid.hy, h)
    u, v = uv_from_w(w, grid.hx, grid.hy, h, x=x)
    field = DisplacementField(
        u=u, v=v, w=w, support_mask=mask, grid=grid, params=params,
        clamped=False, analytic_mask=True,
    )
    # exact support measure: union of two moving folds, plus the shrink fold
    xq = np.linspace(0.0, big_l, 513)
    phiq = fold_center_curve(xq, h, big_l)
    union = np.where(phiq >= delta_lo, 4.0 * delta_lo, 2.0 * (delta_lo + phiq))
    area_split = float(np.trapezoid(union, xq))
    dhatq = fold_width_curve(xq, delta_hi, lam, big_l)
    area_shrink = float(np.trapezoid(2.0 * dhatq, xq))
    return field, area_split + area_shrink


def branching_energy_composite(
    params: Params,
    samples_per_delta: int = 12,
    psi: BumpProfile = RAISED_COSINE,
    max_levels: int | None = None,
) -> tuple[EnergyBreakdown, dict]:
    if samples_per_delta < 8:
        raise ValueError(
            f"branching needs >= 8 samples per delta_N, got {samples_per_delta}"
        )
    sched = branch_schedule(params)
    layout = branch_layout(params, sched, max_levels)
    c_star = bump_derivative_sq_integral(psi)
    l1, l2, gamma = params.l1, params.l2, params.gamma
    y_cut = layout.y_cut
    info = {
        "schedule": sched,
        "layout": layout,
        "y_cut": y_cut,
        "levels_used": len(layout.strip_x0),
        "bulk_x0": layout.bulk_x0,
    }
    parts: list[EnergyBreakdown] = []
    if y_cut > 0.0:
        m_bl = int(round(y_cut / (2.0 * sched.hN)))
        bl = evaluate_energy(
            _branching_bl_cell(params, sched, psi, c_star, samples_per_delta)
        )
        bl = _with_bonding(bl, gamma * sched.eps * 2.0 * sched.deltaN)
        parts.append(_breakdown_scale(bl, m_bl))
        for i in layout.used_levels:
            cell, support = _strip_pair_cell(
                params, sched.h[i], sched.delta[i + 1], sched.delta[i],
                sched.L[i], psi, c_star, samples_per_delta,
            )
            eb = _with_bonding(evaluate_energy(cell), gamma * support)
            parts.append(_breakdown_scale(eb, int(round(y_cut / (2.0 * sched.h[i])))))
        bulk_w = l1 - layout.bulk_x0
        if bulk_w > 1e-12 * l1:
            cell = _bump_laminate_cell(
                params, layout.bulk_h, layout.bulk_delta, bulk_w, psi, c_star,
                samples_per_delta,
            )
            eb = _with_bonding(
                evaluate_energy(cell), gamma * bulk_w * 2.0 * layout.bulk_delta
            )
            parts.append(_breakdown_scale(eb, int(round(y_cut / (2.0 * layout.bulk_h)))))
    parts.append(EnergyBreakdown(l1 * (l2 - y_cut), 0.0, 0.0))
    return _breakdown_sum(parts), info


def pattern_period(kind: str, params: Params) -> float | None:
    """Coarsest y-period of a construction's fold tiling, if it has one."""
    if kind == LAMINATE:
        return 2.0 * laminate_scales(params)[0]
    if kind == BRANCHING:
        return 2.0 * branch_layout(params).bulk_h
    return None


def construction_energy(
    kind: str,
    params: Params,
    samples_per_delta: int = 12,
    psi: BumpProfile = RAISED_COSINE,
) -> tuple[EnergyBreakdown, dict]:
    """Energy of a named construction via the composite per-cell evaluation."""
    if kind == FLAT:
        return flat_energy(params), {}
    if kind == LAMINATE:
        return laminate_energy_composite(params, samples_per_delta)
    if kind == BRANCHING:
        return branching_energy_composite(params, samples_per_delta, psi)
    raise ValueError(f"unknown construction {kind!r}")


def best_construction_energy(
    params: Params, samples_per_delta: int = 12
) -> tuple[str, EnergyBreakdown, dict]:
    """Label, energy, and details of the cheapest applicable construction."""
    candidates: list[tuple[str, EnergyBreakdown, dict]] = [
        (FLAT, flat_energy(params), {})
    ]
    if laminate_applicable(params):
        eb, info = laminate_energy_composite(params, samples_per_delta)
        candidates.append((LAMINATE, eb, info))
    if branching_applicable(params):
        eb, info = branching_energy_composite(params, samples_per_delta)
        candidates.append((BRANCHING, eb, info))
    return min(candidates, key=lambda c: c[1].total)


# ---------------------------------------------------------------------------
# buffer-layer lift


def buffer_lift(field: DisplacementField, h_b: float) -> DisplacementField:
    """Prepend a bent-up layer raising the clamped edge to height h_b.

    The inner construction shifts right by the layer width eta (u gains
    eta/2); the new edge trace is w = h_b with zero slope. h_b = 0 returns
    the input unchanged.
    """
    if h_b < 0.0:
        raise ValueError("buffer height must be >= 0")
    if h_b == 0.0:
        return field
    p = field.params
    bound = p.l1 * min(p.sigma, p.sigma ** (-1.0) * p.gamma ** (-1.5) if p.gamma > 0 else math.inf)
    if h_b > bound * (1.0 + 1e-12):
        raise ValueError(
            f"buffer height {h_b} above admissible bound {bound:.4g}"
        )
    eta = math.sqrt(p.sl1 * h_b) * max(1.0, p.gamma) ** (-0.25)
    g = field.grid
    m = int(round(eta / g.hx))
    if m < 4:
        raise ValueError(
            f"grid hx={g.hx:.3g} does not resolve the lift layer eta={eta:.3g}"
        )
    eta_used = m * g.hx
    new_grid = Grid(
        nx=g.nx + m, ny=g.ny, lx=g.lx + eta_used, ly=g.ly, x0=g.x0, y0=g.y0
    )
    xs = new_grid.x()[: m + 1]
    ramp = smoothstep5(xs / eta_used)
    shape = (new_grid.nx, new_grid.ny)
    u = np.empty(shape)
    v = np.empty(shape)
    w = np.empty(shape)
    mask = np.empty(shape, dtype=bool)
    u[: m + 1] = 0.5 * xs[:, None]
    v[: m + 1] = 0.0
    w[: m + 1] = h_b * (1.0 - ramp)[:, None]
    mask[: m + 1] = (1.0 - ramp)[:, None] > 0.0
    u[m:] = field.u + 0.5 * eta_used
    v[m:] = field.v
    w[m:] = field.w
    mask[m:] = field.support_mask
    meta = dict(field.meta)
    meta.update({"buffer_height": h_b, "eta": eta, "eta_used": eta_used,
                 "lift_columns": m, "x_extension": eta_used})
    return DisplacementField(
        u=u,
        v=v,
        w=w,
        support_mask=mask,
        grid=new_grid,
        params=p,
        clamped=True,
        clamp_height=h_b,
        analytic_mask=field.analytic_mask,
        meta=meta,
    )


def lift_layer_energy(field: DisplacementField) -> EnergyBreakdown:
    """Energy of the lift layer of a buffer-lifted field (its first columns)."""
    m = field.meta.get("lift_columns")
    if m is None:
        raise ValueError("field does not carry a buffer lift")
    g = field.grid
    sub = Grid(nx=m + 1, ny=g.ny, lx=field.meta["eta_used"], ly=g.ly, x0=g.x0, y0=g.y0)
    piece = DisplacementField(
        u=field.u[: m + 1].copy(),
        v=field.v[: m + 1].copy(),
        w=field.w[: m + 1].copy(),
        support_mask=field.support_mask[: m + 1].copy(),
        grid=sub,
        params=field.params,
        clamped=False,
        analytic_mask=field.analytic_mask,
    )
    return evaluate_energy(piece)


# ---------------------------------------------------------------------------
# construction selection


def laminate_applicable(params: Params) -> bool:
    return params.gamma >= 1.0 and params.sigma * params.gamma <= 1.0 + 1e-12


def branching_applicable(params: Params) -> bool:
    return params.gamma <= params.sigma ** (-4.0 / 9.0) * (1.0 + 1e-12)


def best_construction(
    params: Params,
    grid: Grid | None = None,
    samples_per_delta: int = 12,
) -> tuple[DisplacementField, EnergyBreakdown, str]:
    """Cheapest of the applicable constructions; ties favour the simpler one.

    Preference order flat > laminate > branching on ties. With ``grid=None``
    each candidate is sampled on its own resolution-matched grid.
    """
    candidates: list[tuple[str, DisplacementField, EnergyBreakdown]] = []
    fl = flat_construction(params, grid)
    candidates.append((FLAT, fl, evaluate_energy(fl)))
    if laminate_applicable(params):
        lam = laminate_full(params, grid, samples_per_delta)
        candidates.append((LAMINATE, lam, evaluate_energy(lam)))
    if branching_applicable(params):
        br = branching_full(params, grid, samples_per_delta)
        candidates.append((BRANCHING, br, evaluate_energy(br)))
    best = min(candidates, key=lambda c: c[2].total)  # stable: earlier wins ties
    label, field, energy = best
    return field, energy, label
