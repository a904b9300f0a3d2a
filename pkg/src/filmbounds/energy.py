"""Discrete evaluation of the rescaled film energy and admissibility checks.

The energy of a sampled displacement field (u, v, w) splits into

* stretching: (2 u_x + w_x^2 - 1)^2 + 2 (u_y + v_x + w_x w_y)^2
  + (2 v_y + w_y^2 - 1)^2,
* bending: (sigma l1)^2 (w_xx^2 + 2 w_xy^2 + w_yy^2),
* bonding: gamma times the area of the delaminated set {w > 0}.

Derivatives use centered second-order differences in the interior and
one-sided second-order stencils at edges; integrals use the tensor-product
trapezoid rule. Analytic constructions are only piecewise smooth: their
curvature jumps across the delamination front, so for fields carrying an
analytic support mask the w_yy stencils never straddle the front (one-sided
stencils at front nodes, half quadrature weight there). Without this the
bending quadrature degrades to first order. Numeric fields (minimizer
iterates, loaded dumps) use the plain stencils everywhere, which is what
the energy gradient differentiates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import DisplacementField, EnergyBreakdown, support_mask_from_w, W_THRESHOLD_SCALE
from .grid import trapezoid_weights


# ---------------------------------------------------------------------------
# difference stencils (axis 0 = x, axis 1 = y) and their adjoints


def diff_x(a: np.ndarray, hx: float) -> np.ndarray:
    d = np.empty_like(a)
    c = 0.5 / hx
    d[1:-1] = (a[2:] - a[:-2]) * c
    d[0] = (-3.0 * a[0] + 4.0 * a[1] - a[2]) * c
    d[-1] = (3.0 * a[-1] - 4.0 * a[-2] + a[-3]) * c
    return d


def diff_y(a: np.ndarray, hy: float) -> np.ndarray:
    d = np.empty_like(a)
    c = 0.5 / hy
    d[:, 1:-1] = (a[:, 2:] - a[:, :-2]) * c
    d[:, 0] = (-3.0 * a[:, 0] + 4.0 * a[:, 1] - a[:, 2]) * c
    d[:, -1] = (3.0 * a[:, -1] - 4.0 * a[:, -2] + a[:, -3]) * c
    return d


def diff_xx(a: np.ndarray, hx: float) -> np.ndarray:
    d = np.empty_like(a)
    c = 1.0 / (hx * hx)
    d[1:-1] = (a[2:] - 2.0 * a[1:-1] + a[:-2]) * c
    d[0] = (2.0 * a[0] - 5.0 * a[1] + 4.0 * a[2] - a[3]) * c
    d[-1] = (2.0 * a[-1] - 5.0 * a[-2] + 4.0 * a[-3] - a[-4]) * c
    return d


def diff_yy(a: np.ndarray, hy: float) -> np.ndarray:
    d = np.empty_like(a)
    c = 1.0 / (hy * hy)
    d[:, 1:-1] = (a[:, 2:] - 2.0 * a[:, 1:-1] + a[:, :-2]) * c
    d[:, 0] = (2.0 * a[:, 0] - 5.0 * a[:, 1] + 4.0 * a[:, 2] - a[:, 3]) * c
    d[:, -1] = (2.0 * a[:, -1] - 5.0 * a[:, -2] + 4.0 * a[:, -3] - a[:, -4]) * c
    return d


def diff_xy(a: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """Mixed derivative as the composition of the two first-order stencils.

    In the interior this is the standard four-point cross difference.
    """
    return diff_x(diff_y(a, hy), hx)


def adjoint_diff_x(b: np.ndarray, hx: float) -> np.ndarray:
    out = np.zeros_like(b)
    c = 0.5 / hx
    out[2:] += c * b[1:-1]
    out[:-2] -= c * b[1:-1]
    out[0] += -3.0 * c * b[0]
    out[1] += 4.0 * c * b[0]
    out[2] += -c * b[0]
    out[-1] += 3.0 * c * b[-1]
    out[-2] += -4.0 * c * b[-1]
    out[-3] += c * b[-1]
    return out


def adjoint_diff_y(b: np.ndarray, hy: float) -> np.ndarray:
    out = np.zeros_like(b)
    c = 0.5 / hy
    out[:, 2:] += c * b[:, 1:-1]
    out[:, :-2] -= c * b[:, 1:-1]
    out[:, 0] += -3.0 * c * b[:, 0]
    out[:, 1] += 4.0 * c * b[:, 0]
    out[:, 2] += -c * b[:, 0]
    out[:, -1] += 3.0 * c * b[:, -1]
    out[:, -2] += -4.0 * c * b[:, -1]
    out[:, -3] += c * b[:, -1]
    return out


def adjoint_diff_xx(b: np.ndarray, hx: float) -> np.ndarray:
    out = np.zeros_like(b)
    c = 1.0 / (hx * hx)
    out[2:] += c * b[1:-1]
    out[1:-1] -= 2.0 * c * b[1:-1]
    out[:-2] += c * b[1:-1]
    for k, coef in enumerate((2.0, -5.0, 4.0, -1.0)):
        out[k] += coef * c * b[0]
        out[-1 - k] += coef * c * b[-1]
    return out


def adjoint_diff_yy(b: np.ndarray, hy: float) -> np.ndarray:
    out = np.zeros_like(b)
    c = 1.0 / (hy * hy)
    out[:, 2:] += c * b[:, 1:-1]
    out[:, 1:-1] -= 2.0 * c * b[:, 1:-1]
    out[:, :-2] += c * b[:, 1:-1]
    for k, coef in enumerate((2.0, -5.0, 4.0, -1.0)):
        out[:, k] += coef * c * b[:, 0]
        out[:, -1 - k] += coef * c * b[:, -1]
    return out


# ---------------------------------------------------------------------------
# quadrature helpers


def quad_weights(grid) -> np.ndarray:
    return np.outer(
        trapezoid_weights(grid.nx, grid.hx), trapezoid_weights(grid.ny, grid.hy)
    )


def _front_nodes(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Delamination-front nodes: mask-false with a mask-true y-neighbour.

    Returns (below, above): front nodes whose supporting side lies at smaller
    resp. larger y.
    """
    below = np.zeros_like(mask)
    above = np.zeros_like(mask)
    below[:, 1:] = mask[:, :-1] & ~mask[:, 1:]
    above[:, :-1] = mask[:, 1:] & ~mask[:, :-1]
    return below, above


def _wyy_squared_front_aware(
    w: np.ndarray, hy: float, mask: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(w_yy^2 integrand, nodewise weight factor) honoring the support front.

    Front nodes take one-sided stencils reaching into the support and a half
    quadrature weight; the outside limit of the curvature is zero there.
    """
    wyy = diff_yy(w, hy)
    sq = wyy * wyy
    below, above = _front_nodes(mask)
    # the third-order one-sided stencil needs four interior neighbours
    below[:, :4] = False
    above[:, -4:] = False
    factor = np.ones_like(w)
    front = below | above
    if not np.any(front):
        return sq, factor
    c = 1.0 / (12.0 * hy * hy)
    coeffs = (35.0, -104.0, 114.0, -56.0, 11.0)
    sq_front = np.zeros_like(w)
    ib, jb = np.nonzero(below)
    if ib.size:
        val = sum(coef * w[ib, jb - k] for k, coef in enumerate(coeffs)) * c
        sq_front[ib, jb] += val * val
    ia, ja = np.nonzero(above)
    if ia.size:
        val = sum(coef * w[ia, ja + k] for k, coef in enumerate(coeffs)) * c
        sq_front[ia, ja] += val * val
    sq = np.where(front, sq_front, sq)
    interior = np.zeros_like(front)
    interior[:, 1:-1] = front[:, 1:-1]
    factor[interior] = 0.5
    return sq, factor


def _closure_area(mask: np.ndarray, grid) -> float:
    """Area of the support closure by trapezoid counting.

    Front nodes (where w vanishes on the closure boundary) carry half a cell;
    this keeps the counted area second-order accurate for analytic masks.
    """
    wts = quad_weights(grid)
    m = mask.astype(float)
    neigh = np.zeros_like(mask)
    neigh[:, 1:] |= mask[:, :-1]
    neigh[:, :-1] |= mask[:, 1:]
    neigh[1:, :] |= mask[:-1, :]
    neigh[:-1, :] |= mask[1:, :]
    m[(~mask) & neigh] = 0.5
    return float(np.sum(wts * m))


def bonding_area(field: DisplacementField) -> float:
    """Delaminated area per the field's mask convention."""
    if field.analytic_mask:
        return _closure_area(field.support_mask, field.grid)
    mask = support_mask_from_w(field.w)
    return float(np.count_nonzero(mask)) * field.grid.hx * field.grid.hy


# ---------------------------------------------------------------------------
# energy evaluation


def _check_consistency(field: DisplacementField) -> None:
    g, p = field.grid, field.params
    if field.meta.get("full_domain", False):
        if abs(g.x0) > 1e-12 * max(1.0, p.l1):
            raise ValueError("clamped fields must start at x = 0")
        allowance = float(field.meta.get("x_extension", 0.0))
        if not math.isclose(g.lx, p.l1 + allowance, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(
                f"grid x-extent {g.lx} disagrees with params l1 = {p.l1}"
            )
        if not math.isclose(g.ly, p.l2, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(
                f"grid y-extent {g.ly} disagrees with params l2 = {p.l2}"
            )


def stretching_terms(
    u: np.ndarray, v: np.ndarray, w: np.ndarray, hx: float, hy: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three membrane residuals S1, S2, S3 of the component form."""
    wx = diff_x(w, hx)
    wy = diff_y(w, hy)
    s1 = 2.0 * diff_x(u, hx) + wx * wx - 1.0
    s2 = diff_y(u, hy) + diff_x(v, hx) + wx * wy
    s3 = 2.0 * diff_y(v, hy) + wy * wy - 1.0
    return s1, s2, s3


def evaluate_energy(field: DisplacementField) -> EnergyBreakdown:
    """Stretching, bending, and bonding energy of a sampled field."""
    field.validate_finite()
    _check_consistency(field)
    g, p = field.grid, field.params
    hx, hy = g.hx, g.hy
    wts = quad_weights(g)

    s1, s2, s3 = stretching_terms(field.u, field.v, field.w, hx, hy)
    stretching = float(np.sum(wts * (s1 * s1 + 2.0 * s2 * s2 + s3 * s3)))

    wxx = diff_xx(field.w, hx)
    wxy = diff_xy(field.w, hx, hy)
    if field.analytic_mask:
        wyy_sq, factor = _wyy_squared_front_aware(field.w, hy, field.support_mask)
        integrand = (wxx * wxx + 2.0 * wxy * wxy + wyy_sq) * factor
    else:
        wyy = diff_yy(field.w, hy)
        integrand = wxx * wxx + 2.0 * wxy * wxy + wyy * wyy
    bending = p.sl1**2 * float(np.sum(wts * integrand))

    bonding = p.gamma * bonding_area(field)
    return EnergyBreakdown(stretching=stretching, bending=bending, bonding=bonding)


# ---------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class Violation:
    kind: str
    magnitude: float
    where: str


@dataclass
class AdmissibilityReport:
    violations: list[Violation] = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, magnitude: float, where: str) -> None:
        self.violations.append(Violation(kind, float(magnitude), where))

    def __iter__(self):
        return iter(self.violations)

    def __len__(self) -> int:
        return len(self.violations)


def clamp_slope_tolerance(field: DisplacementField) -> float:
    """Discretization-consistent bound for the one-sided w_x at the clamp.

    A field with w = w_x = 0 at x = 0 has one-sided derivative bounded by
    ~2 hx max|w_xx| near the edge; values above a small multiple of that
    indicate a genuine slope violation rather than truncation noise.
    """
    g = field.grid
    ncols = min(4, g.nx)
    m2 = float(np.max(np.abs(diff_xx(field.w, g.hx)[:ncols])))
    wmax = float(np.max(np.abs(field.w))) if field.w.size else 0.0
    return 4.0 * g.hx * m2 + 1e-9 * max(1.0, wmax)


def check_admissible(
    field: DisplacementField,
    value_tol: float = 1e-12,
    positivity_tol: float = 1e-12,
    deriv_tol: float | None = None,
) -> AdmissibilityReport:
    """Report all violations of the clamped admissible class.

    Checks w >= 0, the mask contract (mask false implies w = 0 up to the
    numeric threshold), and, for clamped fields, the edge conditions
    u = v = 0, w = clamp_height, and vanishing one-sided x-derivative of w.
    An empty report means the field is admissible at sample precision.
    """
    report = AdmissibilityReport()
    w = field.w
    wmin = float(np.min(w))
    if wmin < -positivity_tol:
        i, j = np.unravel_index(np.argmin(w), w.shape)
        report.add("positivity", -wmin, f"node ({i}, {j})")

    off = ~field.support_mask
    if np.any(off):
        tau = W_THRESHOLD_SCALE * max(1.0, float(np.max(np.abs(w))))
        worst = float(np.max(np.abs(w[off])))
        if worst > max(value_tol, tau):
            report.add("mask", worst, "w nonzero off the support mask")

    if field.clamped:
        for name, arr, target in (
            ("clamped_u", field.u, 0.0),
            ("clamped_v", field.v, 0.0),
            ("clamped_w", w, field.clamp_height),
        ):
            worst = float(np.max(np.abs(arr[0] - target)))
            if worst > value_tol:
                j = int(np.argmax(np.abs(arr[0] - target)))
                report.add(name, worst, f"edge node (0, {j})")
        hx = field.grid.hx
        slope = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * hx)
        tol = clamp_slope_tolerance(field) if deriv_tol is None else deriv_tol
        worst = float(np.max(np.abs(slope)))
        if worst > tol:
            j = int(np.argmax(np.abs(slope)))
            report.add("clamped_slope", worst, f"edge node (0, {j})")
    return report
