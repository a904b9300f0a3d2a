"""Obstacle-constrained local minimization of the discrete film energy.

Projected gradient descent on (u, v, w): gradient of the smooth part
(stretching + bending, plain stencils), backtracking on the total energy
including the non-smooth bonding term, then projection onto the feasible
set (w >= 0, clamped edge values, zero discrete clamp slope).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .energy import (
    adjoint_diff_x,
    adjoint_diff_xx,
    adjoint_diff_y,
    adjoint_diff_yy,
    diff_x,
    diff_xx,
    diff_xy,
    diff_y,
    diff_yy,
    evaluate_energy,
    quad_weights,
)
from .field import DisplacementField, EnergyBreakdown


@dataclass(frozen=True)
class MinimizeOptions:
    max_iters: int = 200
    rel_tol: float = 1e-8          # relative energy decrease considered progress
    step0: float = 1e-2
    backtrack: float = 0.5
    armijo: float = 1e-4
    min_step: float = 1e-14
    patience: int = 10             # consecutive stalled iterations before stopping
    project_obstacle: bool = True

    def __post_init__(self) -> None:
        if self.rel_tol <= 0.0 or self.step0 <= 0.0 or self.min_step <= 0.0:
            raise ValueError("tolerances and step sizes must be positive")
        if not (0.0 < self.backtrack < 1.0):
            raise ValueError("backtracking factor must lie in (0, 1)")
        if self.max_iters < 1 or self.patience < 1:
            raise ValueError("iteration counts must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    stretching: float
    bending: float
    bonding: float
    total: float
    step: float

    CSV_FIELDS = ("iteration", "stretching", "bending", "bonding", "total", "step")


@dataclass
class MinimizeResult:
    field: DisplacementField
    log: list[IterationRecord] = dc_field(default_factory=list)
    converged: bool = False
    message: str = ""

    @property
    def initial(self) -> float:
        return self.log[0].total

    @property
    def final(self) -> float:
        return self.log[-1].total


def _numeric_field(field: DisplacementField) -> DisplacementField:
    out = field.copy()
    out.analytic_mask = False
    return out


def discrete_gradient(
    field: DisplacementField,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact gradient of the discrete stretching + bending energy.

    The bonding term only changes when the support set changes and carries no
    gradient. Clamped-edge slots (the x = 0 row) are zeroed.
    """
    field.validate_finite()
    g, p = field.grid, field.params
    hx, hy = g.hx, g.hy
    wts = quad_weights(g)
    u, v, w = field.u, field.v, field.w

    wx = diff_x(w, hx)
    wy = diff_y(w, hy)
    s1 = 2.0 * diff_x(u, hx) + wx * wx - 1.0
    s2 = diff_y(u, hy) + diff_x(v, hx) + wx * wy
    s3 = 2.0 * diff_y(v, hy) + wy * wy - 1.0

    gu = adjoint_diff_x(4.0 * wts * s1, hx) + adjoint_diff_y(4.0 * wts * s2, hy)
    gv = adjoint_diff_x(4.0 * wts * s2, hx) + adjoint_diff_y(4.0 * wts * s3, hy)
    gw = adjoint_diff_x(wts * (4.0 * s1 * wx + 4.0 * s2 * wy), hx) + adjoint_diff_y(
        wts * (4.0 * s2 * wx + 4.0 * s3 * wy), hy
    )

    kappa = p.sl1**2
    wxx = diff_xx(w, hx)
    wxy = diff_xy(w, hx, hy)
    wyy = diff_yy(w, hy)
    gw += kappa * (
        adjoint_diff_xx(2.0 * wts * wxx, hx)
        + adjoint_diff_y(adjoint_diff_x(4.0 * wts * wxy, hx), hy)
        + adjoint_diff_yy(2.0 * wts * wyy, hy)
    )

    if field.clamped:
        gu[0] = 0.0
        gv[0] = 0.0
        gw[0] = 0.0
    return gu, gv, gw


def smooth_energy(field: DisplacementField) -> float:
    """Stretching + bending with the plain stencils (the differentiated part)."""
    eb = evaluate_energy(_numeric_field(field))
    return eb.stretching + eb.bending


def project(field: DisplacementField, opts: MinimizeOptions) -> DisplacementField:
    """Project onto the feasible set: obstacle, clamp values, clamp slope."""
    out = field
    if opts.project_obstacle:
        np.maximum(out.w, 0.0, out=out.w)
    if out.clamped:
        out.u[0] = 0.0
        out.v[0] = 0.0
        out.w[0] = out.clamp_height
        # zero one-sided clamp slope: (-3 w0 + 4 w1 - w2) / (2 hx) = 0
        out.w[1] = 0.25 * (3.0 * out.w[0] + out.w[2])
    out.support_mask = out.w > 0.0
    return out


def minimize(field0: DisplacementField, opts: MinimizeOptions | None = None) -> MinimizeResult:
    """Projected gradient descent from an admissible seed.

    The logged total energy is non-increasing across accepted steps; iterates
    stay feasible. If no descent step exists at the smallest step size the
    seed is returned unchanged with a diagnostic.
    """
    opts = opts or MinimizeOptions()
    current = project(_numeric_field(field0), opts)
    eb = evaluate_energy(current)
    log = [IterationRecord(0, eb.stretching, eb.bending, eb.bonding, eb.total, 0.0)]
    energy = eb.total
    step = opts.step0
    stalled = 0
    moved = False

    for it in range(1, opts.max_iters + 1):
        gu, gv, gw = discrete_gradient(current)
        gnorm2 = float(np.sum(gu * gu) + np.sum(gv * gv) + np.sum(gw * gw))
        if gnorm2 == 0.0:
            return MinimizeResult(current, log, True, "zero gradient")
        accepted = False
        while step >= opts.min_step:
            trial = current.copy()
            trial.u -= step * gu
            trial.v -= step * gv
            trial.w -= step * gw
            trial = project(trial, opts)
            eb_t = evaluate_energy(trial)
            if eb_t.total <= energy - opts.armijo * step * gnorm2:
                accepted = True
                break
            step *= opts.backtrack
        if not accepted:
            if not moved:
                return MinimizeResult(
                    current, log, False,
                    "no descent step found at the smallest step size",
                )
            return MinimizeResult(current, log, True, "descent exhausted")
        decrease = energy - eb_t.total
        current, energy = trial, eb_t.total
        moved = True
        log.append(
            IterationRecord(it, eb_t.stretching, eb_t.bending, eb_t.bonding,
                            eb_t.total, step)
        )
        stalled = stalled + 1 if decrease < opts.rel_tol * max(abs(energy), 1.0) else 0
        if stalled >= opts.patience:
            return MinimizeResult(current, log, True, "energy decrease below tolerance")
        step /= opts.backtrack  # let the step grow again after a success
    return MinimizeResult(current, log, True, "iteration cap reached")


def final_breakdown(result: MinimizeResult) -> EnergyBreakdown:
    return evaluate_energy(_numeric_field(result.field))
