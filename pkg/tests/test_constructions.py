import math

import numpy as np
import pytest

from conftest import cell_grid

from filmbounds.constructions import (
    BRANCHING,
    FLAT,
    GAMMA_GE_1,
    GAMMA_LT_SIGMA,
    GAMMA_MID,
    LAMINATE,
    LaminateCellSpec,
    best_construction,
    best_construction_energy,
    branch_layout,
    branch_schedule,
    branching_energy_composite,
    branching_full,
    buffer_lift,
    cell_energy_closed_form,
    construction_energy,
    flat_construction,
    flat_energy,
    fold_shrink_cell,
    fold_split_cell,
    laminate_boundary_layer,
    laminate_cell,
    laminate_energy_composite,
    laminate_full,
    laminate_scales,
    lift_layer_energy,
    uv_from_w,
)
from filmbounds.energy import check_admissible, evaluate_energy
from filmbounds.grid import Grid
from filmbounds.params import Params
from filmbounds.profiles import RAISED_COSINE, bump_derivative_sq_integral


# ---------------------------------------------------------------------------
# flat construction


def test_flat_energy_and_admissibility(unit_params, unit_grid):
    f = flat_construction(unit_params, unit_grid)
    eb = evaluate_energy(f)
    assert eb.total == pytest.approx(unit_params.l1 * unit_params.l2, abs=1e-13)
    assert eb.bonding == 0.0
    assert check_admissible(f).ok
    assert flat_energy(unit_params).total == unit_params.l1 * unit_params.l2


# ---------------------------------------------------------------------------
# laminate pieces


def test_laminate_amplitude_formula():
    spec = LaminateCellSpec(h=1.0, delta=0.25, l=1.0)
    assert spec.amplitude == pytest.approx(math.sqrt(2.0) / math.pi, rel=1e-12)
    with pytest.raises(ValueError):
        LaminateCellSpec(h=0.2, delta=0.3, l=1.0)


def test_laminate_cell_stretching_vanishes(unit_params):
    spec = LaminateCellSpec(h=1.0, delta=0.25, l=1.0)
    params = Params(sigma=0.1, gamma=1.0, l1=1.0, l2=2.0)
    prev = None
    for spd in (12, 24):
        f = laminate_cell(spec, cell_grid(spec.h, spec.delta, spec.l, spd), params)
        eb = evaluate_energy(f)
        ratio = eb.stretching / eb.total
        assert ratio < 1e-3
        if prev is not None:
            assert eb.stretching < prev / 3.5  # at least second-order decay
        prev = eb.stretching


def test_boundary_layer_traces():
    eps, h, delta, l2 = 0.2, 0.25, 0.1, 1.0
    params = Params(sigma=0.05, gamma=1.0, l1=1.0, l2=l2)
    spd = 10
    g = Grid(nx=41, ny=int(round(l2 / (delta / spd))) + 1, lx=eps, ly=l2)
    f = laminate_boundary_layer(eps, h, delta, l2, g, params)
    # clamped trace at x = 0
    assert np.all(f.u[0] == 0.0)
    assert np.all(f.v[0] == 0.0)
    assert np.all(f.w[0] == 0.0)
    assert check_admissible(f).ok
    # trace at x = eps equals the cell profile
    from filmbounds.constructions import _cosine_rows, _periodic_local

    y_local, pattern = _periodic_local(g.y(), h, 2.0 * h * math.floor(l2 / (2 * h)))
    w_row, v_row, _ = _cosine_rows(y_local, h, delta, g.hy)
    w_row = np.where(pattern, w_row, 0.0)
    assert np.allclose(f.w[-1], w_row, atol=1e-14)


def test_boundary_layer_rejects_bad_widths(unit_params):
    g = Grid(nx=11, ny=41, lx=0.05, ly=1.0)
    with pytest.raises(ValueError):
        laminate_boundary_layer(0.05, 0.25, 0.1, 1.0, g, unit_params)  # delta > eps


def test_boundary_layer_energy_envelope():
    # measured envelope constant is ~4; the bound form is the contract
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(10):
        h = rng.uniform(0.05, 0.3)
        delta = rng.uniform(0.2, 1.0) * h
        eps = rng.uniform(1.0, 3.0) * max(delta, 0.3 * h)
        sig = rng.uniform(0.01, 0.2)
        gam = rng.uniform(0.0, 3.0)
        p = Params(sig, gam, 1.0, 1.0)
        spd = 10
        g = Grid(nx=2 * spd + 1, ny=int(np.ceil(1.0 / (delta / spd))) + 1,
                 lx=eps, ly=1.0)
        eb = evaluate_energy(laminate_boundary_layer(eps, h, delta, 1.0, g, p))
        bound = h * h / eps + eps + p.sl1**2 * eps / delta**2 + gam * eps * delta / h
        worst = max(worst, eb.total / bound)
    assert worst <= 50.0
    assert worst <= 5.0  # recorded envelope for this construction


def test_laminate_scales_example():
    h, delta, eps = laminate_scales(Params(0.01, 10.0))
    assert h == pytest.approx(0.1**0.4, rel=1e-12)
    assert h == pytest.approx(0.39811, abs=1e-5)
    assert delta == pytest.approx(0.015849, abs=1e-6)
    assert eps == h


def test_laminate_scales_geometry_holds():
    rng = np.random.default_rng(11)
    for _ in range(50):
        sig = rng.uniform(1e-4, 0.3)
        gam = rng.uniform(1.0, 1.0 / sig)
        p = Params(sig, gam)
        h, delta, eps = laminate_scales(p)
        assert delta <= h * (1 + 1e-12)
        assert h <= p.l2
        assert eps <= p.l1


def test_laminate_scales_hypotheses():
    with pytest.raises(ValueError):
        laminate_scales(Params(0.01, 0.5))   # gamma < 1
    with pytest.raises(ValueError):
        laminate_scales(Params(0.5, 3.0))    # sigma gamma > 1


def test_laminate_full_admissible_and_bounded():
    p = Params(0.01, 10.0, 1.0, 1.0)
    f = laminate_full(p, samples_per_delta=10)
    assert check_admissible(f).ok
    eb = evaluate_energy(f)
    scale = p.area * (p.sigma * p.gamma) ** 0.4
    assert 0.0 < eb.total <= 20.0 * scale


def test_laminate_composite_matches_assembled():
    p = Params(0.02, 8.0, 1.0, 1.0)
    h, _, _ = laminate_scales(p)
    l2 = 2.0 * h * math.ceil(1.0 / (2.0 * h))  # whole periods: no filler
    p = p.with_l2(l2)
    assembled = evaluate_energy(laminate_full(p, samples_per_delta=10))
    composite, _ = laminate_energy_composite(p, samples_per_delta=10)
    # the assembled grid is not fold-aligned: its bonding count and front
    # quadrature carry O(hy) alignment offsets the composite path avoids
    assert composite.total == pytest.approx(assembled.total, rel=0.04)


# ---------------------------------------------------------------------------
# uv reconstruction


def test_uv_from_w_rejects_unnormalized():
    g = cell_grid(0.25, 0.1, 0.5, 8)
    w = np.zeros(g.shape)
    with pytest.raises(ValueError, match="normalization"):
        uv_from_w(w, g.hx, g.hy, 0.25)


def test_uv_from_w_matches_laminate_closed_form():
    # reconstructed v converges to the closed-form cell profile at second order
    spec = LaminateCellSpec(h=0.25, delta=0.1, l=0.5)
    params = Params(0.1, 1.0, 1.0, 1.0)
    errs = []
    for spd in (8, 16, 32):
        g = cell_grid(spec.h, spec.delta, spec.l, spd, nx=33)
        cell = laminate_cell(spec, g, params)
        # closed-form samples satisfy the discrete fold-area normalization
        # only to O(hy^2); pass an explicit tolerance for the roundtrip
        u, v = uv_from_w(cell.w, g.hx, g.hy, spec.h, x=g.x(), rtol=0.05)
        errs.append(float(np.max(np.abs(v - cell.v))))
        assert np.max(np.abs(u - 0.5 * g.x()[:, None])) < 1e-10
    assert errs[0] / errs[1] > 3.0
    assert errs[1] / errs[2] > 3.0


# ---------------------------------------------------------------------------
# fold cells


SPLIT = dict(h=0.2, delta=0.05, length=0.4)
CELL_P = Params(0.1, 1.0, 1.0, 1.0)


def _split_field(spd=12, nx=129):
    g = cell_grid(SPLIT["h"], SPLIT["delta"], SPLIT["length"], spd, nx=nx)
    return fold_split_cell(SPLIT["h"], SPLIT["delta"], SPLIT["length"], g, CELL_P)


def test_split_cell_amplitude_bounds():
    f = _split_field()
    scale = math.sqrt(SPLIT["h"] * SPLIT["delta"])
    assert f.meta["A_min"] >= 0.1 * scale
    assert f.meta["A_max"] <= 10.0 * scale


def test_split_cell_traces():
    f = _split_field()
    g = f.grid
    y = g.y()
    h, delta = SPLIT["h"], SPLIT["delta"]
    # two bumps at +- h/2 on the left edge, one merged bump at the right edge
    left = f.w[0]
    right = f.w[-1]
    assert left[np.argmin(np.abs(y - 0.5 * h))] > 0.0
    assert left[np.argmin(np.abs(y + 0.5 * h))] > 0.0
    assert left[np.argmin(np.abs(y))] == 0.0
    assert right[np.argmin(np.abs(y))] == pytest.approx(np.max(right))
    assert np.all(right[np.abs(y) > delta] == 0.0)


def test_split_cell_boundary_contract():
    # u = x/2 and v = 0 on the cell boundary, at every resolution
    for spd in (8, 16):
        g = cell_grid(SPLIT["h"], SPLIT["delta"], SPLIT["length"], spd, nx=97)
        f = fold_split_cell(SPLIT["h"], SPLIT["delta"], SPLIT["length"], g, CELL_P)
        x = g.x()
        u_err = max(
            float(np.max(np.abs(f.u[:, 0] - 0.5 * x))),
            float(np.max(np.abs(f.u[:, -1] - 0.5 * x))),
            float(np.max(np.abs(f.u[0] - 0.0))),
            float(np.max(np.abs(f.u[-1] - 0.5 * g.lx))),
        )
        v_err = max(float(np.max(np.abs(f.v[:, 0]))), float(np.max(np.abs(f.v[:, -1]))))
        assert u_err < 1e-10
        assert v_err < 1e-12


def test_split_cell_energy_envelope():
    f = _split_field()
    eb = evaluate_energy(f)
    h, delta, length = SPLIT["h"], SPLIT["delta"], SPLIT["length"]
    terms = (
        CELL_P.gamma * delta * length
        + CELL_P.sl1**2 * length * h / delta**2
        + h**6 / (delta * length**3)
    )
    assert eb.total <= 40.0 * terms  # recorded envelope constant


def test_split_cell_rejects_bad_inputs(unit_params):
    g = cell_grid(0.2, 0.05, 0.4, 8)
    with pytest.raises(ValueError):
        fold_split_cell(0.2, 0.15, 0.4, g, unit_params)  # delta > h/2
    with pytest.raises(ValueError):
        fold_split_cell(0.2, 0.05, 0.1, g, unit_params)  # h > L


def test_shrink_cell_amplitude_closed_form():
    h, delta, lam, length = 0.2, 0.08, 0.5, 0.4
    g = cell_grid(h, lam * delta, length, 10, nx=97)
    f = fold_shrink_cell(h, delta, lam, length, g, CELL_P)
    c_star = bump_derivative_sq_integral(RAISED_COSINE)
    from filmbounds.profiles import fold_width_curve

    x = g.x()
    dhat = fold_width_curve(x, delta, lam, length)
    expected = np.sqrt(dhat * h / c_star)
    # renormalization perturbs the amplitude at O(hy^2)
    measured = np.max(f.w, axis=1)
    assert np.allclose(measured, expected, rtol=0.02)


def test_shrink_cell_lambda_one_is_x_independent():
    h, delta, length = 0.2, 0.08, 0.4
    g = cell_grid(h, delta, length, 10, nx=65)
    f = fold_shrink_cell(h, delta, 1.0, length, g, CELL_P)
    assert np.max(np.abs(f.w - f.w[0][None, :])) < 1e-12
    eb = evaluate_energy(f)
    assert eb.stretching / eb.total < 1e-3


def test_shrink_cell_rejects_bad_lambda(unit_params):
    g = cell_grid(0.2, 0.05, 0.4, 8)
    with pytest.raises(ValueError):
        fold_shrink_cell(0.2, 0.05, 0.1, 0.4, g, unit_params)


def test_shrink_step_cheaper_than_split_step():
    # the two halves of one refinement step, at matched final fold width
    for h, d_next, lam, length in [(0.2, 0.05, 0.5, 0.4), (0.1, 0.04, 0.8, 0.3)]:
        g = cell_grid(h, d_next, length, 12, nx=97)
        split = evaluate_energy(fold_split_cell(h, d_next, length, g, CELL_P))
        shrink = evaluate_energy(
            fold_shrink_cell(h, d_next / lam, lam, length, g, CELL_P)
        )
        assert shrink.total < split.total


# ---------------------------------------------------------------------------
# branch schedule


def test_schedule_example_gamma_one():
    s = branch_schedule(Params(0.01, 1.0))
    assert s.regime_case == GAMMA_GE_1
    assert s.h0_formula == pytest.approx(0.31623, abs=1e-5)
    assert s.hN == pytest.approx(0.01, rel=1e-12)
    assert s.eps == pytest.approx(0.01, rel=1e-12)
    assert s.N == 4
    assert s.deltaN == pytest.approx(0.01 * 1.0, rel=1e-12)
    # cube-root branch everywhere since h_i >= sigma l1 gamma^{-1/2}
    for i in range(s.N + 1):
        assert s.delta[i] == pytest.approx(0.01 ** (2 / 3) * s.h[i] ** (1 / 3), rel=1e-12)
    assert s.switch_index == s.N - 1


def test_schedule_example_gamma_below_sigma():
    s = branch_schedule(Params(0.04, 0.0001))
    assert s.regime_case == GAMMA_LT_SIGMA
    assert s.h0_formula == pytest.approx(0.2, rel=1e-12)
    assert s.hN == pytest.approx(0.04, rel=1e-12)
    assert s.deltaN == pytest.approx(0.04, rel=1e-12)


def test_schedule_mid_case_and_switch_index():
    s = branch_schedule(Params(1e-4, 0.01))
    assert s.regime_case == GAMMA_MID
    assert s.hN == pytest.approx(1e-4, rel=1e-12)
    idx = s.switch_index
    thresh = 1e-4 * 0.01 ** (-0.5)
    assert idx >= 0
    assert s.h[idx] >= thresh
    if idx + 1 < s.N:
        assert s.h[idx + 1] < thresh
    for i in range(s.N + 1):
        if i <= idx:
            expected = (1e-4) ** (2 / 3) * 0.01 ** (-1 / 3) * s.h[i] ** (1 / 3)
            assert s.delta[i] == pytest.approx(expected, rel=1e-12)
        else:
            assert s.delta[i] == s.h[i]


def test_schedule_rejects_large_gamma():
    with pytest.raises(ValueError):
        branch_schedule(Params(0.01, 100.0))


def test_schedule_degenerates_to_no_branching():
    # h0 формула <= h_N forces N = 0
    s = branch_schedule(Params(0.2, 1.0))  # h0f = 0.2^{1/4} ~ 0.669, hN = 0.2 -> N = 1
    assert s.N >= 0
    s2 = branch_schedule(Params(0.9, 1.0))
    assert s2.N in (0, 1)


def test_schedule_invariants_random():
    rng = np.random.default_rng(123)
    for _ in range(50):
        sig = float(np.exp(rng.uniform(np.log(1e-4), np.log(0.5))))
        gmax = sig ** (-4.0 / 9.0)
        gam = 0.0 if rng.random() < 0.2 else float(
            np.exp(rng.uniform(np.log(1e-6), np.log(gmax)))
        )
        s = branch_schedule(Params(sig, gam))
        s.validate()
        expected_hn = sig * gam if gam >= 1.0 else sig
        assert s.hN == pytest.approx(expected_hn, rel=1e-12)


# ---------------------------------------------------------------------------
# assembled branching construction


def test_branching_full_admissible_and_scaled():
    p = Params(0.0625, 0.0, 1.0, 1.0)
    f = branching_full(p, samples_per_delta=8)
    assert check_admissible(f).ok
    eb = evaluate_energy(f)
    assert 0.0 < eb.total
    assert eb.bonding == 0.0  # gamma = 0
    assert eb.total <= 300.0 * p.sigma  # recorded envelope constant


def test_branching_rejects_underresolved_grid():
    p = Params(0.0625, 0.0, 1.0, 1.0)
    g = Grid(nx=65, ny=33, lx=1.0, ly=1.0)  # hy ~ delta_N / 2
    with pytest.raises(ValueError, match="resolve"):
        branching_full(p, grid=g)


def test_branching_trace_continuity_at_interfaces():
    # region interfaces sit on plateaus: adjacent columns agree to machine
    # precision once both sides sample the same fold profile
    p = Params(0.0625, 0.1, 1.0, 1.0)
    sched = branch_schedule(p)
    layout = branch_layout(p, sched)
    # aligned grid: hy divides 2 h_N, eps lands on a node
    spd = 8
    hy = 2.0 * sched.hN / (2 * int(round(sched.hN / (sched.deltaN / spd))))
    ny = int(round(1.0 / hy)) + 1
    hx = sched.eps / 16
    nx = int(round(1.0 / hx)) + 1
    f = branching_full(p, grid=Grid(nx=nx, ny=ny, lx=1.0, ly=1.0))
    x = f.grid.x()
    y = f.grid.y()
    wscale = float(np.max(np.abs(f.w)))
    y_cut = f.meta["y_cut"]
    # rows away from the domain-edge periods, where the per-cell amplitude
    # normalization is free of one-sided-stencil edge effects
    period0 = 2.0 * f.meta["layout"].bulk_h
    inner = (y > period0) & (y < y_cut - period0)

    def jump(i_left, i_right, rows):
        return float(np.max(np.abs(f.w[i_right][rows] - f.w[i_left][rows])))

    # boundary-layer trace (ramp = 1 at x = eps, on a node by construction)
    # against the first split-cell column, which sits on its flat plateau
    i_eps = int(np.argmin(np.abs(x - sched.eps)))
    assert abs(x[i_eps] - sched.eps) < 1e-12
    assert jump(i_eps, i_eps + 1, inner) <= 1e-12 * wscale
    assert jump(i_eps, i_eps + 1, slice(None)) <= 1e-4 * wscale
    # strip-to-strip and strip-to-bulk interfaces: both sides are plateaued
    for xi in list(layout.strip_x0[1:]) + [layout.bulk_x0]:
        i = int(np.searchsorted(x, xi))
        if i < 1 or i + 1 >= f.grid.nx:
            continue
        assert jump(i - 1, i + 1, inner) <= 1e-12 * wscale
        assert jump(i - 1, i + 1, slice(None)) <= 1e-4 * wscale


def test_branching_composite_matches_assembled():
    p = Params(0.0625, 0.0, 1.0, 1.0)
    assembled = evaluate_energy(branching_full(p, samples_per_delta=8))
    composite, _ = branching_energy_composite(p, samples_per_delta=8)
    assert composite.total == pytest.approx(assembled.total, rel=0.05)


def test_branching_gamma_zero_support_is_full_pattern():
    p = Params(0.0625, 0.0, 1.0, 1.0)
    f = branching_full(p, samples_per_delta=8)
    y_cut = f.meta["y_cut"]
    frac = float(np.count_nonzero(f.support_mask)) / f.support_mask.size
    assert frac > 0.5 * y_cut  # delaminated almost everywhere below the cut


# ---------------------------------------------------------------------------
# buffer lift


def test_buffer_lift_zero_height_identity(unit_params, unit_grid):
    f = flat_construction(unit_params, unit_grid)
    assert buffer_lift(f, 0.0) is f


def test_buffer_lift_eta_formula():
    p = Params(0.01, 4.0, 1.0, 1.0)
    f = flat_construction(p, Grid(nx=8193, ny=17, lx=1.0, ly=1.0))
    lifted = buffer_lift(f, 1e-4)
    assert lifted.meta["eta"] == pytest.approx(7.071e-4, abs=2e-7)


def test_buffer_lift_traces_and_admissibility():
    p = Params(0.05, 1.0, 1.0, 1.0)
    f = flat_construction(p, Grid(nx=2049, ny=17, lx=1.0, ly=1.0))
    lifted = buffer_lift(f, 1e-3)
    assert np.all(lifted.w[0] == 1e-3)
    assert lifted.clamp_height == 1e-3
    assert check_admissible(lifted).ok
    # inner shift u -> u + eta/2
    eta = lifted.meta["eta_used"]
    m = lifted.meta["lift_columns"]
    assert np.allclose(lifted.u[m:], f.u + 0.5 * eta)


def test_buffer_lift_rejects_out_of_range():
    p = Params(0.05, 1.0, 1.0, 1.0)
    f = flat_construction(p, Grid(nx=1025, ny=17, lx=1.0, ly=1.0))
    with pytest.raises(ValueError, match="bound"):
        buffer_lift(f, 1.0)


def test_buffer_lift_layer_energy_bounded():
    ratios = []
    for sig, gam, hb in [(0.05, 1.0, 1e-3), (0.05, 2.0, 5e-4), (0.1, 0.5, 2e-3)]:
        p = Params(sig, gam, 1.0, 1.0)
        f = flat_construction(p, Grid(nx=2049, ny=17, lx=1.0, ly=1.0))
        lifted = buffer_lift(f, hb)
        layer = lift_layer_energy(lifted)
        ratios.append(layer.total / (math.sqrt(sig * hb) * max(1.0, gam) ** 0.75))
    assert max(ratios) / min(ratios) <= 5.0
    assert max(ratios) <= 30.0  # recorded envelope constant


# ---------------------------------------------------------------------------
# selection


def test_best_construction_regime_a():
    p = Params(0.01, 200.0, 1.0, 1.0)
    field, eb, label = best_construction(p)
    assert label == FLAT
    assert eb.total == pytest.approx(1.0, abs=1e-12)


def test_best_construction_energy_examples():
    label, eb, _ = best_construction_energy(Params(0.01, 200.0))
    assert label == FLAT and eb.total == 1.0
    label, eb, _ = best_construction_energy(Params(1e-4, 0.0))
    assert label == BRANCHING
    assert eb.total < 1.0
    # laminate never enters at gamma < 1; branching never at gamma > sigma^{-4/9}
    label, _, _ = best_construction_energy(Params(0.3, 0.0))
    assert label in (FLAT, BRANCHING)


def test_construction_energy_dispatch():
    with pytest.raises(ValueError):
        construction_energy("nope", Params(0.01, 1.0))


# ---------------------------------------------------------------------------
# recorded scaling envelopes


def test_laminate_full_envelope_recorded():
    # total energy over l1 l2 (sigma gamma)^{2/5}: bounded across a sigma sweep
    ratios = []
    for sig in (0.004, 0.01, 0.02, 0.05):
        p = Params(sig, 10.0, 1.0, 1.0)
        eb, _ = laminate_energy_composite(p, samples_per_delta=10)
        ratios.append(eb.total / ((sig * 10.0) ** 0.4))
    assert max(ratios) <= 12.0  # recorded envelope constant


def test_branching_envelope_recorded():
    # total energy over l1 l2 (sigma^{1/2} gamma^{5/8} + sigma) across C and D
    ratios = []
    for sig, gam in [(1e-4, 1.0), (1e-4, 0.01), (0.001, 0.1), (0.01, 0.0),
                     (0.002, 0.0)]:
        p = Params(sig, gam, 1.0, 1.0)
        eb, _ = branching_energy_composite(p, samples_per_delta=8)
        ratios.append(eb.total / (sig**0.5 * gam**0.625 + sig))
    assert max(ratios) <= 250.0  # recorded envelope constant


def test_branching_composite_rejects_underresolved():
    with pytest.raises(ValueError, match="samples per delta"):
        branching_energy_composite(Params(0.01, 0.0), samples_per_delta=4)


def test_branching_levels_cap():
    eb_full, info_full = branching_energy_composite(Params(0.0625, 0.0))
    eb_cap, info_cap = branching_energy_composite(Params(0.0625, 0.0), max_levels=1)
    assert info_cap["levels_used"] == 1
    assert info_cap["levels_used"] <= info_full["levels_used"]


def test_laminate_override_scales():
    p = Params(0.02, 8.0, 1.0, 1.0)
    f = laminate_full(p, samples_per_delta=6, h=0.3, delta=0.02, eps=0.25)
    assert f.meta["h"] == 0.3 and f.meta["delta"] == 0.02 and f.meta["eps"] == 0.25
    with pytest.raises(ValueError, match="inadmissible"):
        laminate_full(p, samples_per_delta=6, delta=0.5)


def test_branching_composite_matches_assembled_with_bonding():
    p = Params(0.0625, 0.1, 1.0, 1.0)
    assembled = evaluate_energy(branching_full(p, samples_per_delta=8))
    composite, _ = branching_energy_composite(p, samples_per_delta=8)
    assert composite.bonding > 0.0
    assert composite.bonding == pytest.approx(assembled.bonding, rel=0.05)
    assert composite.total == pytest.approx(assembled.total, rel=0.05)


def test_branching_degenerate_cascade_is_single_scale():
    # h0 balance below twice the finest scale: no refinement strips
    p = Params(0.5, 1.0, 1.0, 1.0)
    sched = branch_schedule(p)
    assert sched.N == 0
    f = branching_full(p, samples_per_delta=8)
    assert f.meta["levels_used"] == 0
    assert check_admissible(f).ok


def test_branching_assembled_gamma_above_one():
    # the gamma >= 1 cascade: finer boundary-layer scale than fold width
    p = Params(0.01, 1.0, 1.0, 1.0)
    sched = branch_schedule(p)
    assert sched.eps == pytest.approx(0.01)
    f = branching_full(p, samples_per_delta=8)
    assert check_admissible(f).ok
    eb = evaluate_energy(f)
    assert eb.bonding > 0.0
    composite, _ = branching_energy_composite(p, samples_per_delta=8)
    assert composite.total == pytest.approx(eb.total, rel=0.05)
