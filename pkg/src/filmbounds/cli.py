"""Command-line front end: classify, construct, sweep, minimize, poincare,
convergence. Every command is deterministic given its configuration and seed;
delimited outputs get companion figures unless --no-figures is passed.

Exit codes: 0 success, 1 hypothesis or domain violation, 2 I/O error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .constructions import (
    BRANCHING,
    FLAT,
    LAMINATE,
    best_construction,
    branching_full,
    buffer_lift,
    flat_construction,
    laminate_full,
)
from .energy import check_admissible, evaluate_energy
from .field import read_field, write_field
from .grid import Grid
from .minimize import IterationRecord, MinimizeOptions, minimize
from .params import Params
from .regimes import regime_report
from .verify import (
    AUTO,
    SweepSpec,
    convergence_study,
    fit_exponent,
    poincare_check,
    run_sweep,
)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2
EXIT_NUMERIC = 3


def _json_dump(data, path: Path | None) -> str:
    text = json.dumps(data, indent=2, sort_keys=True)
    if path is not None:
        path.write_text(text + "\n", encoding="utf-8")
    return text


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out_dir", ".") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _params_from(args) -> Params:
    return Params(args.sigma, args.gamma, args.l1, args.l2)


def _parse_values(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args) -> int:
    report = regime_report(args.sigma, args.gamma, args.l1, args.l2)
    out = Path(args.out) if args.out else None
    print(_json_dump(report, out))
    return EXIT_OK


def cmd_construct(args) -> int:
    params = _params_from(args)
    grid = None
    if args.nx and args.ny:
        grid = Grid(nx=args.nx, ny=args.ny, lx=params.l1, ly=params.l2)
    if args.kind == FLAT:
        field = flat_construction(params, grid)
        label = FLAT
    elif args.kind == LAMINATE:
        field = laminate_full(
            params, grid, args.samples_per_delta,
            h=args.override_h, delta=args.override_delta, eps=args.override_eps,
        )
        label = LAMINATE
    elif args.kind == BRANCHING:
        field = branching_full(
            params, grid, args.samples_per_delta, max_levels=args.override_levels,
        )
        label = BRANCHING
    elif args.kind == "best":
        field, _, label = best_construction(params, grid, args.samples_per_delta)
    else:
        raise ValueError(f"unknown construction kind {args.kind!r}")
    if args.buffer_height > 0.0:
        field = buffer_lift(field, args.buffer_height)
    energy = evaluate_energy(field)
    report = check_admissible(field)

    out = _out_dir(args)
    dump = write_field(field, out / f"field.{args.format}", fmt=args.format)
    (out / "energy.json").write_text(energy.to_json(indent=2) + "\n", encoding="utf-8")
    sched = field.meta.get("schedule")
    sidecar = {
        "construction": label,
        "sigma": params.sigma,
        "gamma": params.gamma,
        "l1": params.l1,
        "l2": params.l2,
        "samples_per_delta": args.samples_per_delta,
        "grid": {"nx": field.grid.nx, "ny": field.grid.ny,
                 "hx": field.grid.hx, "hy": field.grid.hy},
        "buffer_height": args.buffer_height,
        "admissible": report.ok,
        "violations": [
            {"kind": v.kind, "magnitude": v.magnitude, "where": v.where}
            for v in report
        ],
        "scales": {
            k: field.meta[k]
            for k in ("h", "delta", "eps", "y_cut", "eta", "bulk_x0",
                      "realized_bulk_width", "levels_used")
            if k in field.meta
        },
    }
    if sched is not None:
        sidecar["schedule"] = {
            "N": sched.N,
            "h": list(sched.h),
            "delta": list(sched.delta),
            "L": list(sched.L),
            "eps": sched.eps,
            "h0_formula": sched.h0_formula,
            "regime_case": sched.regime_case,
            "switch_index": sched.switch_index,
        }
    _json_dump(sidecar, out / "sidecar.json")
    if not args.no_figures:
        from .plotting import plot_field

        plot_field(field, out / "field.png")
    print(f"wrote {dump} (total energy {energy.total:.6g}, construction {label})")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec(
        coordinate=args.coordinate,
        values=_parse_values(args.values),
        fixed=args.fixed,
        construction=args.construction,
        samples_per_delta=args.samples_per_delta,
        l1=args.l1,
        l2=args.l2,
        snap_l2=not args.no_snap_l2,
    )
    table = run_sweep(spec, threads=args.threads)
    fit = fit_exponent(table)
    out = _out_dir(args)
    table.to_csv(out / "sweep.csv")
    _json_dump(
        {
            "coordinate": spec.coordinate,
            "fixed": spec.fixed,
            "construction": spec.construction,
            "samples_per_delta": spec.samples_per_delta,
            "fit": fit.to_dict(),
        },
        out / "fit.json",
    )
    if not args.no_figures:
        from .plotting import plot_sweep

        plot_sweep(table, fit, out / "sweep.png")
    print(f"slope {fit.slope:.4f} +- {fit.stderr:.4f} (r2 {fit.r2:.5f})")
    return EXIT_OK


def cmd_minimize(args) -> int:
    field = read_field(args.input)
    opts = MinimizeOptions(
        max_iters=args.max_iters,
        rel_tol=args.tol,
        step0=args.step,
        backtrack=args.backtrack,
        project_obstacle=not args.no_obstacle,
    )
    result = minimize(field, opts)
    out = _out_dir(args)
    write_field(result.field, out / f"final.{args.format}", fmt=args.format)
    with open(out / "log.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(IterationRecord.CSV_FIELDS)
        for row in result.log:
            writer.writerow([getattr(row, k) for k in IterationRecord.CSV_FIELDS])
    if not args.no_figures:
        from .plotting import plot_minimize_log

        plot_minimize_log(result.log, out / "log.png")
    print(
        f"{len(result.log) - 1} iterations, energy {result.initial:.6g} -> "
        f"{result.final:.6g} ({result.message})"
    )
    return EXIT_OK


def cmd_poincare(args) -> int:
    if args.n < 1:
        raise ValueError("need n >= 1 samples")
    result = poincare_check(args.n, seed=args.seed, grid_n=args.grid_n)
    data = {
        "n": result.n,
        "seed": args.seed,
        "max_ratio": result.max_ratio,
        "bound": result.bound,
        "passed": result.passed,
    }
    out = Path(args.out) if args.out else None
    print(_json_dump(data, out))
    if args.figure:
        from .plotting import plot_poincare

        plot_poincare(result, Path(args.figure))
    return EXIT_OK if result.passed else EXIT_NUMERIC


def cmd_convergence(args) -> int:
    params = _params_from(args)
    result = convergence_study(args.construction, params, _parse_values_int(args.ladder))
    out = _out_dir(args)
    _json_dump(
        {
            "construction": result.label,
            "samples_per_delta": list(result.samples_per_delta),
            "energies": list(result.energies),
            "errors": list(result.errors),
            "orders": [o if o != float("inf") else "exact" for o in result.orders],
            "reference": result.reference,
            "reference_kind": result.reference_kind,
        },
        out / "convergence.json",
    )
    if not args.no_figures:
        from .plotting import plot_convergence

        plot_convergence(result, out / "convergence.png")
    orders = ", ".join(
        "exact" if o == float("inf") else f"{o:.2f}" for o in result.orders
    )
    print(f"observed orders: {orders}")
    return EXIT_OK


def _parse_values_int(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


REQUIRED_BY_COMMAND = {
    "classify": ("sigma", "gamma"),
    "construct": ("sigma", "gamma"),
    "sweep": ("coordinate", "values", "fixed"),
    "minimize": ("input",),
    "poincare": ("n",),
    "convergence": ("sigma", "gamma"),
}


def _check_required(args) -> None:
    for name in REQUIRED_BY_COMMAND.get(args.command, ()):
        if getattr(args, name, None) is None:
            raise ValueError(f"missing required option --{name.replace('_', '-')}")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="filmbounds",
        description="Energy bounds and test fields for a compressed film on a substrate",
    )
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", type=Path, default=None,
        help="JSON file with default argument values (flags take precedence)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_params(p):
        # required after config merging, not at parse time
        p.add_argument("--sigma", type=float, default=None)
        p.add_argument("--gamma", type=float, default=None)
        p.add_argument("--l1", type=float, default=1.0)
        p.add_argument("--l2", type=float, default=1.0)

    p = sub.add_parser("classify", parents=[common],
                       help="regime, exponents, and scaling values")
    add_params(p)
    p.add_argument("--out", default=None, help="optional JSON output path")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("construct", parents=[common],
                       help="build a test field and its energy")
    add_params(p)
    p.add_argument("--kind", default="best",
                   choices=(FLAT, LAMINATE, BRANCHING, "best"))
    p.add_argument("--samples-per-delta", type=int, default=12)
    p.add_argument("--nx", type=int, default=0, help="explicit grid nodes in x")
    p.add_argument("--ny", type=int, default=0, help="explicit grid nodes in y")
    p.add_argument("--buffer-height", type=float, default=0.0)
    p.add_argument("--override-h", type=float, default=None,
                   help="override the laminate half-period")
    p.add_argument("--override-delta", type=float, default=None,
                   help="override the laminate fold half-width")
    p.add_argument("--override-eps", type=float, default=None,
                   help="override the boundary-layer width")
    p.add_argument("--override-levels", type=int, default=None,
                   help="cap the number of branching refinement strips")
    p.add_argument("--format", default="csv", choices=("csv", "bin"))
    p.add_argument("--out-dir", default="construct_out")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("sweep", parents=[common],
                       help="parameter sweep with exponent fit")
    p.add_argument("--coordinate", default=None, choices=("sigma", "gamma"))
    p.add_argument("--values", default=None,
                   help="comma-separated swept values, ascending")
    p.add_argument("--fixed", type=float, default=None,
                   help="value of the non-swept parameter")
    p.add_argument("--construction", default=AUTO,
                   choices=(AUTO, FLAT, LAMINATE, BRANCHING))
    p.add_argument("--samples-per-delta", type=int, default=12)
    p.add_argument("--l1", type=float, default=1.0)
    p.add_argument("--l2", type=float, default=1.0)
    p.add_argument("--no-snap-l2", action="store_true")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out-dir", default="sweep_out")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("minimize", parents=[common],
                       help="locally relax a dumped field")
    p.add_argument("--input", default=None)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--step", type=float, default=1e-2)
    p.add_argument("--backtrack", type=float, default=0.5)
    p.add_argument("--no-obstacle", action="store_true")
    p.add_argument("--format", default="csv", choices=("csv", "bin"))
    p.add_argument("--out-dir", default="minimize_out")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("poincare", parents=[common],
                       help="random-field Poincare property check")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--grid-n", type=int, default=129)
    p.add_argument("--out", default=None)
    p.add_argument("--figure", default=None)
    p.set_defaults(func=cmd_poincare)

    p = sub.add_parser("convergence", parents=[common],
                       help="grid-refinement order study")
    add_params(p)
    p.add_argument("--construction", default="laminate_cell",
                   choices=("laminate_cell", FLAT, LAMINATE, BRANCHING))
    p.add_argument("--ladder", default="12,24,48")
    p.add_argument("--out-dir", default="convergence_out")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_convergence)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    try:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        raise exc
    if not isinstance(config, dict):
        raise ValueError("config file must hold a JSON object")
    # Re-parse with config values as defaults so explicit flags win.
    provided = set()
    for token in argv:
        if token.startswith("--"):
            provided.add(token.split("=", 1)[0].lstrip("-").replace("-", "_"))
    for key, value in config.items():
        attr = key.replace("-", "_")
        if attr not in provided and hasattr(args, attr):
            setattr(args, attr, value)
    return args


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        _check_required(args)
        return args.func(args)
    except (OSError, FileNotFoundError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
