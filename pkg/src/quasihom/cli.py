"""Command-line front end: ``quasihom {cells,coeffs,dispersion,bvp,validate}``.

Every command writes single-header CSV files into ``--out``. Failures print
a JSON error record on stderr and exit with 2 (configuration), 3 (numerical)
or 4 (validation).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import QuasihomError
from .io import load_spec, write_csv
from .presets import EXAMPLE_TABLE, MATERIAL_TABLE, example, material

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 2, 3, 4


class ConfigError(QuasihomError):
    exit_code = EXIT_CONFIG
    kind = "config"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error({"error": "UsageError", "kind": "config", "message": message})
        sys.exit(EXIT_CONFIG)


def _emit_error(record):
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def _common(p, omega=False, k=False, grid=None, order=False):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", help="material1..material5 or ex1..ex3")
    src.add_argument("--spec", type=Path, help="JSON medium specification")
    p.add_argument("--eps-inverse", type=int, help="number of cells n = 1/eps")
    p.add_argument("--tau", type=float, default=1.0, help="end traction")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    if omega:
        p.add_argument("--omega", type=float, help="angular frequency")
    if k:
        p.add_argument("--k-points", type=int, default=200)
    if grid is not None:
        p.add_argument("--grid", type=int, default=grid)
    if order:
        p.add_argument("--order", choices=("0", "1", "2", "all"), default="all")


def build_parser():
    parser = _Parser(prog="quasihom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _common(sub.add_parser("cells", help="cell functions at x-stations"), grid=5)
    _common(sub.add_parser("coeffs", help="effective coefficients and E1..E5"), grid=201)
    _common(sub.add_parser("dispersion", help="first-band dispersion curves"), k=True)
    _common(sub.add_parser("bvp", help="fixed/loaded bar, exact and homogenized"),
            omega=True, grid=2001, order=True)
    _common(sub.add_parser("validate", help="run the invariant suite"), omega=True)
    return parser


def resolve(args):
    """(spec, example-or-None) from --preset / --spec / --eps-inverse."""
    ex = None
    if args.spec is not None:
        spec = load_spec(args.spec)
    else:
        name = args.preset or "material1"
        if name in MATERIAL_TABLE:
            spec = material(name)
        elif name in EXAMPLE_TABLE:
            ex = example(name)
            spec = ex.spec
        else:
            raise ConfigError(f"unknown preset {name!r}")
    if args.eps_inverse is not None:
        spec = spec.with_epsilon_inverse(args.eps_inverse)
    omega = getattr(args, "omega", None)
    if omega is not None and not omega > 0:
        raise ConfigError("--omega must be positive")
    return spec, ex


def cmd_cells(args):
    from .cells import solve_cells

    spec, _ = resolve(args)
    if args.grid < 1:
        raise ConfigError("--grid must be positive")
    rows = [solve_cells(spec, x).to_rows() for x in np.linspace(0.0, 1.0, args.grid)]
    write_csv(args.out / "cells.csv", ["x", "y", "P", "Q", "Ptilde", "Qtilde", "R", "Rtilde"],
              np.vstack(rows))
    return EXIT_OK


def cmd_coeffs(args):
    from .effective import COEFFICIENTS, LEVELS, assemble_E, build_field

    spec, _ = resolve(args)
    field = build_field(spec, n=args.grid)
    write_csv(args.out / "coeffs.csv", ["x", *COEFFICIENTS], field.table())
    for level in LEVELS:
        E = assemble_E(field, spec.epsilon, field.x, level)
        write_csv(args.out / f"E_{level}.csv", ["x", "E1", "E2", "E3", "E4", "E5"],
                  np.column_stack([field.x, *E.as_tuple()]))
    return EXIT_OK


def cmd_dispersion(args):
    from . import dispersion as d
    from .effective import build_field

    spec, _ = resolve(args)
    if args.k_points < 2:
        raise ConfigError("--k-points must be at least 2")
    k = d.default_k_grid(args.k_points)
    exact = d.exact_dispersion(spec, k)
    field = build_field(spec)
    h0 = d.homogenized_dispersion(spec, 0, k, field=field)
    h2 = d.homogenized_dispersion(spec, 2, k, field=field)
    base = d.baseline_dispersion(spec, k)
    free = d.microstructure_free_dispersion(spec, k)
    e0, e2, eb = (d.dispersion_error(exact, b) for b in (h0, h2, base))
    write_csv(args.out / "dispersion.csv",
              ["k", "omega_exact", "omega_h0", "omega_h2", "omega_baseline", "err0", "err2"],
              np.column_stack([k, exact.omega, h0.omega, h2.omega, base.omega, e0, e2]))
    write_csv(args.out / "dispersion_error.csv", ["k", "err0", "err2", "err_baseline"],
              np.column_stack([k, e0, e2, eb]))
    write_csv(args.out / "dispersion_microfree.csv", ["k", "omega_exact", "omega_microfree"],
              np.column_stack([k, exact.omega, free.omega]))
    summary = {"frac_err2_le_err0": float(np.mean(e2 <= e0)),
               "l1_err0": d.l1_error(e0, k), "l1_err2": d.l1_error(e2, k)}
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_bvp(args):
    from .bvp import FIELD_COLUMNS, BVPStudy, solve_bvp, two_scale_data
    from .oracle import exact_bvp

    spec, ex = resolve(args)
    omega = args.omega if args.omega is not None else (ex.omega if ex else None)
    if omega is None:
        raise ConfigError("bvp needs --omega (or an ex1..ex3 preset)")
    if args.grid < 5:
        raise ConfigError("--grid must be at least 5")
    orders = (0, 1, 2) if args.order == "all" else (int(args.order),)
    x = np.linspace(0.0, 1.0, args.grid)
    data = two_scale_data(spec, x)
    exact = exact_bvp(spec, omega, args.tau, x=x)
    fields = {j: solve_bvp(spec, j, omega, args.tau, args.grid, data) for j in orders}
    nan = np.full_like(x, np.nan)
    cols = {"x": x, "u_exact": exact.u, "sigma_exact": exact.sigma}
    for j in (0, 1, 2):
        f = fields.get(j)
        cols[f"u{j}"] = f.u if f else nan
        cols[f"sigma{j}"] = f.sigma if f else nan
        cols[f"mean{j}"] = f.mean if f else nan
    write_csv(args.out / "field.csv", FIELD_COLUMNS, np.column_stack([cols[c] for c in FIELD_COLUMNS]))
    if set(orders) == {0, 1, 2}:
        st = BVPStudy(exact, fields)
        print(json.dumps({f"l2_err{j}": st.l2_error(j) for j in orders}, sort_keys=True))
    return EXIT_OK


def cmd_validate(args):
    from .effective import COEFFICIENTS
    from .validate import run_checks

    spec, ex = resolve(args)
    if ex is not None and args.omega is not None:
        ex = type(ex)(ex.name, ex.spec, args.omega, ex.tau)
    checks, field = run_checks(spec, ex, args.tau)
    write_csv(args.out / "validate.csv", ["check", "value", "tolerance", "status"],
              [c.row() for c in checks])
    write_csv(args.out / "validate_coeffs.csv", ["x", *COEFFICIENTS], field.table())
    width = max(len(c.name) for c in checks)
    for c in checks:
        print(f"{c.name:<{width}}  {c.value:.3e} {c.comparison} {c.tolerance:.0e}  "
              f"{'pass' if c.passed else 'FAIL'}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION


COMMANDS = {"cells": cmd_cells, "coeffs": cmd_coeffs, "dispersion": cmd_dispersion,
            "bvp": cmd_bvp, "validate": cmd_validate}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except QuasihomError as exc:
        _emit_error(exc.record())
        return exc.exit_code
    except (KeyError, ValueError) as exc:
        _emit_error({"error": type(exc).__name__, "kind": "config", "message": str(exc)})
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
