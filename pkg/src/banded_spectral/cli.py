"""Command-line interface.

Subcommands mirror the verification pipelines: validate a matrix file,
emit solution polynomials or moment blocks, build the circle density,
certify the orthogonality relations, and run the rank-one perturbation
scans.  Reports are JSON on stdout (or --out); residual tables can also
be written as CSV.  Exit status: 0 when every checked residual is inside
tolerance, 1 on tolerance failures, 2 on file or argument errors.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import _accel
from .banded import BandedMatrix, solve_polynomials, validate
from .circle import build_density, density_moment, verify_orthogonality
from .polynomials import Poly
from .rankone import (
    RankOneModel,
    alpha_scan,
    circle_weight_grid,
    combined_contour_moments,
    moment,
)


class UsageError(Exception):
    """Bad flags or unreadable input files (exit status 2)."""
from .spectral import default_block_count, moment_table

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2


def _emit(report, out_path):
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def _load_matrix(path):
    try:
        return BandedMatrix.from_file(path)
    except FileNotFoundError:
        raise UsageError(f"matrix file not found: {path}")
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot parse matrix file {path}: {exc}")


def _parse_tolerances(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise UsageError(f"tolerance override must look like key=value: {item}")
        key, val = item.split("=", 1)
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise UsageError(f"tolerance value is not a number: {item}")
    return out


def _complex_flag(text):
    try:
        re, im = (float(part) for part in text.split(","))
    except ValueError:
        raise UsageError(f"expected a complex value as re,im: {text}")
    return complex(re, im)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_validate(args):
    matrix = _load_matrix(args.matrix)
    rep = validate(matrix, args.case, rows=args.rows)
    _emit(rep.to_dict(), args.out)
    return EXIT_OK if rep.ok else EXIT_TOLERANCE


def cmd_polys(args):
    matrix = _load_matrix(args.matrix)
    system = solve_polynomials(matrix, args.case, args.k)
    report = {
        "N": system.N,
        "case": system.case,
        "count": system.K + 1,
        "polynomials": [
            {
                "n": n,
                "coeffs": [[z.real, z.imag] for z in p.coeffs],
                "leading": [system.leading[n].real, system.leading[n].imag],
            }
            for n, p in enumerate(system.polys)
        ],
    }
    _emit(report, args.out)
    return EXIT_OK


def cmd_moments(args):
    matrix = _load_matrix(args.matrix)
    d = args.d
    system = solve_polynomials(matrix, args.case, (d + 1) * matrix.N - 1)
    table = moment_table(system, d)
    report = [
        {"k": k, "S": [[[z.real, z.imag] for z in row] for row in S]}
        for k, S in enumerate(table.first_block_column())
    ]
    _emit(report, args.out)
    return EXIT_OK


def cmd_density(args):
    matrix = _load_matrix(args.matrix)
    d = args.d if args.d is not None else default_block_count(args.nmax, matrix.N)
    system = solve_polynomials(matrix, args.case, (d + 1) * matrix.N - 1)
    table = moment_table(system, d)
    density = build_density(table.blocks)
    moment_err = 0.0
    for k in range(d + 1):
        density_moment(density, k)  # raises on quadrature inconsistency
        moment_err = max(
            moment_err,
            float(np.max(np.abs(density.blocks[k] - table.blocks[k]))),
        )
    floor = 0.5 / (2 * np.pi)
    min_eig = density.min_eigenvalue(grid=args.grid)
    report = {
        "relation": "moment-interpolation",
        "N": density.N,
        "d": density.d,
        "radius": density.radius,
        "deviation_margin": density.deviation_norm_sum(),
        "min_eigenvalue": min_eig,
        "positivity_floor": floor,
        "max_block_mismatch": moment_err,
    }
    _emit(report, args.out)
    return EXIT_OK if min_eig >= floor - 1e-12 else EXIT_TOLERANCE


def cmd_verify(args):
    tol = _parse_tolerances(args.tol)
    max_tol = tol.get("max_residual", 1e-8)
    eta_floor = tol.get("eta_floor", 1e-8)
    matrix = _load_matrix(args.matrix)
    d = args.d if args.d is not None else default_block_count(args.nmax, matrix.N)
    system = solve_polynomials(matrix, args.case, max((d + 1) * matrix.N - 1, args.nmax))
    table = moment_table(system, d)
    density = build_density(table.blocks)
    report = verify_orthogonality(system, density, args.nmax, nodes=args.nodes)
    payload = report.to_dict()
    payload["tolerance"] = max_tol
    ok = report.max_abs_residual <= max_tol
    if args.case == "B":
        payload["eta_floor"] = eta_floor
        ok = ok and report.min_abs_eta > eta_floor
    payload["ok"] = ok
    _emit(payload, args.out)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "m", "re_residual", "im_residual", "abs_residual"])
            for (n, m), r in sorted(report.residuals.items()):
                writer.writerow([n, m, repr(r.real), repr(r.imag), repr(abs(r))])
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_rank_one(args):
    tol = _parse_tolerances(args.tol)
    imag_tol = tol.get("imag", 1e-9)
    neg_tol = tol.get("negativity", 1e-8)
    orth_tol = tol.get("orthogonality", 1e-6)
    moment_tol = tol.get("moments", 1e-8)
    model = RankOneModel(args.c)
    alphas = [float(a) for a in args.alpha.split(",") if a]
    bad = [a for a in alphas if a <= model.R0]
    if bad:
        raise UsageError(f"alphas {bad} do not exceed R0 = {model.R0}")
    scan = alpha_scan(model, alphas, grid=args.grid, n_max=args.nmax, neg_tol=neg_tol)
    moment_rows = []
    moment_err = 0.0
    for alpha in alphas:
        vals = combined_contour_moments(model, alpha, [-1, -2], nodes=args.nodes)
        for n, value in sorted(vals.items()):
            expected = alpha ** (2 * n) * np.conj(moment(model, -n))
            err = abs(value - expected)
            moment_err = max(moment_err, err)
            moment_rows.append(
                {"alpha": alpha, "n": n, "abs_error": err}
            )
    ok = moment_err <= moment_tol and all(
        row.max_abs_imag_p <= imag_tol
        and row.nonnegative
        and row.orthogonality_residual <= orth_tol
        for row in scan.rows
    )
    payload = scan.to_dict()
    payload.update(
        {
            "c": [model.c.real, model.c.imag],
            "R0": model.R0,
            "nodes": args.nodes,
            "negative_moment_rows": moment_rows,
            "max_negative_moment_error": moment_err,
            "tolerances": {
                "imag": imag_tol,
                "negativity": neg_tol,
                "orthogonality": orth_tol,
                "moments": moment_tol,
            },
            "ok": ok,
        }
    )
    _emit(payload, args.report)
    if args.out:
        root, ext = os.path.splitext(args.out)
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["alpha", "theta", "re_p", "im_p"])
            for alpha in alphas:
                theta, p = circle_weight_grid(model, alpha, args.grid)
                for t, v in zip(theta, p):
                    writer.writerow([repr(alpha), repr(float(t)), repr(v.real), repr(v.imag)])
        with open(f"{root}_residuals{ext or '.csv'}", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["alpha", "n", "m", "residual"])
            for row in scan.rows:
                for (n, m), res in sorted(row.pair_residuals.items()):
                    writer.writerow([repr(row.alpha), n, m, repr(res)])
    return EXIT_OK if ok else EXIT_TOLERANCE


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="banded-spectral",
        description="Polynomial systems of banded difference equations and "
        "their orthogonality certification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_matrix_flags(p):
        p.add_argument("--matrix", required=True, help="matrix spec file (JSON)")
        p.add_argument("--case", required=True, choices=["A", "B"])
        p.add_argument("--out", help="write the JSON report here as well")

    p = sub.add_parser("validate", help="check the structural conditions")
    add_matrix_flags(p)
    p.add_argument("--rows", type=int, default=32)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("polys", help="emit the solution polynomials")
    add_matrix_flags(p)
    p.add_argument("--k", type=int, required=True, help="highest degree")
    p.set_defaults(func=cmd_polys)

    p = sub.add_parser("moments", help="emit the moment block column")
    add_matrix_flags(p)
    p.add_argument("--d", type=int, required=True, help="number of blocks above S_0")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("density", help="build and check the circle density")
    add_matrix_flags(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--nmax", type=int, default=8, help="degree range the density must cover")
    p.add_argument("--grid", type=int, default=4096)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("verify", help="certify the integral orthogonality relations")
    add_matrix_flags(p)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--csv", help="write residual rows as CSV")
    p.add_argument("--tol", action="append", help="override: key=value", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rank-one", help="rank-one perturbation weight scan")
    p.add_argument("--c", type=_complex_flag, required=True, help="parameter as re,im")
    p.add_argument("--alpha", required=True, help="comma-separated radii")
    p.add_argument("--nmax", type=int, default=8)
    p.add_argument("--nodes", type=int, default=8192)
    p.add_argument("--grid", type=int, default=2048)
    p.add_argument("--out", help="CSV of the weight samples (residual table alongside)")
    p.add_argument("--report", help="write the JSON report here as well")
    p.add_argument("--tol", action="append", help="override: key=value", default=None)
    p.set_defaults(func=cmd_rank_one)

    return parser


def main(argv=None):
    cap = os.environ.get("BANDED_SPECTRAL_THREADS")
    if cap:
        try:
            _accel.set_thread_cap(int(cap))
        except ValueError:
            print("BANDED_SPECTRAL_THREADS must be an integer", file=sys.stderr)
            return EXIT_USAGE
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
