"""Command-line front door.

One binary, eight subcommands: instance generation, the double operator
integral, the derivative probe, the spectral shift function, trace-formula
verification, multiplier bounds on grids, the twisted trace scan, and the
acceptance suite. All artifacts carry schema versions and canonical float
formatting, so identical invocations produce byte-identical files.

Exit codes: 0 success, 2 validation error, 3 numerical failure (both with a
JSON error report on stdout).
"""

import argparse
import math
import os
import sys

import numpy as np

from .circlefn import parse_circle_function, parse_line_function
from .doi import dd_kernel, doi_compute, trace_norm
from .flowderiv import fd_probe
from .io import (
    error_report_json,
    read_matrix_json,
    write_csv,
    write_json,
    write_matrix_json,
)
from .multiplier import divided_difference_kernel, half_step_grid, schur_norm
from .spectra import (
    HermitianMatrix,
    NumericalError,
    UnitaryMatrix,
    ValidationError,
    decompose_hermitian,
    decompose_unitary,
    path_point,
    random_haar_unitary,
    random_hermitian,
)
from .ssf import build_ssf, track_eigenphases, twist_scan, verify_trace_formula
from . import suite as suite_mod

DEFAULT_SEED = 7
FULL_BISECTION_MAX_N = 64
TWO_PI = 2.0 * math.pi


def _outdir(args):
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _coerce(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _apply_config(args, argv):
    """Fill flag values from a KEY = VALUE file; explicit flags win.

    Keys are the long flag names without dashes ('seed', 'norm-bound');
    '#' starts a comment. Values are coerced to int, then float, then str.
    """
    if getattr(args, "config", None) is None:
        return
    explicit = {
        tok[2:].split("=", 1)[0].replace("-", "_")
        for tok in argv if tok.startswith("--")
    }
    try:
        with open(args.config) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ValidationError(f"{args.config}: cannot read config file ({exc})") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(
                f"{args.config}:{lineno}: expected KEY = VALUE, got '{raw.strip()}'"
            )
        key, value = (part.strip() for part in line.split("=", 1))
        attr = key.replace("-", "_")
        if attr in ("command", "handler", "config") or not hasattr(args, attr):
            raise ValidationError(
                f"{args.config}:{lineno}: unknown key '{key}' for command '{args.command}'"
            )
        if attr in explicit:
            continue
        if attr == "format" and value not in ("csv", "json"):
            raise ValidationError(f"{args.config}:{lineno}: format must be csv or json")
        if attr == "random":
            setattr(args, attr, value.replace(",", " ").split())
        else:
            setattr(args, attr, _coerce(value))


def _emit(obj):
    from .io import canonical_json

    sys.stdout.write(canonical_json(obj))


def _load_unitary(path):
    return UnitaryMatrix(read_matrix_json(path))


def _load_hermitian(path):
    return HermitianMatrix(read_matrix_json(path))


def _random_instance(triple):
    n, rank, seed = (int(x) for x in triple)
    u = random_haar_unitary(n, seed)
    a = random_hermitian(n, rank, 1.5, seed + 10000)
    return u, a


def _parse_floats(text):
    try:
        return [float(x) for x in str(text).split(",") if x != ""]
    except ValueError as exc:
        raise ValidationError(f"expected a comma-separated list of numbers, got '{text}'") from exc


def _parse_ints(text):
    try:
        return [int(x) for x in str(text).split(",") if x != ""]
    except ValueError as exc:
        raise ValidationError(f"expected a comma-separated list of integers, got '{text}'") from exc


def _write_rows(args, stem, kind, columns, rows):
    out = _outdir(args)
    if args.format == "json":
        path = os.path.join(out, f"{stem}.json")
        write_json(path, {
            "schema": f"traceshift/{kind}/v1",
            "columns": list(columns),
            "rows": [list(r) for r in rows],
        })
    else:
        path = os.path.join(out, f"{stem}.csv")
        write_csv(path, kind, columns, rows)
    return path


def cmd_gen(args):
    if args.n is None:
        raise ValidationError("gen requires --n")
    n = args.n
    rank = args.rank if args.rank is not None else min(3, n)
    u = random_haar_unitary(n, args.seed)
    a = random_hermitian(n, rank, args.norm_bound, args.seed + 10000)
    out = _outdir(args)
    upath = os.path.join(out, "u.json")
    apath = os.path.join(out, "a.json")
    write_matrix_json(upath, u.array)
    write_matrix_json(apath, a.array)
    _emit({
        "schema": "traceshift/gen/v1",
        "n": n, "rank": rank, "seed": args.seed,
        "norm_bound": float(args.norm_bound),
        "files": [upath, apath],
    })
    return 0


def cmd_doi(args):
    if (args.u is None) == (args.d is None):
        raise ValidationError("doi requires exactly one of --u (unitary) or --d (hermitian)")
    if args.t is None:
        raise ValidationError("doi requires --t (the matrix transformed by the integral)")
    t = read_matrix_json(args.t)
    if args.u is not None:
        base = _load_unitary(args.u)
        f = parse_circle_function(args.fn)
        dec = decompose_unitary(base)
    else:
        base = _load_hermitian(args.d)
        f = parse_line_function(args.fn)
        dec = decompose_hermitian(base)
    kernel = dd_kernel(f, dec, dec)
    result = doi_compute(kernel, dec, t, dec)
    out = _outdir(args)
    rpath = os.path.join(out, "doi.json")
    write_matrix_json(rpath, result)
    tr = complex(np.trace(result))
    _emit({
        "schema": "traceshift/doi/v1",
        "trace_re": tr.real, "trace_im": tr.imag,
        "trace_norm": trace_norm(result),
        "out": rpath,
    })
    return 0


def cmd_deriv(args):
    if args.u is None or args.a is None:
        raise ValidationError("deriv requires --u and --a")
    u = _load_unitary(args.u)
    a = _load_hermitian(args.a)
    f = parse_circle_function(args.fn)
    steps = _parse_floats(args.steps)
    report = fd_probe(f, u, a, args.s, steps)
    path = _write_rows(args, "deriv", "deriv", ("step", "error"),
                       [(t, e) for t, e in report.fd_errors])
    _emit({
        "schema": "traceshift/deriv/v1",
        "s": report.s,
        "fitted_order": report.fitted_order,
        "fit_residual": report.fit_residual,
        "flagged_steps": [float(t) for t in report.flagged_steps],
        "out": path,
    })
    return 0


def _arc_rows(ssf):
    bp = ssf.breakpoints
    rows = []
    for i, v in enumerate(ssf.values):
        start = bp[i]
        end = bp[i + 1] if i + 1 < bp.shape[0] else bp[0] + TWO_PI
        rows.append((float(start), float(end), float(v)))
    return rows


def cmd_ssf(args):
    if args.u is None or args.a is None:
        raise ValidationError("ssf requires --u and --a")
    u = _load_unitary(args.u)
    a = _load_hermitian(args.a)
    ssf = build_ssf(track_eigenphases(u, a))
    path = _write_rows(args, "ssf", "ssf", ("theta_start", "theta_end", "xi_value"),
                       _arc_rows(ssf))
    report = {
        "schema": "traceshift/ssfreport/v1",
        "mean_check": ssf.mean(),
        "breakpoint_count": int(ssf.breakpoints.shape[0]),
        "normalization_shift": float(ssf.normalization_shift),
        "out": path,
    }
    write_json(os.path.join(_outdir(args), "ssf_report.json"), report)
    _emit(report)
    return 0


def cmd_verify(args):
    if args.random is not None:
        u, a = _random_instance(args.random)
    elif args.u is not None and args.a is not None:
        u = _load_unitary(args.u)
        a = _load_hermitian(args.a)
    else:
        raise ValidationError("verify requires --u and --a, or --random N RANK SEED")
    f = parse_circle_function(args.fn)
    rep = verify_trace_formula(f, u, a)
    report = {
        "schema": "traceshift/verify/v1",
        "lhs_re": rep.lhs.real, "lhs_im": rep.lhs.imag,
        "rhs_re": rep.rhs.real, "rhs_im": rep.rhs.imag,
        "abs_error": rep.abs_error, "rel_error": rep.rel_error,
    }
    if args.out:
        write_json(os.path.join(_outdir(args), "verify.json"), report)
    _emit(report)
    return 0


def cmd_schurnorm(args):
    f = parse_circle_function(args.fn)
    grids = _parse_ints(args.grids)
    rows = []
    for n in grids:
        kernel = divided_difference_kernel(f, half_step_grid(n))
        # larger grids get fewer projection iterations per probe; the bounds
        # stay certified either way, only the bracket width suffers
        budget = int(min(10_000, max(500, 40_000 // max(n, 1))))
        res = schur_norm(kernel, tol=args.tol, seed=args.seed, max_iter=budget,
                         bisect=(n <= FULL_BISECTION_MAX_N))
        rows.append((n, res.lower_bound, res.upper_bound, res.iterations, res.residual))
    path = _write_rows(args, "schurnorm", "schurnorm",
                       ("n", "lower_bound", "upper_bound", "iterations", "residual"), rows)
    _emit({
        "schema": "traceshift/schurnorm/v1",
        "grids": grids,
        "lower_bounds": [r[1] for r in rows],
        "upper_bounds": [r[2] for r in rows],
        "out": path,
    })
    return 0


def cmd_twist(args):
    f = parse_circle_function(args.fn)
    if args.random is not None:
        u, a = _random_instance(args.random)
        v = path_point(u, a, 1.0)
    elif args.u is not None and args.v is not None:
        u = _load_unitary(args.u)
        v = _load_unitary(args.v)
    else:
        raise ValidationError("twist requires --u and --v, or --random N RANK SEED")
    scan = twist_scan(f, u, v, args.grid)
    rows = [(float(np.angle(z)) % TWO_PI, val.real, val.imag)
            for z, val in zip(scan.zetas, scan.values)]
    path = _write_rows(args, "twist", "twist", ("theta_k", "re", "im"), rows)
    _emit({
        "schema": "traceshift/twist/v1",
        "grid": int(args.grid),
        "max_jump": scan.max_jump,
        "out": path,
    })
    return 0


def cmd_suite(args):
    if args.u is not None:
        _load_unitary(args.u)  # validate inputs before any long run
    if args.a is not None:
        _load_hermitian(args.a)
    overrides = {}
    if args.tol is not None:
        if args.criterion is None:
            raise ValidationError("suite --tol requires --criterion to name its target")
        overrides[args.criterion] = args.tol
    try:
        results = suite_mod.run_all(only=args.criterion, tol_overrides=overrides)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    for res in results:
        sys.stdout.write(res.line + "\n")
    report = {
        "schema": "traceshift/suite/v1",
        "passed": all(r.passed for r in results),
        "results": [
            {"cid": r.cid, "name": r.name, "passed": r.passed, "detail": r.detail}
            for r in results
        ],
    }
    if args.out:
        write_json(os.path.join(_outdir(args), "suite.json"), report)
    if not report["passed"]:
        failed = ", ".join(r.cid for r in results if not r.passed)
        raise NumericalError(f"acceptance criteria failed: {failed}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="traceshift",
        description="Finite-dimensional trace formulas for unitary pairs: "
                    "double operator integrals, derivative flows, and the "
                    "spectral shift function.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, **extra):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--out", default=None, help="output directory (default .)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--config", default=None,
                       help="KEY = VALUE file of flag defaults (explicit flags win)")
        return p

    p = add("gen", "generate a random instance (U and A as matrix JSON)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--norm-bound", type=float, default=1.5)
    p.set_defaults(handler=cmd_gen)

    p = add("doi", "double operator integral of a function kernel against T")
    p.add_argument("--fn", required=True)
    p.add_argument("--u", default=None, help="unitary base point (matrix JSON)")
    p.add_argument("--d", default=None, help="hermitian base point (matrix JSON)")
    p.add_argument("--t", default=None, help="matrix to transform (matrix JSON)")
    p.set_defaults(handler=cmd_doi)

    p = add("deriv", "finite-difference check of the path derivative operator")
    p.add_argument("--fn", required=True)
    p.add_argument("--u", default=None)
    p.add_argument("--a", default=None)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--steps", default="1e-2,1e-3,1e-4")
    p.set_defaults(handler=cmd_deriv)

    p = add("ssf", "spectral shift function of the pair (U, e^{iA}U)")
    p.add_argument("--u", default=None)
    p.add_argument("--a", default=None)
    p.set_defaults(handler=cmd_ssf)

    p = add("verify", "check the trace formula on an instance")
    p.add_argument("--fn", required=True)
    p.add_argument("--u", default=None)
    p.add_argument("--a", default=None)
    p.add_argument("--random", nargs=3, metavar=("N", "RANK", "SEED"), default=None)
    p.set_defaults(handler=cmd_verify)

    p = add("schurnorm", "multiplier-norm bounds of a divided-difference kernel on grids")
    p.add_argument("--fn", required=True)
    p.add_argument("--grids", default="16,64,256")
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(handler=cmd_schurnorm)

    p = add("twist", "trace of f(zeta U) - f(zeta V) over roots of unity")
    p.add_argument("--fn", required=True)
    p.add_argument("--u", default=None)
    p.add_argument("--v", default=None)
    p.add_argument("--random", nargs=3, metavar=("N", "RANK", "SEED"), default=None)
    p.add_argument("--grid", type=int, default=256)
    p.set_defaults(handler=cmd_twist)

    p = add("suite", "run the acceptance battery")
    p.add_argument("--criterion", default=None, help="run only this criterion")
    p.add_argument("--tol", type=float, default=None, help="tolerance override for --criterion")
    p.add_argument("--u", default=None, help="optional instance file to validate first")
    p.add_argument("--a", default=None)
    p.set_defaults(handler=cmd_suite)

    return parser


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, argv)
        return args.handler(args)
    except ValidationError as exc:
        sys.stdout.write(error_report_json(exc))
        return 2
    except NumericalError as exc:
        sys.stdout.write(error_report_json(exc))
        return 3


if __name__ == "__main__":
    sys.exit(main())
