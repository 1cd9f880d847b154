"""Command-line front end: ``gnb {pmf,moments,classify,basis,validate}``.

Every subcommand writes one table to stdout, as CSV (header row, ``,``
separated, ``\\n`` terminated) or as a JSON array of flat objects.  CSV floats
are printed with ``--precision`` significant digits; JSON floats use the
shortest representation that round-trips, so they equal the library values
exactly.  Non-finite floats become ``nan``/``inf`` in CSV and ``null`` in JSON.

Exit codes: 0 success, 1 validation failure, 2 usage or parameter error,
3 convergence failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Sequence

from . import distribution as dist
from . import oracle
from .bergman import DiskPoint, basis_phi, coherent_coefficient, norm_square_rho
from .errors import ConvergenceError, DegenerateError, DomainError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_CONVERGENCE = 3


class UsageError(Exception):
    pass


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--beta", type=float, help="field strength beta (the shape is 2*beta)")
    common.add_argument("--m", type=int, help="Landau level index")
    common.add_argument("--lambda", dest="lam", type=float, help="lambda = |z|^2 in [0, 1)")
    common.add_argument("--z-re", type=float, help="real part of the disk point (alternative to --lambda)")
    common.add_argument("--z-im", type=float, help="imaginary part of the disk point")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--precision", type=int, default=12, help="significant digits in CSV output")
    common.add_argument("--tol", type=float, default=None, help="series tolerance")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="gnb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", parents=[common], help="k, pmf, cdf rows until the coverage is reached")
    p.add_argument("--coverage", type=float, default=0.999)

    sub.add_parser("moments", parents=[common], help="series and closed-form moments")

    p = sub.add_parser("classify", parents=[common], help="Mandel parameter and photon-statistics verdict")
    p.add_argument("--scan", type=int, default=None, help="classify N equally spaced lambda in (0, 1)")
    p.add_argument("--method", choices=("closed", "pgf", "series"), default="closed")

    p = sub.add_parser("basis", parents=[common], help="basis values, norms and coherent-state weights at z")
    p.add_argument("--k-max", type=int, default=10)

    p = sub.add_parser("validate", parents=[common], help="run an oracle suite")
    p.add_argument("--suite", default="all", help="all, " + ", ".join(oracle.SUITES))
    return parser


# ---------------------------------------------------------------------------
# parameter handling
# ---------------------------------------------------------------------------


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            flag = "--lambda" if name == "lam" else "--" + name.replace("_", "-")
            raise UsageError(f"{flag} is required")


def _disk_point(args) -> DiskPoint:
    has_z = args.z_re is not None or args.z_im is not None
    if has_z and args.lam is not None:
        raise UsageError("give either --lambda or --z-re/--z-im, not both")
    if has_z:
        return DiskPoint.from_complex(complex(args.z_re or 0.0, args.z_im or 0.0))
    _require(args, "lam")
    return DiskPoint.from_lambda(args.lam)


def _dist_params(args) -> dist.DistParams:
    _require(args, "beta", "m")
    point = _disk_point(args)
    # --lambda is used as given; only disk coordinates go through |z|^2
    lam = args.lam if args.lam is not None else point.lam
    return dist.DistParams(lam, args.beta, args.m)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _csv_cell(value, precision: int) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, f".{precision}g")
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def emit(rows: list[dict], fmt: str, precision: int, out=None) -> None:
    out = sys.stdout if out is None else out
    if fmt == "json":
        json.dump([{k: _json_value(v) for k, v in row.items()} for row in rows], out, indent=1)
        out.write("\n")
        return
    if not rows:
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(list(rows[0]))
    for row in rows:
        writer.writerow([_csv_cell(v, precision) for v in row.values()])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_pmf(args) -> tuple[list[dict], int]:
    params = _dist_params(args)
    table = dist.pmf_table(params, coverage=args.coverage)
    return [{"k": k, "pmf": p, "cdf": c} for k, p, c in table.rows], EXIT_OK


def cmd_moments(args) -> tuple[list[dict], int]:
    params = _dist_params(args)
    tol = 1e-15 if args.tol is None else args.tol
    mean, var = dist.moments(params, tol)
    row = {
        "beta": params.beta,
        "m": params.m,
        "lambda": params.lam,
        "mean": mean,
        "variance": var,
        "mean_closed": dist.mean_closed(params),
        "variance_closed": dist.variance_closed(params),
        "variance_claim": dist.variance_closed_claim(params),
        "second_moment": var + mean * mean,
        "second_moment_claim": dist.second_moment_claim(params),
    }
    if params.degenerate:
        row.update(q=math.nan, q_closed=math.nan, q_pgf=math.nan)
    else:
        row.update(q=var / mean - 1.0, q_closed=dist.mandel_q(params), q_pgf=dist.mandel_q_pgf(params))
    return [row], EXIT_OK


def _classify_row(params: dist.DistParams, method: str) -> dict:
    result = dist.classify(params, method=method)
    return {
        "lambda": params.lam,
        "q": result.q_value,
        "verdict": result.verdict.value,
        "critical_lambda": result.critical_lambda,
        "critical_radius": result.critical_radius,
        "method": result.method,
    }


def cmd_classify(args) -> tuple[list[dict], int]:
    if args.scan is None:
        return [_classify_row(_dist_params(args), args.method)], EXIT_OK
    _require(args, "beta", "m")
    if args.lam is not None or args.z_re is not None or args.z_im is not None:
        raise UsageError("--scan replaces --lambda and --z-re/--z-im")
    if args.scan < 1:
        raise UsageError("--scan must be a positive integer")
    n = args.scan
    rows = [_classify_row(dist.DistParams(i / (n + 1), args.beta, args.m), args.method) for i in range(1, n + 1)]
    return rows, EXIT_OK


def cmd_basis(args) -> tuple[list[dict], int]:
    _require(args, "beta", "m")
    point = _disk_point(args)
    space = dist.DistParams(point.lam, args.beta, args.m).space
    if args.k_max < 0:
        raise UsageError("--k-max must be nonnegative")
    rows = []
    for k in range(args.k_max + 1):
        phi = basis_phi(space, k, point)
        rows.append(
            {
                "k": k,
                "phi_re": phi.real,
                "phi_im": phi.imag,
                "rho": norm_square_rho(space, k),
                "weight": abs(coherent_coefficient(space, k, point)) ** 2,
            }
        )
    return rows, EXIT_OK


def cmd_validate(args) -> tuple[list[dict], int]:
    if args.suite != "all" and args.suite not in oracle.SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; expected all, " + ", ".join(oracle.SUITES))
    reports = oracle.run_suite(args.suite)
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_VALIDATION
    return [r.to_dict() for r in reports], code


COMMANDS = {
    "pmf": cmd_pmf,
    "moments": cmd_moments,
    "classify": cmd_classify,
    "basis": cmd_basis,
    "validate": cmd_validate,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.precision < 1 or args.precision > 17:
        print("error: --precision must lie between 1 and 17", file=sys.stderr)
        return EXIT_USAGE
    try:
        rows, code = COMMANDS[args.command](args)
    except (UsageError, DomainError, DegenerateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    emit(rows, args.format, args.precision)
    return code


if __name__ == "__main__":
    sys.exit(main())
