"""``zetamoments`` command line.

Exit codes: 0 success, 1 a check that ran but did not pass, 2 bad
configuration or input, 3 precision alarm.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_ALARM = 3

log = logging.getLogger("zetamoments")


class InputError(Exception):
    """Reported to the user as exit code 2."""


def _sidecar(out: Optional[str], payload: dict) -> None:
    # wall time lives outside the data file so that reruns are byte-identical
    if out:
        Path(str(out) + ".run.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _largest_prime_at_most(n: int) -> int:
    from .primes import prev_prime_below

    if n < 2:
        raise InputError(f"--prime-limit must be >= 2, got {n}")
    return prev_prime_below(n + 1)


# ---------------------------------------------------------------------------
# subcommands


def cmd_coeffs(args) -> int:
    from .coeffdata import CoefficientFile, merge_coefficient_files, read_coefficient_file
    from .engine import compute_coefficients, stability_check
    from .mpcontext import format_sci, make_run_config

    if args.merge:
        files = [read_coefficient_file(p) for p in args.merge]
        merged = merge_coefficient_files(files)
        if args.out:
            merged.save(args.out)
        sys.stdout.write(merged.dumps())
        return EXIT_OK
    if args.k is None or args.digits is None:
        raise InputError("coeffs needs --k and --digits (or --merge FILES)")
    if args.prime_limit is None and not args.auto_P:
        raise InputError("give --prime-limit P or --auto-P")
    if args.prime_limit is not None and args.auto_P:
        raise InputError("--prime-limit and --auto-P are exclusive")
    P = None if args.auto_P else _largest_prime_at_most(args.prime_limit)
    config = make_run_config(args.k, args.digits, args.accelerant, P, args.safety)
    checkpoint = Path(args.checkpoint) if args.checkpoint else (Path(args.out + ".ckpt") if args.out else None)
    if args.resume and (checkpoint is None or not checkpoint.exists()):
        raise InputError("--resume needs an existing checkpoint (--checkpoint or <out>.ckpt)")
    start = time.perf_counter()
    kw = dict(workers=args.threads, checkpoint=checkpoint, resume=args.resume)
    if args.stability:
        poly = stability_check(config, **kw)
    else:
        poly = compute_coefficients(config, **kw).polynomial
        poly = poly.with_stable_digits([0] * len(poly))
        poly.metadata["stable_digits"] = "not assessed (run with --stability)"
    wall = time.perf_counter() - start
    poly.metadata["version"] = __version__
    cf = CoefficientFile.from_polynomial(poly, "computed", config.digits)
    if args.out:
        cf.save(args.out)
        if checkpoint is not None and checkpoint.exists() and not args.keep_checkpoint:
            checkpoint.unlink()
    _sidecar(args.out, {"config": config.as_dict(), "version": __version__, "wall_time_s": round(wall, 3)})
    print(f"# k={config.k} digits={config.digits} P={config.truncation_prime} accelerant={config.accelerant_degree}")
    for row in cf.rows:
        print(f"c_{row.r}={format_sci(row.value, config.digits)} stable_digits={row.stable_digits}")
    print(f"wall time {wall:.2f}s", file=sys.stderr)
    return EXIT_OK


def cmd_method1(args) -> int:
    from .coeffdata import CoefficientFile
    from .method1 import method1_coefficients
    from .mpcontext import format_sci
    from .polynomial import MomentPolynomial

    if args.k < 1:
        raise InputError("--k must be >= 1")
    start = time.perf_counter()
    cs = method1_coefficients(args.k, Q=int(args.Q), accelerate=not args.no_accelerate, order=args.order, digits=args.digits)
    wall = time.perf_counter() - start
    sig = min(args.digits, 22)
    for r, c in enumerate(cs):
        print(f"c_{r}({args.k})={format_sci(c, sig)}")
    if args.out:
        meta = {"Q": str(int(args.Q)), "order": str(args.order), "digits": str(args.digits), "version": __version__}
        poly = MomentPolynomial(args.k, list(cs), [sig - 1] * 3, "method1", meta)
        CoefficientFile.from_polynomial(poly, "method1", sig).save(args.out)
        _sidecar(args.out, {"k": args.k, "Q": int(args.Q), "version": __version__, "wall_time_s": round(wall, 3)})
    return EXIT_OK


def cmd_maclaurin(args) -> int:
    from .euler_product import maclaurin_table_check

    expected = [0, -1, 0, 0, 4, 1, 0, 0, 0, 0]
    rows = maclaurin_table_check()
    for name, value in rows:
        print(f"{name} {value}")
    ok = [v for _, v in rows] == expected
    print("maclaurin-check " + ("ok" if ok else "MISMATCH"))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_zeros(args) -> int:
    from .critical_line import find_zeros, rvm_count

    start = time.perf_counter()
    table = find_zeros(args.t_max, args.grid_factor, t_min=args.t_min, ceiling=args.ceiling)
    wall = time.perf_counter() - start
    if args.out:
        table.save(args.out)
        _sidecar(args.out, {"t_max": args.t_max, "grid_factor": args.grid_factor, "version": __version__, "wall_time_s": round(wall, 3)})
    print(f"zeros={table.count} rvm_estimate={float(rvm_count(args.t_max)):.1f} density_check={'ok' if table.density_ok else 'FLAGGED'}")
    for lo, hi in table.flagged:
        print(f"warning: zero count off in [{lo:g}, {hi:g}]", file=sys.stderr)
    print(f"wall time {wall:.2f}s", file=sys.stderr)
    return EXIT_OK


def _polynomial_for(k: int, path: Optional[str]):
    from .coeffdata import load_coefficients, shipped_coefficients

    poly = load_coefficients(path) if path else shipped_coefficients(k)
    if poly.k != k:
        raise InputError(f"{path}: coefficients are for k={poly.k}, not {k}")
    return poly


def cmd_moments(args) -> int:
    from .critical_line import ZeroTable, zeros_in_window
    from .moments import compare_moments, conjecture_moment, deviation_stats, write_comparison_csv
    from .mpcontext import format_sci

    poly = _polynomial_for(args.k, args.coeffs)
    if args.zeros is None:
        if args.T is not None:
            T = args.T
        else:
            above = args.zero_above
            found = zeros_in_window(above, above + 5.0)
            if not len(found):
                raise InputError(f"no zero found in ({above}, {above + 5}]")
            T = f"{found[0]:.9f}"
        value = conjecture_moment(poly, T)
        print(f"Conjecture_{args.k}({T}) = {format_sci(value, args.sig)}")
        return EXIT_OK
    zeros = ZeroTable.load(args.zeros)
    t_max = args.t_max if args.t_max is not None else zeros.t_max
    grid_step = args.grid_step if args.grid_step is not None else t_max / 1000.0
    if grid_step <= 0 or math.floor(t_max / grid_step) < 1:
        raise InputError(f"grid has no points (t_max={t_max}, grid_step={grid_step})")
    start = time.perf_counter()
    comps = compare_moments(args.k, poly, zeros, grid_step, t_max)
    wall = time.perf_counter() - start
    if args.out:
        write_comparison_csv(args.out, comps)
        _sidecar(args.out, {"k": args.k, "t_max": t_max, "grid_step": grid_step, "version": __version__, "wall_time_s": round(wall, 3)})
    burn_in = args.burn_in if args.burn_in is not None else len(comps) // 10
    last = comps[-1]
    print(f"points={len(comps)} T_J={last.T:.9f} data={last.data:.12g} conjecture={last.conjecture:.12g}")
    try:
        sharp, smooth = deviation_stats(comps, burn_in)
        print(f"std_sharp={sharp:.6g} std_smoothed={smooth:.6g} burn_in={burn_in}")
    except ValueError as exc:
        print(f"deviation stats skipped: {exc}", file=sys.stderr)
    print(f"wall time {wall:.2f}s", file=sys.stderr)
    return EXIT_OK


def cmd_diff(args) -> int:
    from .coeffdata import diff_coefficients, load_coefficients

    a = load_coefficients(args.a)
    b = load_coefficients(args.b)
    report = diff_coefficients(a, b)
    sys.stdout.write(report.format())
    if args.min_digits is not None and report.min < args.min_digits:
        return EXIT_CHECK_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    from .engine import default_workers

    p = argparse.ArgumentParser(prog="zetamoments", description="Moment polynomial coefficients and critical-line moment checks.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("coeffs", help="compute c_r(k) from the Euler product")
    c.add_argument("--k", type=int)
    c.add_argument("--digits", type=int)
    c.add_argument("--accelerant", choices=("none", "2", "3"), default="3")
    c.add_argument("--prime-limit", type=int, help="truncate at the largest prime <= this")
    c.add_argument("--auto-P", dest="auto_P", action="store_true", help="choose P from the tail error estimate")
    c.add_argument("--safety", type=float, default=1.0)
    c.add_argument("--stability", action="store_true", help="stable digits from a comparison with P' < P/3")
    c.add_argument("--threads", type=int, default=default_workers())
    c.add_argument("--checkpoint")
    c.add_argument("--resume", action="store_true")
    c.add_argument("--keep-checkpoint", action="store_true")
    c.add_argument("--merge", nargs="+", metavar="FILE", help="merge coefficient files instead of computing")
    c.add_argument("--out")
    c.set_defaults(func=cmd_coeffs)

    m = sub.add_parser("method1", help="c_0, c_1, c_2 from the Taylor expansion route")
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--Q", type=float, default=1e6)
    m.add_argument("--order", type=int, default=10)
    m.add_argument("--digits", type=int, default=40)
    m.add_argument("--no-accelerate", action="store_true")
    m.add_argument("--out")
    m.set_defaults(func=cmd_method1)

    mc = sub.add_parser("maclaurin-check", help="the ten-monomial expansion table")
    mc.set_defaults(func=cmd_maclaurin)

    z = sub.add_parser("zeros", help="isolate zeros of Z(t) up to t_max")
    z.add_argument("--t-max", type=float, required=True)
    z.add_argument("--t-min", type=float, default=10.0)
    z.add_argument("--grid-factor", type=float, default=0.25)
    z.add_argument("--ceiling", type=float, default=1e6)
    z.add_argument("--out")
    z.set_defaults(func=cmd_zeros)

    mo = sub.add_parser("moments", help="compare Data_k and Conjecture_k")
    mo.add_argument("--k", type=int, required=True)
    mo.add_argument("--coeffs", help="coefficient file (default: the shipped one for k)")
    mo.add_argument("--zeros", help="zero table; omit for conjecture-only mode")
    mo.add_argument("--t-max", type=float)
    mo.add_argument("--grid-step", type=float)
    mo.add_argument("--burn-in", type=int)
    mo.add_argument("--T", help="conjecture-only: height (exact decimal)")
    mo.add_argument("--zero-above", type=float, default=1e8, help="conjecture-only: use the first zero above this")
    mo.add_argument("--sig", type=int, default=10)
    mo.add_argument("--out")
    mo.set_defaults(func=cmd_moments)

    d = sub.add_parser("diff", help="per-r matched digits between two coefficient files")
    d.add_argument("a")
    d.add_argument("b")
    d.add_argument("--min-digits", type=int)
    d.set_defaults(func=cmd_diff)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    from .coeffdata import CoefficientParseError
    from .engine import PrecisionAlarm
    from .mpcontext import ConfigError

    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except PrecisionAlarm as exc:
        print(f"precision alarm: {exc}", file=sys.stderr)
        return EXIT_ALARM
    except (ConfigError, InputError, CoefficientParseError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
