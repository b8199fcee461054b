"""Command-line front end: ``entmoments {moments,verify,sweep}``.

Exit codes: 0 success, 1 a verification check failed, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

from .kernel import Dims
from .moments import EntropyOrder, MomentReport, moment_report
from .montecarlo import MIN_SAMPLES, McAbort, default_workers
from .verify import SUITES, run_suite

__all__ = ["main", "build_parser", "report_row", "render_rows", "parse_int_range", "parse_q_list"]

FIELDS = ["m", "n", "q", "mean", "second_moment", "variance", "method", "flags"]
EXACT_KEYS = {"e_T": "mean_exact", "e_T2": "second_moment_exact", "var_T": "variance_exact"}


class DomainError(ValueError):
    """A parameter violates a model constraint; reported with exit code 2."""


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def parse_int_range(text: str) -> list[int]:
    """``"3"``, ``"2..5"`` (inclusive) or ``"2,4,7"``."""
    out: list[int] = []
    try:
        for part in text.split(","):
            if ".." in part:
                lo, hi = part.split("..")
                lo_i, hi_i = int(lo), int(hi)
                if hi_i < lo_i:
                    raise argparse.ArgumentTypeError(f"empty range {part!r}")
                out.extend(range(lo_i, hi_i + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, a range a..b or a list, got {text!r}")
    return sorted(set(out))


def parse_q_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entmoments",
        description="Moments of Tsallis and von Neumann entanglement entropy of random pure states.")
    sub = parser.add_subparsers(dest="command", required=True)

    mom = sub.add_parser("moments", help="mean, second moment and variance for one (m, n, q)")
    mom.add_argument("--m", type=int, required=True, help="smaller subsystem dimension")
    mom.add_argument("--n", type=int, required=True, help="larger subsystem dimension")
    mom.add_argument("--q", type=float, required=True, help="entropy order (1: von Neumann)")
    mom.add_argument("--format", choices=["text", "json", "csv"], default="text")
    mom.add_argument("--mode", choices=["auto", "float", "exact"], default="auto")

    ver = sub.add_parser("verify", help="run cross-check suites")
    ver.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    ver.add_argument("--m", type=int, default=2, help="mc suite only")
    ver.add_argument("--n", type=int, default=2, help="mc suite only")
    ver.add_argument("--q", type=float, default=2.0, help="mc suite only")
    ver.add_argument("--samples", type=_positive_int, default=1_000_000)
    ver.add_argument("--seed", type=_seed, default=0)
    ver.add_argument("--workers", type=_positive_int, default=None,
                     help="worker processes (default: $ENTMOMENTS_WORKERS or 1)")
    ver.add_argument("--format", choices=["text", "json", "csv"], default="text")

    swp = sub.add_parser("sweep", help="tabulate moments over a grid")
    swp.add_argument("--m", type=parse_int_range, required=True, help="e.g. 2..5 or 2,3")
    swp.add_argument("--n", type=parse_int_range, required=True, help="e.g. 2..8")
    swp.add_argument("--q", type=parse_q_list, required=True, help="comma-separated orders")
    swp.add_argument("--format", choices=["text", "json", "csv"], default="csv")
    swp.add_argument("--mode", choices=["auto", "float", "exact"], default="auto")
    swp.add_argument("--workers", type=_positive_int, default=None,
                     help="worker processes (default: $ENTMOMENTS_WORKERS or 1)")
    return parser


# --------------------------------------------------------------------------
# validation and evaluation
# --------------------------------------------------------------------------

def check_domain(m: int, n: int, q: float) -> None:
    if m < 1 or n < 1:
        raise DomainError(f"dimensions must be positive integers (got m={m}, n={n})")
    if m > n:
        raise DomainError(f"constraint m <= n violated (got m={m}, n={n}); swap the subsystems")
    if not math.isfinite(q):
        raise DomainError(f"q must be finite (got q={q!r})")
    if q == 0:
        raise DomainError("constraint q != 0 violated: the order q = 0 is excluded")
    if not q > -0.5:
        raise DomainError(f"constraint q > -0.5 violated (got q={q!r}); the variance diverges there")
    EntropyOrder(q)


def report_row(m: int, n: int, q: float, rep: MomentReport, flags: Sequence[str] = ()) -> dict:
    row = {
        "m": m,
        "n": n,
        "q": float(q),
        "mean": float(rep.e_T),
        "second_moment": float(rep.e_T2),
        "variance": float(rep.var_T),
        "method": rep.method,
        "flags": "; ".join([*rep.cancellation_flags, *flags]),
    }
    if rep.exact:
        for key, name in EXACT_KEYS.items():
            row[name] = str(rep.exact[key])
    return row


def error_row(m: int, n: int, q: float, message: str) -> dict:
    return {"m": m, "n": n, "q": float(q), "mean": None, "second_moment": None, "variance": None,
            "method": "error", "flags": message}


def evaluate_cell(cell: tuple[int, int, float, str]) -> dict:
    """One sweep cell; never raises for domain errors."""
    m, n, q, mode = cell
    extra: list[str] = []
    lo, hi = min(m, n), max(m, n)
    if m > n:
        extra.append("m>n: evaluated with the subsystems swapped")
    try:
        check_domain(lo, hi, q)
        rep = moment_report(Dims(lo, hi), q, mode=mode)
    except (ValueError, ArithmeticError) as exc:
        return error_row(m, n, q, str(exc))
    return report_row(m, n, q, rep, extra)


def _workers(flag: int | None) -> int:
    return flag if flag is not None else default_workers()


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def render_rows(rows: list[dict], fmt: str, fields: Sequence[str] = FIELDS) -> str:
    if fmt == "json":
        if len(rows) == 1:
            return json.dumps(rows[0]) + "\n"
        return json.dumps(rows) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        extra = [k for k in rows[0] if k not in fields] if rows else []
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([*fields, *extra])
        for row in rows:
            writer.writerow([_num(row.get(k, "")) for k in (*fields, *extra)])
        return buf.getvalue()
    lines = []
    for row in rows:
        width = max(len(k) for k in row)
        lines.extend(f"{k:<{width}}  {_num(v) if isinstance(v, float) else v}"
                     for k, v in row.items())
        lines.append("")
    return "\n".join(lines)


def _render_checks(checks, fmt: str) -> str:
    rows = [{"check": c.name, "value": c.value, "reference": c.reference, "error": c.error,
             "tolerance": c.tolerance, "kind": c.kind, "status": "pass" if c.passed else "FAIL"}
            for c in checks]
    if fmt in ("json", "csv"):
        return render_rows(rows, fmt, fields=list(rows[0]) if rows else [])
    width = max((len(r["check"]) for r in rows), default=5)
    out = [f"{'check':<{width}}  {'error':>10}  {'tolerance':>9}  status"]
    for r in rows:
        out.append(f"{r['check']:<{width}}  {r['error']:>10.3e}  {r['tolerance']:>9.1e}  "
                   f"{r['status']}")
    passed = sum(c.passed for c in checks)
    out.append(f"{passed}/{len(checks)} checks passed")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_moments(args) -> int:
    check_domain(args.m, args.n, args.q)
    rep = moment_report(Dims(args.m, args.n), args.q, mode=args.mode)
    sys.stdout.write(render_rows([report_row(args.m, args.n, args.q, rep)], args.format))
    return 0


def cmd_verify(args) -> int:
    kwargs = {}
    if args.suite == "mc":
        check_domain(args.m, args.n, args.q)
        if args.samples < MIN_SAMPLES:
            raise DomainError(f"constraint samples >= {MIN_SAMPLES} violated (got {args.samples})")
        kwargs = dict(m=args.m, n=args.n, q=args.q, samples=args.samples, seed=args.seed,
                      workers=_workers(args.workers))
    checks = run_suite(args.suite, **kwargs)
    sys.stdout.write(_render_checks(checks, args.format))
    return 0 if all(c.passed for c in checks) else 1


def cmd_sweep(args) -> int:
    cells = sorted((m, n, q, args.mode) for m in args.m for n in args.n for q in args.q)
    workers = _workers(args.workers)
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate_cell, cells))
    else:
        rows = [evaluate_cell(c) for c in cells]
    if args.format == "json":
        sys.stdout.write(json.dumps(rows) + "\n")
    else:
        sys.stdout.write(render_rows(rows, args.format))
    return 0


COMMANDS = {"moments": cmd_moments, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors
    try:
        return COMMANDS[args.command](args)
    except McAbort as exc:
        print(f"entmoments {args.command}: aborted: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"entmoments {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
