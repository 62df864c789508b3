"""Command-line front end: ``nkuzmin {expand,gk,table,ne-check}``.

Exit codes: 0 success, 2 usage or domain error, 3 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

from . import bounds, cf_core, gauss_kuzmin, natural_extension
from .cf_core import Params
from .errors import BudgetExceeded, DegenerateFit, DomainError
from .transfer_operator import budget_limit

EXIT_OK, EXIT_USAGE, EXIT_BUDGET = 0, 2, 3

NE_RECTS = (
    (0.0, 0.5, 0.0, 0.5),
    (0.5, 1.0, 0.0, 1.0),
    (0.1, 0.3, 0.6, 0.9),
    (0.0, 1.0, 0.0, 0.25),
    (0.25, 0.75, 0.25, 0.75),
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None


def _emit(rows, header, args, out):
    """Write rows as CSV (default) or JSON with value/tail_radius pairs."""
    if args.format == "json":
        pairs = {h[:-len("_radius")] for h in header if h.endswith("_radius")}
        recs = []
        for r in rows:
            rec = {}
            for h, v in zip(header, r):
                if h.endswith("_radius"):
                    continue
                if h in pairs:
                    rec[h] = {"value": _jsonable(v), "tail_radius": _jsonable(r[header.index(h + "_radius")])}
                else:
                    rec[h] = _jsonable(v)
            recs.append(rec)
        text = json.dumps(recs, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
        text = buf.getvalue()
    out.write(text)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)


def _jsonable(v):
    if isinstance(v, Fraction):
        return fmt(v)
    if isinstance(v, float):
        return float(fmt(v))
    return v


def _params(N) -> Params:
    if N is None or N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    return Params(N)


def cmd_expand(args, out):
    params = _params(args.N)
    x = _rational(args.x)
    seq = cf_core.expand(params, x, args.n)
    body = ",".join(str(d) for d in seq.digits)
    out.write(f"digits: [{body}]" + (" (terminated)" if seq.terminated else "") + "\n")
    rows = []
    for k, c in enumerate(cf_core.convergents(seq), start=1):
        gap, bound = cf_core.approximation_gap(params, cf_core.DigitSeq(seq.digits[:k], params), x)
        rows.append([k, seq.digits[k - 1], c.p, c.q, Fraction(c.p, c.q), gap, bound])
    _emit(rows, ["n", "digit", "p", "q", "convergent", "gap", "bound"], args, out)


def _gk_feasible(params, n_max, budget):
    width = 4
    limit = budget_limit(budget)
    best = 0
    for n in range(1, n_max + 1):
        if width ** n > limit:
            break
        best = n
    return best


def cmd_gk(args, out):
    params = _params(args.N)
    if args.n_max < 1:
        raise DomainError("--n-max must be >= 1")
    if not 0 <= args.a <= 1:
        raise DomainError("--a must lie in [0, 1]")
    feasible = _gk_feasible(params, args.n_max, args.budget)
    if feasible < args.n_max:
        raise BudgetExceeded(f"n={feasible + 1} exceeds the enumeration budget; "
                             f"largest feasible n is {feasible}", 4 ** (feasible + 1),
                             budget_limit(args.budget))
    rows, sups = [], []
    for n in range(1, args.n_max + 1):
        s = gauss_kuzmin.sup_error(params, n, args.a, args.grid_res, args.i_max, budget=args.budget)
        sups.append((n, s.sup_abs, s.tail_radius))
        rows.append([n, s.sup_abs, s.tail_radius, s.lower, s.upper, "PASS" if s.sandwich_holds else "FAIL", ""])
    try:
        rows[-1][-1] = gauss_kuzmin.rate_fit(params, sups)
    except DegenerateFit:
        rows[-1][-1] = "nan"
    _emit(rows, ["n", "sup_abs", "sup_abs_radius", "lower", "upper", "sandwich", "alpha_hat"], args, out)


def cmd_table(args, out):
    Ns = args.Ns if args.Ns else list(bounds.TABLE_NS)
    for N in Ns:
        _params(N)
    rows = bounds.table(Ns)
    body = [[r.N, r.lower, r.upper, r.lower_printed, r.upper_printed] for r in rows]
    _emit(body, ["N", "lower_exact", "upper_exact", "lower_printed", "upper_printed"], args, out)
    if not args.output:
        bounds.write_alpha_table(rows, "alpha_table.csv")


def cmd_ne_check(args, out):
    params = _params(args.N)
    if args.samples <= 0:
        raise DomainError("--samples must be positive")
    rows = []
    for rect in NE_RECTS:
        r = natural_extension.invariance_mc(params, rect, args.samples, args.seed, args.workers)
        rows.append(["invariance " + " ".join(fmt(c) for c in rect), r.mass_fwd, r.mass_direct,
                     r.z, "PASS" if abs(r.z) < 4 else "FAIL"])
    d = natural_extension.marginal_ks(params, args.samples, args.seed)
    z = d * math.sqrt(args.samples)
    rows.append(["marginal ks", d, 0.0, z, "PASS" if z < 1.95 else "FAIL"])
    _emit(rows, ["check", "observed", "expected", "z", "status"], args, out)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nkuzmin", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--output", default=None)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--budget", type=int, default=None)
        sp.add_argument("--i-max", type=int, default=None)

    e = sub.add_parser("expand", help="digits, convergents and approximation gaps")
    e.add_argument("--N", type=int, required=True)
    e.add_argument("--x", required=True)
    e.add_argument("--n", type=int, default=10)
    common(e)

    g = sub.add_parser("gk", help="sup of the Gauss-Kuzmin error term against its bounds")
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--n-max", type=int, default=5)
    g.add_argument("--a", type=float, default=0.0)
    g.add_argument("--grid-res", type=int, default=33)
    common(g)

    t = sub.add_parser("table", help="alpha bounds table")
    t.add_argument("--Ns", type=int, nargs="*", default=None)
    common(t)

    n = sub.add_parser("ne-check", help="Monte-Carlo checks of the natural extension")
    n.add_argument("--N", type=int, default=1)
    n.add_argument("--samples", type=int, default=200_000)
    common(n)
    return p


COMMANDS = {"expand": cmd_expand, "gk": cmd_gk, "table": cmd_table, "ne-check": cmd_ne_check}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK
