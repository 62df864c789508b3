"""Closed forms behind the lower/upper convergence-rate bounds and the alpha table."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from decimal import ROUND_DOWN, Decimal, localcontext
from fractions import Fraction

from .cf_core import Params

TABLE_NS = (1, 2, 5, 10, 100, 1000, 10000)

# Display precision of the reference alpha table: decimals kept (truncated)
# for the lower bound, and for the upper bound either decimals kept or "rep"
# for a six-digit repeating decimal followed by "...".
_FORMATS = {
    1: (6, 1),
    2: (9, "rep"),
    5: (9, "rep"),
    10: (9, "rep"),
    100: (9, 8),
    1000: (9, 6),
    10000: (8, 8),
}


@dataclass(frozen=True)
class AlphaInterval:
    N: int
    lower: float
    upper: float
    lower_printed: str = ""
    upper_printed: str = ""

    def __post_init__(self):
        if not 0 < self.lower < self.upper < 1:
            raise ValueError(f"bad alpha interval {self.lower}, {self.upper}")


def q_seq(params: Params, n: int) -> list:
    """[q_0, ..., q_n] for the all-N word: q_k = N(q_{k-1} + q_{k-2}), q_{-1}=0, q_0=1."""
    N = params.N
    prev, cur = 0, 1
    out = [cur]
    for _ in range(n):
        prev, cur = cur, N * (cur + prev)
        out.append(cur)
    return out


def roots(params: Params) -> tuple:
    """Roots of r^2 = N r + N."""
    N = params.N
    d = math.sqrt(N * N + 4 * N)
    return (N + d) / 2, (N - d) / 2


def q_closed_form(params: Params, n: int) -> float:
    N = params.N
    r1, r2 = roots(params)
    return (r1 ** (n + 1) - r2 ** (n + 1)) / math.sqrt(N * N + 4 * N)


def v_all_N(params: Params, n: int, a) -> Fraction:
    """Weight of the all-N word of length n for the chain started at a.

    Uses v_w(a) = (a+N) N^{n-1} / (Q_n (Q_n + Q_{n-1})) where Q are the
    continuants of the word with its first digit shifted by a.
    """
    N = params.N
    a = Fraction(a)
    q_prev, q = Fraction(1), N + a
    for _ in range(n - 1):
        q_prev, q = q, N * q + N * q_prev
    return (a + N) * Fraction(N) ** (n - 1) / (q * (q + q_prev))


def v_at_1(params: Params, n: int, exact: bool = False):
    """Largest atom weight at a = 1: (1+N) N^{n+2} / (q_{n+1} q_{n+2})."""
    if n < 1:
        raise ValueError("n must be >= 1")
    N = params.N
    q = q_seq(params, n + 2)
    v = Fraction((1 + N) * N ** (n + 2), q[n + 1] * q[n + 2])
    return v if exact else float(v)


def v_at_1_short_exponent(params: Params, n: int) -> Fraction:
    """Variant with exponent N^{n+1}; smaller than the atom weight by a factor N."""
    N = params.N
    q = q_seq(params, n + 2)
    return Fraction((1 + N) * N ** (n + 1), q[n + 1] * q[n + 2])


def root_of_lower_bound(params: Params, n: int) -> float:
    """(v_at_1(n)/2)^(1/n), which tends to the alpha lower bound."""
    v = v_at_1(params, n, exact=True) / 2
    return math.exp((math.log(v.numerator) - math.log(v.denominator)) / n)


def _lower_decimal(N: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = 60
        return Decimal(2) / (Decimal(N) + Decimal(N * N + 4 * N).sqrt() + 2)


def _trunc(d: Decimal, places: int) -> str:
    q = Decimal(1).scaleb(-places)
    return format(d.quantize(q, rounding=ROUND_DOWN), "f")


def _upper_printed(N: int, style) -> str:
    with localcontext() as ctx:
        ctx.prec = 60
        u = Decimal(1) / Decimal(N + 1)
    if style == "rep":
        return _trunc(u, 6) + "..."
    text = _trunc(u, style)
    # drop zeros that only pad a terminating value
    return text.rstrip("0").rstrip(".") if Decimal(text) == u else text


def alpha_bounds(params: Params) -> AlphaInterval:
    N = params.N
    lower = 2.0 / (N + math.sqrt(N * N + 4 * N) + 2)
    upper = 1.0 / (N + 1)
    lo_places, up_style = _FORMATS.get(N, (9, _default_upper_style(N)))
    return AlphaInterval(N, lower, upper, _trunc(_lower_decimal(N), lo_places),
                         _upper_printed(N, up_style))


def _default_upper_style(N: int):
    m = N + 1
    for p in (2, 5):
        while m % p == 0:
            m //= p
    return 9 if m == 1 else "rep"


def table(Ns=TABLE_NS) -> list:
    return [alpha_bounds(Params(int(N))) for N in Ns]


def write_alpha_table(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["N", "lower_exact", "upper_exact", "lower_printed", "upper_printed"])
        for r in rows:
            w.writerow([r.N, f"{r.lower:.12g}", f"{r.upper:.12g}", r.lower_printed, r.upper_printed])
