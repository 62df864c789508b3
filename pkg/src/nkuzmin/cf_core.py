"""N-continued fraction arithmetic.

Reals are plain floats; convergents, cylinder endpoints and the reversed
quantities ``s_n`` are exact (Python ints / ``fractions.Fraction``).

An N-continued fraction is ``x = N/(a_1 + N/(a_2 + ...))`` with every digit
``a_k >= N``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import DomainError


@dataclass(frozen=True)
class Params:
    N: int

    def __post_init__(self):
        if isinstance(self.N, bool) or not isinstance(self.N, int) or self.N < 1:
            raise DomainError(f"N must be an integer >= 1, got {self.N!r}")

    @property
    def log_K(self) -> float:
        """log((N+1)/N), the normaliser of the invariant measure."""
        return math.log1p(1.0 / self.N)


@dataclass(frozen=True)
class DigitSeq:
    digits: tuple
    params: Params
    terminated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        for d in self.digits:
            if d < self.params.N:
                raise DomainError(f"digit {d} < N={self.params.N}")

    def __len__(self):
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def __getitem__(self, item):
        return self.digits[item]

    def reversed(self) -> "DigitSeq":
        return DigitSeq(self.digits[::-1], self.params)


@dataclass(frozen=True)
class ConvergentPair:
    p: int
    q: int
    n: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class Cylinder:
    digits: DigitSeq
    endpoints: tuple
    length: Fraction = field(default=Fraction(0))

    def contains(self, x) -> bool:
        lo, hi = self.endpoints
        return lo <= x <= hi


def _as_seq(digits, params: Params | None = None) -> DigitSeq:
    if isinstance(digits, DigitSeq):
        return digits
    if params is None:
        raise TypeError("a plain digit list needs params")
    return DigitSeq(tuple(digits), params)


def _check_unit(x: float, name: str = "x"):
    if not (isinstance(x, (int, float, Fraction)) and math.isfinite(float(x))):
        raise DomainError(f"{name} must be a finite real, got {x!r}")
    if not 0 <= x <= 1:
        raise DomainError(f"{name}={x} lies outside [0, 1]")


def gauss_map(params: Params, x):
    """T_N(x) = N/x - floor(N/x), with T_N(0) = 0.

    Fractions are mapped exactly; floats use an exact floor of N/x.
    """
    _check_unit(x)
    if x == 0:
        return type(x)(0) if isinstance(x, Fraction) else 0.0
    if isinstance(x, Fraction):
        q = params.N / x
        return q - math.floor(q)
    q = params.N / x
    return q - math.floor(q)


def digit(params: Params, x) -> int:
    """a_1(x) = floor(N/x), always >= N on (0, 1]."""
    _check_unit(x)
    if x <= 0:
        raise DomainError("digit is undefined at x = 0")
    return max(params.N, math.floor(params.N / x))


def expand(params: Params, x, max_digits: int) -> DigitSeq:
    """First ``max_digits`` digits of x; stops early when an iterate hits 0."""
    _check_unit(x)
    if not 0 < x < 1:
        raise DomainError(f"expand needs 0 < x < 1, got {x}")
    digits = []
    t = x
    terminated = False
    for _ in range(max_digits):
        if t == 0:
            terminated = True
            break
        digits.append(digit(params, t))
        t = gauss_map(params, t)
    if t == 0:
        terminated = True
    return DigitSeq(tuple(digits), params, terminated)


def convergents(digits: DigitSeq) -> list:
    """Exact (p_n, q_n) for n = 1..len(digits).

    p_n = a_n p_{n-1} + N p_{n-2}, q_n = a_n q_{n-1} + N q_{n-2} from
    p_{-1}=1, q_{-1}=0, p_0=0, q_0=1.  Fractions are not reduced.
    """
    if len(digits) == 0:
        raise DomainError("convergents need at least one digit")
    N = digits.params.N
    p2, q2, p1, q1 = 1, 0, 0, 1
    out = []
    for n, a in enumerate(digits, start=1):
        p, q = a * p1 + N * p2, a * q1 + N * q2
        out.append(ConvergentPair(p, q, n))
        p2, q2, p1, q1 = p1, q1, p, q
    return out


def _last_two(digits: DigitSeq):
    """(p_{n-1}, q_{n-1}, p_n, q_n)."""
    conv = convergents(digits)
    if len(conv) == 1:
        return 0, 1, conv[0].p, conv[0].q
    return conv[-2].p, conv[-2].q, conv[-1].p, conv[-1].q


def evaluate(digits: DigitSeq, tail=None):
    """[a_1, ..., a_n + tail]_N.

    Exact Fraction without a tail (or with a Fraction tail); float otherwise.
    """
    if len(digits) == 0:
        raise DomainError("evaluate needs at least one digit")
    pm, qm, p, q = _last_two(digits)
    if tail is None:
        return Fraction(p, q)
    if not 0 <= tail < 1:
        raise DomainError(f"tail must lie in [0, 1), got {tail}")
    if isinstance(tail, Fraction):
        return (p + tail * pm) / (q + tail * qm)
    return (p + tail * pm) / (q + tail * qm)


def cylinder(digits: DigitSeq) -> Cylinder:
    pm, qm, p, q = _last_two(digits)
    a, b = Fraction(p, q), Fraction(p + pm, q + qm)
    n = len(digits)
    length = Fraction(digits.params.N ** n, q * (q + qm))
    return Cylinder(digits, (min(a, b), max(a, b)), length)


def s_n(digits: DigitSeq) -> Fraction:
    """N q_{n-1}/q_n = [a_n, ..., a_1]_N, with s_0 = 0."""
    if len(digits) == 0:
        return Fraction(0)
    _, qm, _, q = _last_two(digits)
    return Fraction(digits.params.N * qm, q)


def approximation_gap(params: Params, digits: DigitSeq, x) -> tuple:
    """(|x - p_n/q_n|, N^n/q_n^2)."""
    conv = convergents(digits)[-1]
    gap = abs(Fraction(x) - Fraction(conv.p, conv.q))
    bound = Fraction(params.N ** conv.n, conv.q ** 2)
    return float(gap), float(bound)


def determinant(digits: DigitSeq) -> int:
    """p_{n-1} q_n - p_n q_{n-1}; equals (-N)^n."""
    pm, qm, p, q = _last_two(digits)
    return pm * q - p * qm


def words(params: Params, n: int, top: int) -> "Sequence[tuple]":
    """All digit words of length n with digits in [N, top], lexicographic."""
    return itertools.product(range(params.N, top + 1), repeat=n)
