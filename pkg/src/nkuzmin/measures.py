"""Invariant, extended and conditional measures of the N-continued fraction map."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cf_core import Params
from .errors import DomainError


@dataclass(frozen=True)
class MeasureParams:
    params: Params
    log_norm: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "log_norm", self.params.log_K)

    @property
    def N(self):
        return self.params.N


@dataclass(frozen=True)
class ConditionalParam:
    a: float

    def __post_init__(self):
        if not 0 <= self.a <= 1:
            raise DomainError(f"conditioning parameter a={self.a} outside [0, 1]")


def _mp(p) -> MeasureParams:
    return p if isinstance(p, MeasureParams) else MeasureParams(p)


def _unit(*vals):
    for v in vals:
        arr = np.asarray(v, dtype=float)
        if not np.all(np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
            raise DomainError(f"argument {v!r} outside [0, 1]")


def gauss_measure(mp, x):
    """G_N([0, x]) = log((x+N)/N) / log((N+1)/N)."""
    mp = _mp(mp)
    _unit(x)
    out = np.log1p(np.asarray(x, dtype=float) / mp.N) / mp.log_norm
    return float(out) if np.ndim(out) == 0 else out


def gauss_density(mp, x):
    mp = _mp(mp)
    return 1.0 / ((np.asarray(x, dtype=float) + mp.N) * mp.log_norm)


def extended_measure(mp, x, y):
    """Extended measure of the rectangle [0, x] x [0, y]."""
    mp = _mp(mp)
    _unit(x, y)
    xy = np.asarray(x, dtype=float) * np.asarray(y, dtype=float)
    out = np.log1p(xy / mp.N) / mp.log_norm
    return float(out) if np.ndim(out) == 0 else out


def extended_rect(mp, x1, x2, y1, y2) -> float:
    """Extended measure of [x1, x2] x [y1, y2] by inclusion-exclusion."""
    F = lambda a, b: extended_measure(mp, a, b)
    return F(x2, y2) - F(x1, y2) - F(x2, y1) + F(x1, y1)


def extended_density(mp, x, y):
    mp = _mp(mp)
    return mp.N / ((np.asarray(x) * np.asarray(y) + mp.N) ** 2 * mp.log_norm)


def kernel_V(params: Params, i, x):
    """Transition probability V_{N,i}(x) = (x+N)/((x+i)(x+i+1))."""
    if np.any(np.asarray(i) < params.N):
        raise DomainError(f"digit {i} < N={params.N}")
    x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    return (x + params.N) / ((x + i) * (x + i + 1))


def kernel_tail(params: Params, j, x):
    """sum_{i >= j} V_{N,i}(x) = (x+N)/(x+j) by telescoping."""
    return (x + params.N) / (x + j)


def digit_law(params: Params, i: int) -> Fraction:
    """Lebesgue probability that the first digit equals i: N/(i(i+1))."""
    if i < params.N:
        raise DomainError(f"digit {i} < N={params.N}")
    return Fraction(params.N, i * (i + 1))


def bbl(params: Params, s, x):
    """Brodén-Borel-Lévy distribution function (s+N)x/(sx+N)."""
    N = params.N
    return (s + N) * x / (s * x + N)


def conditional_measure(params: Params, a, x):
    """G_{N,a}([0, x]) = (N+a)x/(ax+N); a = 0 is Lebesgue measure."""
    if isinstance(a, ConditionalParam):
        a = a.a
    _unit(a, x)
    return bbl(params, a, x)


def conditional_quantile(params: Params, a, u):
    """Inverse of x -> G_{N,a}([0, x])."""
    N = params.N
    return u * N / (N + a * (1 - u))


def density_bounds(params: Params) -> tuple:
    """Constants bounding the extended density against Lebesgue measure."""
    N, L = params.N, params.log_K
    return N / ((N + 1) ** 2 * L), 1.0 / (N * L)
