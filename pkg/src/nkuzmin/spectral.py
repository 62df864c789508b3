"""Chebyshev discretisation of the transition operator U and exact digit-event
decomposition for the chain s_{n,a}.

Every function U is applied to here is analytic on a neighbourhood of [0, 1],
so a modest Chebyshev grid represents it to round-off.  Infinite digit sums
are split into ``explicit`` enumerated terms followed by an Euler-Maclaurin
tail whose leading integral is done by Gauss-Legendre quadrature after the
substitution u = N/(s+i).

The event {s_n <= y} is a countable union of cylinders.  Comparing the digits
a_n, a_{n-1}, ... against the N-expansion of y (alternating the order at each
level, since u_i(s) = N/(s+i) is decreasing in s) splits it into at most n
"range" events, where one digit ranges over an interval and everything after
it is fixed, plus finitely many fully fixed words whose outcome depends only
on s_0.  Range events do not depend on the state of the chain, so each one is
an expectation of a smooth function: U^{m-1} phi evaluated at the start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .cf_core import Params

LE, GE, EQ = "le", "ge", "eq"

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS
_EM_STEP = 0.5
_EM_OFFSETS = _EM_STEP * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])


class ChebGrid:
    """Chebyshev points of the second kind on [0, 1] with barycentric interpolation."""

    def __init__(self, K: int):
        k = np.arange(K)
        self.K = K
        self.nodes = 0.5 * (1.0 - np.cos(np.pi * k / (K - 1)))
        w = (-1.0) ** k
        w[0] *= 0.5
        w[-1] *= 0.5
        self.weights = w

    def interp_matrix(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float).ravel()
        diff = t[:, None] - self.nodes[None, :]
        hit = diff == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            c = self.weights / diff
            M = c / c.sum(axis=1, keepdims=True)
        rows = hit.any(axis=1)
        if rows.any():
            M[rows] = hit[rows].astype(float)
        return M

    def evaluate(self, values, t):
        return self.interp_matrix(np.atleast_1d(t)) @ values

    def coefficients(self, values) -> np.ndarray:
        """Chebyshev coefficients (in 2t-1) of the interpolant, along axis 0."""
        z = 2.0 * self.nodes - 1.0
        return np.polynomial.chebyshev.chebfit(z, values, self.K - 1)

    def tail_size(self, values) -> float:
        """Size of the last three coefficients; a proxy for interpolation error."""
        c = np.abs(self.coefficients(values))
        return float(c[-3:].sum(axis=0).max()) if c.ndim > 1 else float(c[-3:].sum())


def _h(params: Params, psi, s, i):
    """V_i(s) psi(N/(s+i)) for real i; s shape (P,), i shape (P, J)."""
    N = params.N
    z = s[:, None] + i
    w = (s[:, None] + N) / (z * (z + 1.0))
    vals = psi((N / z).ravel())
    vals = vals.reshape(z.shape + vals.shape[1:])
    return w.reshape(w.shape + (1,) * (vals.ndim - 2)) * vals


def _em_tail(params: Params, psi, s, M: int):
    """sum_{i >= M} V_i(s) psi(N/(s+i)) by Euler-Maclaurin; returns (value, error proxy)."""
    N = params.N
    uM = N / (s + M)
    u = uM[:, None] * _GL_NODES[None, :]
    vals = psi(u.ravel())
    vals = vals.reshape(u.shape + vals.shape[1:])
    kern = (_GL_WEIGHTS[None, :] / (N + u))
    kern = kern.reshape(kern.shape + (1,) * (vals.ndim - 2))
    scale = ((s + N) * uM).reshape((-1,) + (1,) * (vals.ndim - 2))
    integral = scale * (kern * vals).sum(axis=1)

    i = np.broadcast_to(M + _EM_OFFSETS, (s.size, 5))
    h = _h(params, psi, s, i)
    hm2, hm1, h0, hp1, hp2 = (h[:, k] for k in range(5))
    d1 = (hm2 - 8 * hm1 + 8 * hp1 - hp2) / (12 * _EM_STEP)
    d3 = (hp2 - 2 * hp1 + 2 * hm1 - hm2) / (2 * _EM_STEP ** 3)
    value = integral + 0.5 * h0 - d1 / 12.0 + d3 / 720.0
    return value, float(np.max(np.abs(d3))) / 720.0


def digit_sum(params: Params, psi, s, lo: int, hi=None, explicit: int = 201):
    """sum_{i=lo}^{hi} V_i(s) psi(N/(s+i)); hi=None means infinity.

    ``psi`` maps a flat array of states to an array whose first axis matches.
    Returns (values, error proxy).
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    lo = max(int(lo), params.N)
    if hi is not None:
        hi = int(hi)
        if hi < lo:
            probe = psi(np.zeros(1))
            return np.zeros((s.size,) + probe.shape[1:]), 0.0
        if hi - lo < 4 * explicit:
            i = np.broadcast_to(np.arange(lo, hi + 1, dtype=float), (s.size, hi - lo + 1))
            return _h(params, psi, s, i).sum(axis=1), 0.0
        v1, e1 = digit_sum(params, psi, s, lo, None, explicit)
        v2, e2 = digit_sum(params, psi, s, hi + 1, None, explicit)
        return v1 - v2, e1 + e2
    i = np.broadcast_to(np.arange(lo, lo + explicit, dtype=float), (s.size, explicit))
    head = _h(params, psi, s, i).sum(axis=1)
    tail, err = _em_tail(params, psi, s, lo + explicit)
    return head + tail, err


class UOperator:
    """U restricted to polynomials of degree < K, as a K x K matrix on node values."""

    def __init__(self, params: Params, K: int = 32, i_max: int | None = None):
        self.params = params
        self.grid = ChebGrid(K)
        self.i_max = params.N + 200 if i_max is None else int(i_max)
        self.explicit = self.i_max - params.N + 1
        self.matrix, self.build_error = self._build()
        self._powers = {0: np.eye(K), 1: self.matrix}
        ones = np.ones(K)
        self.error = self.build_error + float(np.max(np.abs(self.matrix @ ones - ones)))

    def _build(self):
        return digit_sum(self.params, self.grid.interp_matrix, self.grid.nodes,
                         self.params.N, None, self.explicit)

    def power(self, m: int) -> np.ndarray:
        if m not in self._powers:
            self._powers[m] = self.matrix @ self.power(m - 1)
        return self._powers[m]

    def apply(self, values, m: int = 1):
        return self.power(m) @ values

    def expect(self, values, m: int, a: float):
        """(U^m f)(a) for f given by its node values."""
        return self.grid.evaluate(self.power(m) @ values, a)[0]

    def sum_digits(self, psi, s, lo, hi=None):
        return digit_sum(self.params, psi, s, lo, hi, self.explicit)


@lru_cache(maxsize=64)
def operator(N: int, K: int = 32, i_max: int | None = None) -> UOperator:
    return UOperator(Params(N), K, i_max)


# ---------------------------------------------------------------------------
# event decomposition


@dataclass(frozen=True)
class RangeTerm:
    """Digit a_m in [lo, hi] (hi None = unbounded), digits m+1..n fixed to suffix."""
    m: int
    lo: int
    hi: int | None
    suffix: tuple


@dataclass(frozen=True)
class TerminalTerm:
    """All n digits fixed; the event also needs ``rel(s_0, tau)``."""
    suffix: tuple
    rel: str
    tau: Fraction


def _split(N: int, tau: Fraction):
    q = N / tau
    ell = math.floor(q)
    return ell, q - ell


def events(N: int, n: int, rel: str, tau) -> list:
    """Decompose {s_n rel tau} into RangeTerm / TerminalTerm pieces."""
    tau = Fraction(tau)
    out = []

    def walk(m, rel, tau, suffix):
        if m == 0:
            out.append(TerminalTerm(suffix, rel, tau))
            return
        if rel == LE:
            if tau <= 0:
                return
            ell, th = _split(N, tau)
            if th == 0:
                out.append(RangeTerm(m, ell, None, suffix))
                if ell - 1 >= N:
                    walk(m - 1, EQ, Fraction(1), (ell - 1,) + suffix)
            else:
                out.append(RangeTerm(m, ell + 1, None, suffix))
                walk(m - 1, GE, th, (ell,) + suffix)
        elif rel == GE:
            if tau <= 0:
                out.append(RangeTerm(m, N, None, suffix))
                return
            if tau > 1:
                return
            ell, th = _split(N, tau)
            if ell - 1 >= N:
                out.append(RangeTerm(m, N, ell - 1, suffix))
            walk(m - 1, LE, th, (ell,) + suffix)
        elif rel == EQ:
            if tau <= 0 or tau > 1:
                return
            ell, th = _split(N, tau)
            walk(m - 1, EQ, th, (ell,) + suffix)
            if th == 0 and ell - 1 >= N:
                walk(m - 1, EQ, Fraction(1), (ell - 1,) + suffix)
        else:
            raise ValueError(rel)

    walk(n, rel, tau, ())
    return out


def _terminal_holds(rel, s0, tau) -> float:
    if rel == LE:
        return float(s0 <= tau)
    if rel == GE:
        return float(s0 >= tau)
    return float(s0 == tau)


def _terminal_uniform(rel, tau) -> float:
    """Lebesgue measure of {s_0 in [0,1] : rel(s_0, tau)}."""
    t = min(max(float(tau), 0.0), 1.0)
    if rel == LE:
        return t
    if rel == GE:
        return 1.0 - t
    return 0.0


def suffix_weight(params: Params, suffix, xs):
    """psi(t) = (prod of V along the fixed digits from t) * bbl(final state, x)."""
    N = params.N
    xs = np.atleast_1d(np.asarray(xs, dtype=float))

    def psi(t):
        t = np.asarray(t, dtype=float)
        w = np.ones_like(t)
        state = t
        for d in suffix:
            w = w * (state + N) / ((state + d) * (state + d + 1.0))
            state = N / (state + d)
        st = state[:, None]
        return w[:, None] * (st + N) * xs[None, :] / (st * xs[None, :] + N)

    return psi


def joint_probability(op: UOperator, n: int, xs, y, rel: str = LE, start=0.0,
                      compare_start="same"):
    """P(T^n < x, s_n rel y) for every x in xs.

    Digits follow the chain started at ``start`` (weights v_w(start)).  The
    comparison variable is the reversed fraction started at ``start`` when
    ``compare_start == "same"``, or at a uniform independent point when
    ``compare_start == "uniform"``.  Returns (values, error proxy).
    """
    params = op.params
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    start_exact = Fraction(start)
    a = float(start)
    total = np.zeros(xs.size)
    err = 0.0
    if n == 0:
        s0 = np.array([a])
        b = suffix_weight(params, (), xs)(s0)[0]
        if compare_start == "same":
            return _terminal_holds(rel, start_exact, Fraction(y)) * b, 0.0
        return _terminal_uniform(rel, y) * b, 0.0
    for term in events(params.N, n, rel, y):
        psi = suffix_weight(params, term.suffix, xs)
        if isinstance(term, TerminalTerm):
            if compare_start == "same":
                hold = _terminal_holds(term.rel, start_exact, term.tau)
            else:
                hold = _terminal_uniform(term.rel, term.tau)
            if hold:
                total += hold * psi(np.array([a]))[0]
            continue
        if term.m == 1:
            val, e = op.sum_digits(psi, np.array([a]), term.lo, term.hi)
            total += val[0]
            err += e
        else:
            phi, e = op.sum_digits(psi, op.grid.nodes, term.lo, term.hi)
            total += op.expect(phi, term.m - 1, a)
            err += e + op.grid.tail_size(phi) + (term.m - 1) * op.error
    return total, err
