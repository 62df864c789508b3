"""The transition operator U of the chain s_{n,a}.

(Uf)(s) = sum_{i >= N} V_{N,i}(s) f(N/(s+i)).  Two working representations
are offered: ``GridFn`` (piecewise linear on a node grid, used for variation
accounting) and the Chebyshev engine in ``spectral`` (used for the exact
distribution of s_{n,a}).  Enumeration and Monte-Carlo routes are kept as
independent cross-checks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from . import spectral
from .cf_core import DigitSeq, Params
from .errors import BudgetExceeded

DEFAULT_BUDGET = 10_000_000
BLOCK = 1 << 16
ROUNDOFF = 1e-12


def budget_limit(budget=None) -> int:
    if budget is not None:
        return int(budget)
    return int(os.environ.get("NKUZMIN_BUDGET", DEFAULT_BUDGET))


def default_i_max(params: Params) -> int:
    return params.N + 200


@dataclass(frozen=True)
class GridFn:
    """Real function on [0, 1] known at strictly increasing nodes, linear in between."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if g[0] != 0.0 or g[-1] != 1.0 or np.any(np.diff(g) <= 0):
            raise ValueError("grid must increase strictly from 0 to 1")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def __call__(self, t):
        return np.interp(t, self.grid, self.values)

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def spacing(self) -> float:
        return float(np.max(np.diff(self.grid)))

    @classmethod
    def uniform(cls, M: int) -> np.ndarray:
        return np.linspace(0.0, 1.0, M + 1)

    @classmethod
    def from_callable(cls, f, M: int = 1024, extra_nodes=()):
        grid = np.union1d(cls.uniform(M), np.asarray(extra_nodes, dtype=float))
        return cls(grid, f(grid))

    @classmethod
    def indicator(cls, y: float, M: int = 1024):
        """1 on [0, y], 0 after; a node sits exactly on the jump."""
        grid = np.union1d(cls.uniform(M), [y])
        return cls(grid, (grid <= y).astype(float))


def variation(f: GridFn) -> float:
    return float(np.abs(np.diff(f.values)).sum())


def _tail_moments(N, s, M):
    """sum_{i >= M} V_i(s) (N/(s+i))^k for k = 0, 1, 2, by partial fractions."""
    q = s + M
    m0 = (s + N) / q
    m1 = N * (s + N) * (zeta(2, q) - 1.0 / q)
    m2 = N * N * (s + N) * (zeta(3, q) - zeta(2, q) + 1.0 / q)
    return m0, m1, m2


def _tail_model(f: GridFn, t_c: float):
    """Quadratic through f at 0, t_c/2, t_c and a bound on |f - model| over [0, t_c].

    The bound samples the nodes inside plus a uniform net; between samples f is
    linear, so the miss is at most |c2| h^2 / 4 for net spacing h.
    """
    c = np.polynomial.polynomial.polyfit([0.0, t_c / 2, t_c], f([0.0, t_c / 2, t_c]), 2)
    net = np.union1d(f.grid[f.grid <= t_c], np.linspace(0.0, t_c, 257))
    dev = np.abs(f(net) - np.polynomial.polynomial.polyval(net, c))
    h = float(np.max(np.diff(net)))
    return c, float(np.max(dev)) + abs(float(c[2])) * h * h / 4


def apply_U(params: Params, f: GridFn, i_max: int | None = None, chunk: int = 64):
    """Uf on f's own grid, plus a bound on the error of the digit tail.

    Digits i > i_max send every node into [0, t_c], t_c = N/(i_max+1).  There
    f is replaced by a quadratic whose moments against the tail of V are
    summed in closed form; the radius is the tail mass times the model error.
    """
    N = params.N
    i_max = default_i_max(params) if i_max is None else int(i_max)
    s = f.grid
    out = np.zeros_like(s)
    for lo in range(N, i_max + 1, chunk):
        i = np.arange(lo, min(lo + chunk, i_max + 1), dtype=float)
        z = s[:, None] + i[None, :]
        out += ((s[:, None] + N) / (z * (z + 1.0)) * f(N / z)).sum(axis=1)
    M = i_max + 1
    (c0, c1, c2), dev = _tail_model(f, N / M)
    m0, m1, m2 = _tail_moments(N, s, M)
    out += c0 * m0 + c1 * m1 + c2 * m2
    return GridFn(s, out), float(np.max(m0)) * dev


def apply_lebesgue_pf(params: Params, f: GridFn, i_max: int | None = None):
    """Perron-Frobenius operator of T_N with respect to Lebesgue measure.

    (Pf)(x) = sum_i f(N/(x+i)) N/(x+i)^2.  Its fixed point is the invariant
    density; Uf = P(h f)/h with h that density.  Digits beyond i_max use a
    quadratic model of f on [0, N/(i_max+1)] summed with Hurwitz zeta values.
    """
    N = params.N
    i_max = default_i_max(params) if i_max is None else int(i_max)
    x = f.grid
    out = np.zeros_like(x)
    for lo in range(N, i_max + 1, 64):
        i = np.arange(lo, min(lo + 64, i_max + 1), dtype=float)
        z = x[:, None] + i[None, :]
        out += (N / z ** 2 * f(N / z)).sum(axis=1)
    M = i_max + 1
    (c0, c1, c2), dev = _tail_model(f, N / M)
    q = x + M
    out += c0 * N * zeta(2, q) + c1 * N ** 2 * zeta(3, q) + c2 * N ** 3 * zeta(4, q)
    return GridFn(x, out), float(N * zeta(2, M)) * dev


def u_infty(params: Params, f: GridFn) -> float:
    """Integral of f against G_N, exact for the piecewise-linear f."""
    N = params.N
    g, v = f.grid, f.values
    beta = np.diff(v) / np.diff(g)
    alpha = v[:-1] - beta * g[:-1]
    # integral of (alpha + beta t)/(t + N) over each cell
    cell = beta * np.diff(g) + (alpha - beta * N) * np.log1p(np.diff(g) / (g[:-1] + N))
    return float(np.sum(cell) / params.log_K)


@dataclass(frozen=True)
class ContractionReport:
    var_f: float
    var_Uf: float
    ratio: float
    bound: float
    tolerance: float
    radius: float

    @property
    def holds(self) -> bool:
        return self.ratio <= self.bound + self.tolerance


def contraction_report(params: Params, f: GridFn, lipschitz: float | None = None,
                       i_max: int | None = None) -> ContractionReport:
    """var(Uf)/var(f) against 1/(N+1), with a grid allowance 5 h Lip(f).

    Indicators attain the bound exactly, so the tolerance also carries a
    round-off allowance.
    """
    var_f = variation(f)
    if var_f <= 0:
        raise ValueError("contraction ratio needs var f > 0")
    Uf, radius = apply_U(params, f, i_max)
    var_Uf = variation(Uf)
    if lipschitz is None:
        lipschitz = float(np.max(np.abs(np.diff(f.values) / np.diff(f.grid))))
    tol = 5.0 * f.spacing * lipschitz + 2.0 * radius / var_f + ROUNDOFF
    return ContractionReport(var_f, var_Uf, var_Uf / var_f, 1.0 / (params.N + 1), tol, radius)


# ---------------------------------------------------------------------------
# distribution of s_{n,a}


def apply_Un_indicator(params: Params, y, a, n: int, i_max: int | None = None,
                       method: str = "spectral", budget=None):
    """(U^n f_y)(a) = P_a(s_n <= y), returned as (value, radius).

    ``spectral`` decomposes the event into digit ranges and evaluates each
    with the Chebyshev engine; its radius is an a-posteriori error estimate.
    ``enumerate`` sums every word with the first n-1 digits <= i_max (the last
    digit in closed form) and returns the midpoint of a rigorous enclosure.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if method == "spectral":
        op = spectral.operator(params.N, i_max=i_max)
        v, err = spectral.joint_probability(op, n, [1.0], y, spectral.LE, start=a)
        return float(min(max(v[0], 0.0), 1.0)), err
    if method == "enumerate":
        return _enumerate_cdf(params, float(y), float(a), n, i_max, budget)
    raise ValueError(f"unknown method {method!r}")


def _enumerate_cdf(params, y, a, n, i_max, budget):
    N = params.N
    i_max = default_i_max(params) if i_max is None else int(i_max)
    width = i_max - N + 1
    need = width ** (n - 1)
    if need > budget_limit(budget):
        raise BudgetExceeded(f"{need} words exceed the budget", need, budget_limit(budget))
    w = np.array([1.0])
    s = np.array([a])
    lost = 0.0
    digits = np.arange(N, i_max + 1, dtype=float)
    for _ in range(n - 1):
        lost += float(np.sum(w * (s + N) / (s + i_max + 1)))
        z = s[:, None] + digits[None, :]
        w = (w[:, None] * (s[:, None] + N) / (z * (z + 1.0))).ravel()
        s = (N / z).ravel()
    if y <= 0:
        return 0.0 + lost / 2, lost / 2
    j = np.maximum(N, np.ceil(N / y - s - 1e-12))
    value = float(np.sum(w * (s + N) / (s + j)))
    return value + lost / 2, lost / 2


def enumerate_words(params: Params, a, n: int, top: int, budget=None):
    """All words with digits in [N, top]: (digits (W, n), weights v_w(a), final states)."""
    N = params.N
    width = top - N + 1
    if width ** n > budget_limit(budget):
        raise BudgetExceeded(f"{width ** n} words exceed the budget", width ** n, budget_limit(budget))
    digits = np.arange(N, top + 1)
    w = np.array([1.0])
    s = np.array([float(a)])
    words = np.zeros((1, 0), dtype=np.int64)
    for _ in range(n):
        z = s[:, None] + digits[None, :]
        w = (w[:, None] * (s[:, None] + N) / (z * (z + 1.0))).ravel()
        s = (N / z).ravel()
        words = np.concatenate([np.repeat(words, width, axis=0),
                                np.tile(digits, len(words))[:, None]], axis=1)
    return words, w, s


def max_atom(params: Params, a, n: int, i_max: int | None = None, budget=None):
    """Heaviest atom of s_{n,a} among words with digits <= i_max: (word, weight)."""
    i_max = params.N + 8 if i_max is None else int(i_max)
    words, w, _ = enumerate_words(params, a, n, i_max, budget)
    k = int(np.argmax(w))
    return DigitSeq(tuple(int(d) for d in words[k]), params), float(w[k])


def sample_digits(params: Params, s, u):
    """Inverse-transform draw of the next digit from state s with u in (0, 1].

    P(digit >= j) = (s+N)/(s+j), so the draw is floor((s+N)/u - s).
    """
    return np.maximum(params.N, np.floor((s + params.N) / u - s))


def _chain_block(params, a, n, size, seed_seq):
    rng = np.random.default_rng(seed_seq)
    s = np.full(size, float(a))
    for _ in range(n):
        u = 1.0 - rng.random(size)
        i = sample_digits(params, s, u)
        s = params.N / (s + i)
    return s


def simulate_chain(params: Params, a, n: int, paths: int, seed: int = 0, workers: int = 1):
    """Samples of s_{n,a} from ``paths`` independent chains.

    Paths are cut into fixed blocks with their own spawned seeds, so the
    output depends only on ``seed`` and not on ``workers``.
    """
    if n == 0:
        return np.full(paths, float(a))
    nblocks = -(-paths // BLOCK)
    seeds = np.random.SeedSequence(seed).spawn(nblocks)
    sizes = [min(BLOCK, paths - k * BLOCK) for k in range(nblocks)]
    job = lambda k: _chain_block(params, a, n, sizes[k], seeds[k])
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(job, range(nblocks)))
    else:
        parts = [job(k) for k in range(nblocks)]
    return np.concatenate(parts)


def empirical_cdf(samples, y) -> tuple:
    """(P(sample <= y), standard error)."""
    p = float(np.mean(samples <= y))
    return p, float(np.sqrt(max(p * (1 - p), 1e-300) / len(samples)))
