"""Distribution functions of T_N^n and of the natural extension, the error term
e_{n,a}(x, y), its supremum and empirical rate fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats
from scipy.special import digamma, zeta

from . import spectral
from .bounds import v_at_1
from .cf_core import Params
from .errors import BudgetExceeded, DegenerateFit, DomainError
from .natural_extension import step_arrays
from .transfer_operator import budget_limit, default_i_max, enumerate_words


def limit_2d(params: Params, x, y):
    """log((xy+N)/N) / log((N+1)/N)."""
    return np.log1p(np.asarray(x, dtype=float) * np.asarray(y, dtype=float) / params.N) / params.log_K


def _op(params, i_max=None):
    return spectral.operator(params.N, i_max=i_max)


def _check(*vals):
    for v in vals:
        if not 0 <= v <= 1:
            raise DomainError(f"argument {v} outside [0, 1]")


def F_n_1d(params: Params, n: int, x, i_max=None, method: str = "spectral", budget=None):
    """Lebesgue measure of {T_N^n < x}, as (value, radius).

    Both methods sum lambda(cylinder) * bbl(s_n, x) over rank-n cylinders.
    ``spectral`` uses the Chebyshev engine; ``enumerate`` lists the first n-1
    digits up to i_max, does the last digit in closed form (a digamma
    difference) and returns the midpoint of a rigorous enclosure.
    """
    _check(x)
    if n == 0:
        return float(x), 0.0
    if method == "spectral":
        v, err = spectral.joint_probability(_op(params, i_max), n, [x], 1, spectral.LE, start=0.0)
        return float(v[0]), err
    if method != "enumerate":
        raise ValueError(method)
    N = params.N
    i_max = default_i_max(params) if i_max is None else int(i_max)
    need = (i_max - N + 1) ** (n - 1)
    if need > budget_limit(budget):
        raise BudgetExceeded(f"{need} words exceed the budget", need, budget_limit(budget))
    digits = np.arange(N, i_max + 1, dtype=float)
    w, s, lost = np.array([1.0]), np.array([0.0]), 0.0
    for _ in range(n - 1):
        lost += float(np.sum(w * (s + N) / (s + i_max + 1)))
        z = s[:, None] + digits[None, :]
        w = (w[:, None] * (s[:, None] + N) / (z * (z + 1.0))).ravel()
        s = (N / z).ravel()
    # sum_{i>=N} V_i(s) bbl(N/(s+i), x) = (s+N)(psi(s+N+x) - psi(s+N))
    value = float(np.sum(w * (s + N) * (digamma(s + N + x) - digamma(s + N))))
    # a dropped cylinder contributes between x and 1 times its mass
    return value + (1 + x) * lost / 2, (1 - x) * lost / 2


def _preimage_sum(params: Params, F, x: float, start: int, M: int = 20000) -> float:
    """sum_{i >= start} [F(N/i) - F(N/(x+i))] with a quadratic-model tail.

    Beyond i = M every argument lies in [0, N/(M+1)], where F - F(0) is fitted
    by c1 t + c2 t^2; the two resulting series are a digamma and a Hurwitz
    zeta difference.
    """
    N = params.N
    i = np.arange(start, M + 1, dtype=float)
    head = float(np.sum(F(N / i) - F(N / (x + i))))
    d = N / (M + 1)
    f0, f1, f2 = F(0.0), F(d), F(2 * d)
    c2 = (f2 - 2 * f1 + f0) / (2 * d * d)
    c1 = (f1 - f0) / d - c2 * d
    q = M + 1
    s1 = N * (digamma(q + x) - digamma(q))
    s2 = N * N * (zeta(2, q) - zeta(2, q + x))
    return head + float(c1 * s1 + c2 * s2)


def gk_step_1d(params: Params, F, x: float, M: int = 20000) -> float:
    """One Gauss-Kuzmin step: sum_{i >= N} [F(N/i) - F(N/(x+i))].

    This is the measure of T_N^{-1}[0, x) = U_i [N/(x+i), N/i) under dF.
    """
    if x == 0:
        return 0.0
    return _preimage_sum(params, F, x, params.N, M)


def gk_step_2d(params: Params, F, x: float, y: float, M: int = 20000) -> float:
    """One step of the two-dimensional recursion.

    With N/y = l + t (l integer, 0 <= t < 1):
    F'(x, y) = sum_{i >= l} [F(N/i,1) - F(N/(x+i),1)] - [F(N/l, t) - F(N/(x+l), t)].
    """
    if x == 0 or y == 0:
        return 0.0
    N = params.N
    q = Fraction(N) / Fraction(y)
    ell = math.floor(q)
    t = float(q - ell)
    head = _preimage_sum(params, lambda u: F(u, 1.0), x, ell, M)
    return head - (F(N / ell, t) - F(N / (x + ell), t))


def F_n_2d(params: Params, n: int, x, y, method: str = "exact", samples: int = 10 ** 6,
           seed: int = 0, i_max=None):
    """Lebesgue measure of the set of points whose n-th image lies in [0,x] x [0,y].

    ``exact`` conditions on rank-n cylinders: the first coordinate contributes
    a Brodén-Borel-Lévy factor and the second coordinate an interval of
    starting values, so the result is the event decomposition with a uniform
    comparison start.  ``mc`` iterates uniform points; radius = 4 stderr.
    """
    _check(x, y)
    if method == "exact":
        v, err = spectral.joint_probability(_op(params, i_max), n, [x], y, spectral.LE,
                                            start=0.0, compare_start="uniform")
        return float(v[0]), err
    if method != "mc":
        raise ValueError(method)
    rng = np.random.default_rng(seed)
    px, py = rng.random(samples), rng.random(samples)
    px = np.where(px == 0, 0.5, px)
    for _ in range(n):
        px, py = step_arrays(params, px, py)
        px = np.where(px == 0, rng.random(samples), px)
    p = float(np.mean((px <= x) & (py <= y)))
    return p, 4 * math.sqrt(max(p * (1 - p), 1e-300) / samples)


def error_2d(params: Params, n: int, a, x, y, i_max=None):
    """e_{n,a}(x, y), as (value, radius)."""
    _check(a, x, y)
    v, err = spectral.joint_probability(_op(params, i_max), n, [x], y, spectral.LE, start=a)
    return float(v[0] - limit_2d(params, x, y)), err


@dataclass
class ErrorSurface:
    N: int
    n: int
    a: float
    xs: np.ndarray
    ys: list
    errors: np.ndarray
    errors_left: np.ndarray
    tail_radius: float
    sup_abs: float
    argmax: tuple = field(default=(0.0, 0.0))

    @property
    def lower(self) -> float:
        return 0.5 * v_at_1(Params(self.N), self.n)

    @property
    def upper(self) -> float:
        return (self.N + 1.0) ** (-self.n)

    @property
    def sandwich_holds(self) -> bool:
        r = self.tail_radius
        return self.lower - r <= self.sup_abs <= self.upper + r


def jump_candidates(params: Params, n: int, a, count: int = 24, top: int | None = None, budget=None):
    """Exact s-values of the heaviest rank-n words with digits <= top."""
    N = params.N
    top = N + 3 if top is None else top
    words, w, _ = enumerate_words(params, float(a), n, top, budget)
    order = np.argsort(-w, kind="stable")[:count]
    A = Fraction(a)
    out = []
    for k in order:
        s = A
        for d in words[k]:
            s = N / (s + int(d))
        out.append(s)
    return out


def sup_error(params: Params, n: int, a, grid_res: int = 33, i_max=None, jumps: int = 24,
              budget=None) -> ErrorSurface:
    """sup over (x, y) of |e_{n,a}| on a grid plus the heaviest jump locations in y.

    In y the error is a step function minus an increasing function, so each
    jump is probed from both sides: at y itself and in the left limit, which
    removes the atom sitting at y.
    """
    if grid_res < 9:
        raise ValueError("grid_res must be >= 9")
    _check(a)
    op = _op(params, i_max)
    xs = np.linspace(0.0, 1.0, grid_res)
    grid_ys = [Fraction(k, grid_res - 1) for k in range(grid_res)]
    ys = grid_ys + [s for s in jump_candidates(params, n, a, jumps, budget=budget) if s not in grid_ys]
    errs = np.zeros((len(ys), xs.size))
    left = np.zeros_like(errs)
    radius = 0.0
    for k, y in enumerate(ys):
        L = limit_2d(params, xs, float(y))
        q, e1 = spectral.joint_probability(op, n, xs, y, spectral.LE, start=a)
        atom, e2 = spectral.joint_probability(op, n, xs, y, spectral.EQ, start=a)
        errs[k] = q - L
        left[k] = q - atom - L
        radius = max(radius, e1 + e2)
    both = np.maximum(np.abs(errs), np.abs(left))
    k, j = np.unravel_index(int(np.argmax(both)), both.shape)
    return ErrorSurface(params.N, n, float(a), xs, ys, errs, left, radius,
                        float(both[k, j]), (float(xs[j]), float(ys[k])))


def rate_fit(params: Params, sups, return_ci: bool = False):
    """exp of the least-squares slope of log sup_abs against n.

    ``sups`` holds (n, sup_abs) or (n, sup_abs, radius); points with
    sup_abs <= 10 radius are dropped.
    """
    pts = []
    for item in sups:
        n, s = item[0], item[1]
        r = item[2] if len(item) > 2 else 0.0
        if s > 10 * r and s > 0:
            pts.append((n, s))
    if len(pts) < 3:
        raise DegenerateFit(f"only {len(pts)} usable points; need 3")
    n = np.array([p[0] for p in pts], dtype=float)
    ls = np.log([p[1] for p in pts])
    fit = stats.linregress(n, ls)
    alpha = float(np.exp(fit.slope))
    if not return_ci:
        return alpha
    half = 2.0 * fit.stderr
    return alpha, (float(np.exp(fit.slope - half)), float(np.exp(fit.slope + half)))
