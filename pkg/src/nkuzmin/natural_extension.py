"""The natural extension: an invertible map of the unit square whose first
coordinate follows T_N and whose second coordinate accumulates past digits."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np
from scipy import stats

from .cf_core import Params, digit, gauss_map
from .errors import DomainError
from .measures import conditional_quantile, extended_rect, gauss_measure

BLOCK = 1 << 16


class SquarePoint(NamedTuple):
    x: float
    y: float


def _point(p) -> SquarePoint:
    p = SquarePoint(*p)
    for c in p:
        if not 0 <= c <= 1:
            raise DomainError(f"point {tuple(p)} outside the unit square")
    return p


def step(params: Params, p) -> SquarePoint:
    """(x, y) -> (T_N x, N/(a_1(x) + y))."""
    x, y = _point(p)
    if x == 0:
        raise DomainError("a_1 is undefined at x = 0")
    return SquarePoint(gauss_map(params, x), params.N / (digit(params, x) + y))


def inv_step(params: Params, p) -> SquarePoint:
    """(x, y) -> (N/(a_1(y) + x), T_N y)."""
    x, y = _point(p)
    if y == 0:
        raise DomainError("a_1 is undefined at y = 0")
    return SquarePoint(params.N / (digit(params, y) + x), gauss_map(params, y))


def iterate(params: Params, p, n: int) -> SquarePoint:
    p = _point(p)
    move = step if n >= 0 else inv_step
    for _ in range(abs(n)):
        p = move(params, p)
    return p


def extended_digit(params: Params, p, l: int) -> int:
    """Digit at index l of the doubly infinite sequence attached to (x, y).

    Index 1 is a_1(x); index 0 is a_1(y).  Non-positive indices read the y
    orbit directly instead of iterating the inverse map, which avoids the
    round-off of re-extracting a digit from N/(a + x).
    """
    x, y = _point(p)
    if l >= 1:
        return digit(params, iterate(params, (x, y), l - 1).x)
    t = y
    for _ in range(-l):
        t = gauss_map(params, t)
    return digit(params, t)


# ---------------------------------------------------------------------------
# vectorised forms and Monte-Carlo checks


def step_arrays(params: Params, x, y):
    N = params.N
    q = N / x
    a = np.maximum(N, np.floor(q))
    return q - a, N / (a + y)


def sample_extended(params: Params, size: int, rng):
    """Exact draws from the extended measure.

    y is drawn from G_N by inverting its distribution function; x given y has
    distribution function x(y+N)/(xy+N), inverted in closed form.
    """
    N = params.N
    u, v = rng.random(size), rng.random(size)
    y = N * np.expm1(u * params.log_K)
    x = conditional_quantile(params, y, v)
    return x, y


class InvarianceResult(NamedTuple):
    mass_fwd: float
    mass_direct: float
    stderr: float
    resampled: int

    @property
    def z(self) -> float:
        return (self.mass_fwd - self.mass_direct) / self.stderr if self.stderr > 0 else 0.0


def _block_hits(params, rect, size, seed_seq):
    rng = np.random.default_rng(seed_seq)
    x1, x2, y1, y2 = rect
    x, y = sample_extended(params, size, rng)
    bad = x == 0
    resampled = int(bad.sum())
    while bad.any():
        x[bad], y[bad] = sample_extended(params, int(bad.sum()), rng)
        bad = x == 0
        resampled += int(bad.sum())
    tx, ty = step_arrays(params, x, y)
    hit = (tx >= x1) & (tx <= x2) & (ty >= y1) & (ty <= y2)
    return int(hit.sum()), resampled


def invariance_mc(params: Params, rect, samples: int, seed: int = 0, workers: int = 1):
    """Extended-measure mass of the preimage of ``rect`` vs the mass of ``rect``.

    The preimage mass is the fraction of exact extended-measure draws that the
    map sends into the rectangle.  Draws with x exactly 0 are redrawn and
    counted.
    """
    if samples <= 0:
        raise DomainError("samples must be positive")
    x1, x2, y1, y2 = rect
    if not (0 <= x1 <= x2 <= 1 and 0 <= y1 <= y2 <= 1):
        raise DomainError(f"bad rectangle {rect}")
    nblocks = -(-samples // BLOCK)
    seeds = np.random.SeedSequence(seed).spawn(nblocks)
    sizes = [min(BLOCK, samples - k * BLOCK) for k in range(nblocks)]
    job = lambda k: _block_hits(params, rect, sizes[k], seeds[k])
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(job, range(nblocks)))
    else:
        parts = [job(k) for k in range(nblocks)]
    hits = sum(h for h, _ in parts)
    resampled = sum(r for _, r in parts)
    p = hits / samples
    direct = extended_rect(params, x1, x2, y1, y2)
    stderr = float(np.sqrt(max(direct * (1 - direct), 0.0) / samples))
    return InvarianceResult(p, direct, stderr, resampled)


def marginal_ks(params: Params, samples: int, seed: int = 0) -> float:
    """KS distance between the second coordinate after one step and G_N."""
    rng = np.random.default_rng(seed)
    x, y = sample_extended(params, samples, rng)
    keep = x > 0
    _, ty = step_arrays(params, x[keep], y[keep])
    cdf = lambda t: gauss_measure(params, np.clip(t, 0.0, 1.0))
    return float(stats.kstest(ty, cdf).statistic)
