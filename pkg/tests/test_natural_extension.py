import math
from fractions import Fraction

import numpy as np
import pytest

from nkuzmin.cf_core import DigitSeq, Params, convergents, evaluate, expand
from nkuzmin.errors import DomainError
from nkuzmin.measures import gauss_measure
from nkuzmin.natural_extension import (
    extended_digit,
    invariance_mc,
    inv_step,
    iterate,
    marginal_ks,
    sample_extended,
    step,
)

from conftest import GOLDEN, SQRT3_M1


def test_step_examples():
    x, y = step(Params(2), (0.8, 0.3))
    assert x == pytest.approx(0.5) and y == pytest.approx(2 / 2.3)
    x, y = step(Params(1), (GOLDEN, GOLDEN))
    assert x == pytest.approx(GOLDEN, abs=1e-15) and y == pytest.approx(GOLDEN, abs=1e-15)
    with pytest.raises(DomainError):
        step(Params(1), (0.0, 0.5))


def test_step_second_coordinate_is_one_digit_evaluation():
    rng = np.random.default_rng(1)
    for N in (1, 2, 7):
        p = Params(N)
        for x, y in rng.random((50, 2)):
            a1 = expand(p, x, 1).digits
            assert step(p, (x, y)).y == pytest.approx(evaluate(DigitSeq(a1, p), tail=y), rel=1e-15)


def test_inv_step_examples():
    x, y = inv_step(Params(2), (0.5, 2 / 2.3))
    assert x == pytest.approx(0.8) and y == pytest.approx(0.3)
    y0 = 1 / math.sqrt(7)
    x, y = inv_step(Params(1), (0.0, y0))
    a1 = math.floor(1 / y0)
    assert x == pytest.approx(1 / a1) and y == pytest.approx(1 / y0 - a1)
    with pytest.raises(DomainError):
        inv_step(Params(1), (0.5, 0.0))


def test_inv_step_inverts_step_on_random_points():
    # recovering y multiplies the rounding of N/(a_1 + y) by about a_1
    rng = np.random.default_rng(0)
    eps = np.finfo(float).eps
    for N in (1, 3):
        p = Params(N)
        for x, y in rng.random((10_000, 2)):
            a1 = math.floor(N / x)
            q = inv_step(p, step(p, (x, y)))
            assert abs(q.x - x) < 1e-12
            assert abs(q.y - y) <= max(1e-12, 8 * eps * a1)


def test_iterate_round_trip_float():
    # going back applies T_N^n to [a_n, ..., a_1 + y], stretching its rounding
    # by q_n(x)^2 / N^n, where q_n(x) are the continuants of x's digits
    rng = np.random.default_rng(3)
    eps = np.finfo(float).eps
    for N in (1, 2, 5):
        p = Params(N)
        for x, y in rng.random((50, 2)):
            for n in (1, 3, 6, 20):
                q = iterate(p, iterate(p, (x, y), n), -n)
                qn = convergents(expand(p, x, n))[-1].q
                stretch = 8 * eps * qn * qn / N ** n
                assert abs(q.y - y) <= max(1e-10, stretch)
                if stretch < 1e-6:
                    assert q.x == pytest.approx(x, abs=1e-10)


def test_iterate_round_trip_exact():
    rng = np.random.default_rng(4)
    for N in (1, 2):
        p = Params(N)
        for _ in range(10):
            x, y = (Fraction(int(v) * 10 ** 21 + 7, 10 ** 40) for v in rng.integers(1, 10 ** 18, 2))
            for n in (1, 7, 20):
                assert iterate(p, iterate(p, (x, y), n), -n) == (x, y)


def test_extended_digit_examples():
    p = Params(2)
    pt = (0.37, SQRT3_M1)
    assert extended_digit(p, pt, 1) == expand(p, 0.37, 1).digits[0]
    assert extended_digit(p, pt, 0) == 2
    assert extended_digit(p, pt, -2) == 2
    y = 0.123
    for l in range(0, -4, -1):
        assert extended_digit(p, (0.5, y), l) == expand(p, y, 1 - l).digits[-1]
    for n in range(1, 5):
        assert extended_digit(p, (0.37, y), n) == expand(p, 0.37, n).digits[-1]


def test_invariance_examples():
    p = Params(1)
    r = invariance_mc(p, (0, 1, 0, 1), 10_000, seed=1)
    assert r.mass_fwd == 1 and r.mass_direct == pytest.approx(1)
    r = invariance_mc(p, (0, 1, 0, 0.4), 200_000, seed=2)
    assert r.mass_direct == pytest.approx(gauss_measure(p, 0.4))
    assert abs(r.z) < 4
    r = invariance_mc(p, (0, 0.5, 0, 0.5), 10 ** 6, seed=3)
    assert abs(r.z) < 4


def test_invariance_independent_of_workers():
    p = Params(2)
    a = invariance_mc(p, (0.1, 0.6, 0.2, 0.7), 150_000, seed=5, workers=1)
    b = invariance_mc(p, (0.1, 0.6, 0.2, 0.7), 150_000, seed=5, workers=3)
    assert a == b


def test_invariance_errors():
    with pytest.raises(DomainError):
        invariance_mc(Params(1), (0, 1, 0, 1), 0)
    with pytest.raises(DomainError):
        invariance_mc(Params(1), (0.6, 0.2, 0, 1), 10)


def test_sampler_marginals_match_closed_forms():
    from scipy import stats

    from nkuzmin.measures import extended_measure

    p = Params(3)
    x, y = sample_extended(p, 200_000, np.random.default_rng(7))
    assert stats.kstest(y, lambda t: gauss_measure(p, np.clip(t, 0, 1))).pvalue > 1e-3
    assert stats.kstest(x, lambda t: gauss_measure(p, np.clip(t, 0, 1))).pvalue > 1e-3
    frac = np.mean((x <= 0.4) & (y <= 0.7))
    assert abs(frac - extended_measure(p, 0.4, 0.7)) < 4 * math.sqrt(0.25 / x.size)


def test_marginal_ks_small():
    assert marginal_ks(Params(1), 200_000, seed=0) * math.sqrt(200_000) < 1.95
