import math

import numpy as np
import pytest

from lilnorm.series import (ScaleLadder, dyadic_series_blocks, log_integral, trailing_trend)


def test_log_integral_exact_for_exponentials():
    # int_0^3 e^{-2u} du
    val = log_integral(lambda u: -2.0 * u, 0.0, 3.0)
    assert math.exp(val) == pytest.approx((1 - math.exp(-6.0)) / 2.0, rel=1e-12)


def test_dyadic_blocks_of_harmonic_series():
    blocks = dyadic_series_blocks(lambda u: -u, 40)
    sums = np.exp(blocks.log_sum)
    assert sums[0] == pytest.approx(1.0)
    assert sums[1] == pytest.approx(0.5 + 1 / 3)
    # each block of 1/n tends to log 2
    assert sums[-1] == pytest.approx(math.log(2.0), rel=1e-6)
    assert blocks.table()[3][0] == 3


def test_dyadic_blocks_switch_to_quadrature_smoothly():
    exact = dyadic_series_blocks(lambda u: -1.5 * u, 16, exact_below=17)
    approx = dyadic_series_blocks(lambda u: -1.5 * u, 16, exact_below=12)
    assert np.allclose(exact.log_sum[12:], approx.log_sum[12:], atol=1e-7)


def _verdict(log_term, u_max=690.0):
    ladder = ScaleLadder(0.0, u_max)
    return ladder.classify_fn(lambda u: log_term(u) + u)


def _loglog(u):
    return np.log(np.maximum(np.log(np.maximum(u, math.e)), 1.0))


@pytest.mark.parametrize("log_term,expected", [
    (lambda u: -u, "divergent"),                                 # 1/n
    (lambda u: -1.1 * u, "convergent"),                          # n^-1.1
    (lambda u: -u - 2 * np.log(np.maximum(u, 1.0)), "convergent"),  # 1/(n L^2 n)
    (lambda u: -u - np.log(np.maximum(u, 1.0)), "divergent"),     # 1/(n Ln)
    (lambda u: -u - np.log(np.maximum(u, 1.0)) - 2 * _loglog(u), "convergent"),
    (lambda u: -u - 0.5 * u**0.5, "convergent"),
    (lambda u: np.zeros_like(u), "divergent"),
])
def test_ladder_on_textbook_series(log_term, expected):
    assert _verdict(log_term).verdict == expected


def test_vanishing_blocks_are_convergent():
    v = _verdict(lambda u: np.where(u > 5.0, -np.inf, -u))
    assert v.verdict == "convergent"
    assert v.as_moment() == "finite"


def test_levels_reported():
    ladder = ScaleLadder(0.0, 690.0)
    assert ladder.levels == [1, 2, 3]
    v = ladder.classify_fn(lambda u: -np.log(np.maximum(u, 1.0)))
    assert v.verdict == "divergent"
    assert v.to_json()["verdict"] == "divergent"


def test_trailing_trend_labels():
    u = np.arange(1, 301) * math.log(10.0)
    sup, trend, _ = trailing_trend(u, np.full(u.shape, 0.5))
    assert trend == "converging" and sup == pytest.approx(0.5)
    _, trend, _ = trailing_trend(u, u)
    assert trend == "diverging"
    _, trend, _ = trailing_trend(u, 1.0 / u)
    assert trend == "vanishing"
