import math
import warnings

import mpmath as mp
import numpy as np
import pytest

from lilnorm.distmodel import (DIVERGENT, ExtrapolationWarning, Gaussian, InfiniteMeanError,
                               MomentCache, Rademacher, SymPareto, TailTable, feller_pruitt)
from lilnorm.logscale import L


def _gauss_H(t):
    # E X^2 1{|X| <= t} for N(0, 1), to 30 digits
    mp.mp.dps = 30
    t = mp.mpf(t)
    return float(mp.erf(t / mp.sqrt(2)) - 2 * t * mp.npdf(t))


def test_tail_examples():
    assert feller_pruitt().tail(2.0) == pytest.approx(0.25)
    assert Rademacher().tail(0.5) == 1.0
    assert Rademacher().tail(1.0) == 0.0
    assert Gaussian(1.0).tail(0.0) == 1.0


def test_H_examples():
    assert feller_pruitt().H(math.e**2) == pytest.approx(4.0)
    for d in (Rademacher(), Gaussian(2.0), feller_pruitt()):
        assert d.H(0.0) == 0.0
    assert Rademacher().H(1.0) == 1.0


def test_M_examples():
    fp = feller_pruitt()
    assert fp.M(2.0) == pytest.approx(1.0)
    assert fp.M(0.0) == pytest.approx(2.0)
    assert Rademacher().M(1.0) == 0.0


def test_feller_pruitt_quadrature_matches_2L():
    fp = feller_pruitt()
    for t in np.geomspace(math.e, 1e12, 25):
        h = fp.H_quadrature(t)
        assert abs(h - 2 * L(t)) <= 1e-8 * max(1.0, h)
    # below e the clamp in L no longer applies: H(t) = 2 log t exactly
    for t in np.linspace(1.0, math.e, 7):
        assert abs(fp.H_quadrature(t) - 2 * math.log(t)) <= 1e-8
        assert fp.H(t) == pytest.approx(2 * math.log(t), abs=1e-14)


def test_gaussian_H_and_M_against_mpmath():
    g = Gaussian(1.0)
    for t in (0.1, 0.5, 1.0, 2.0, 4.0, 8.0):
        assert g.H(t) == pytest.approx(_gauss_H(t), rel=1e-9, abs=1e-14)
        assert g.M(t) == pytest.approx(2 * float(mp.npdf(t)), rel=1e-9, abs=1e-300)
        assert g.H_quadrature(t) == pytest.approx(_gauss_H(t), rel=1e-8, abs=1e-14)


def test_moments_monotone_and_limits():
    for d in (Rademacher(), Gaussian(1.0), feller_pruitt(), SymPareto(3.0)):
        cache = MomentCache.build(d, 1e-3, 1.3, 120)
        assert cache.check()
        assert np.all(cache.H >= 0) and np.all(cache.M >= 0)
        assert cache.M[-1] < 1e-3 * cache.M[0]
    g = Gaussian(1.0)
    assert g.H(50.0) == pytest.approx(1.0, rel=1e-12)
    assert g.second_moment() == pytest.approx(1.0)
    assert SymPareto(3.0).second_moment() == pytest.approx(3.0)


def test_infinite_second_moment_is_flagged():
    assert feller_pruitt().second_moment() is DIVERGENT


def test_infinite_mean_rejected():
    d = SymPareto(0.8)
    assert not d.has_finite_mean()
    with pytest.raises(InfiniteMeanError):
        d.M(1.0)


def test_H_plus_tM_positive():
    for d in (Rademacher(), Gaussian(1.0), feller_pruitt()):
        for t in np.geomspace(1e-3, 1e6, 30):
            assert d.H(t) + t * d.M(t) > 0


def test_samples():
    rng = np.random.default_rng(1)
    x = Rademacher().sample(rng, 10_000)
    assert set(np.unique(x)) == {-1.0, 1.0}
    g = Gaussian(1.0).sample(np.random.default_rng(2), 10**6)
    assert abs(g.mean()) < 4e-3
    a = np.sort(np.abs(feller_pruitt().sample(np.random.default_rng(3), 10**6)))
    emp = 1.0 - np.arange(1, a.size + 1) / a.size
    ks = np.max(np.abs(emp - a**-2.0))
    assert ks < 0.01


def test_tail_table_interpolation_and_extrapolation():
    tt = TailTable(((1.0, 0.5), (10.0, 0.05), (100.0, 0.005)))
    assert tt.tail(0.5) == 0.5
    # log-log linear between points
    assert tt.tail(math.sqrt(10.0)) == pytest.approx(math.sqrt(0.5 * 0.05))
    with pytest.warns(ExtrapolationWarning):
        val = tt.tail(1000.0)
    assert val == pytest.approx(5e-4)
    p, flagged = tt.tail_with_flag(1000.0)
    assert flagged and p == pytest.approx(5e-4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        tt.tail(50.0)


def test_tail_table_validation(tmp_path):
    with pytest.raises(ValueError):
        TailTable(((1.0, 0.5), (1.0, 0.4)))
    with pytest.raises(ValueError):
        TailTable(((1.0, 0.5), (2.0, 0.6)))
    tt = TailTable(((1.0, 1.0), (2.0, 0.0)))
    assert tt.tail(3.0) == 0.0
    path = tmp_path / "tail.txt"
    tt.to_file(path)
    assert TailTable.from_file(path) == tt


def test_tail_table_power_law_matches_builtin():
    # a Pareto(2) tail given as a table reproduces the built-in moments
    tt = TailTable(((1.0, 1.0), (10.0, 0.01)))
    fp = feller_pruitt()
    for t in (2.0, 5.0, 9.0):
        assert tt.H(t) == pytest.approx(fp.H(t), rel=1e-8)
        assert tt.M(t) == pytest.approx(fp.M(t), rel=1e-8)
    assert tt.second_moment() is DIVERGENT
