import math

import numpy as np
import pytest

from lilnorm.alpha0 import (NormSeqSpec, SigmaPolicy, TruncationError, alpha0_estimate,
                            check_c_regularity, check_truncation, ratio_bounds, sigma_sq)
from lilnorm.distmodel import Gaussian, Rademacher, feller_pruitt
from lilnorm.klass import KlassEval
from lilnorm.logscale import LL
from lilnorm.normalizer import Normalizer, SlowFunction


def test_regularity_examples():
    assert check_c_regularity(NormSeqSpec.formula("lil")).passed
    lin = check_c_regularity(NormSeqSpec.function(lambda n: n, "n"))
    assert lin.passed
    root = check_c_regularity(NormSeqSpec.formula("sqrt-n"))
    assert root.monotone_ok and not root.unbounded_ok and not root.passed


def test_regularity_witness_for_fast_growth():
    rep = check_c_regularity(NormSeqSpec.function(lambda n: n**1.5, "n^1.5"))
    assert not all(rep.growth_ok.values())
    assert rep.witnesses[0.1]
    assert "growth" in rep.to_json()


def test_sigma_sq_examples():
    c = NormSeqSpec.formula("lil")
    assert sigma_sq(Gaussian(1.0), c, SigmaPolicy.of_delta(1.0), 1e12) == pytest.approx(1.0, rel=1e-9)
    c = NormSeqSpec.formula("sqrt-n-Ln-LLn")
    s = sigma_sq(feller_pruitt(), c, SigmaPolicy.of_delta(1.0), 1e12)
    assert s == pytest.approx(2 * math.log(c.c(1e12)), rel=1e-9)
    assert sigma_sq(Gaussian(1.0), c, SigmaPolicy.of_constant(3.0), 1e5) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        SigmaPolicy.of_delta(0.0)


def test_truncation_check():
    c = NormSeqSpec.formula("sqrt-n-Ln-LLn")
    d = NormSeqSpec("callable", lambda u: c.log_c(u) - np.log(np.maximum(u, 1.0)) / LL_u(u), "d")
    r = check_truncation(c, d)
    assert np.all(r >= 0)
    with pytest.raises(TruncationError):
        check_truncation(c, NormSeqSpec.scaled(c, 2.0))
    # a fixed factor is allowed: log 2 / LLn -> 0
    check_truncation(c, NormSeqSpec.scaled(c, 0.5))
    # d = c / (Ln)^(1/2) keeps log(c/d)/LLn at 1/2
    half = NormSeqSpec("callable", lambda u: c.log_c(u) - 0.5 * np.log(np.maximum(u, 1.0)), "d")
    with pytest.raises(TruncationError):
        check_truncation(c, half)


def LL_u(u):
    return np.array([LL(math.exp(min(v, 700.0))) for v in np.ravel(u)]).reshape(np.shape(u))


def test_ratio_bounds_examples():
    rad = Rademacher()
    kl = KlassEval(rad)
    g = NormSeqSpec.gamma(rad, kl)
    rb = ratio_bounds(rad, g, klass=kl)
    assert rb.lower == pytest.approx(1.0, abs=1e-9) and rb.upper == pytest.approx(1.0, abs=1e-9)
    rb = ratio_bounds(rad, NormSeqSpec.scaled(g, 2.0), klass=kl)
    assert rb.lower == pytest.approx(0.5, abs=1e-9) and rb.upper == pytest.approx(0.5, abs=1e-9)
    rb = ratio_bounds(Gaussian(1.0), NormSeqSpec.formula("sqrt-n-Ln"))
    assert rb.trend == "to-infinity" and rb.upper == 0.0 and rb.lower <= rb.upper


def test_alpha0_zero_and_infinite():
    g = Gaussian(1.0)
    rep = alpha0_estimate(g, NormSeqSpec.formula("sqrt-n-Ln"), SigmaPolicy.of_delta(1.0))
    assert rep.flag == "zero"
    assert rep.bisection_bracket[0] == 0.0
    rep = alpha0_estimate(g, NormSeqSpec.formula("sqrt-n-LLn-quarter"), SigmaPolicy.of_delta(1.0))
    assert rep.flag == "infinite"
    assert rep.to_json()["alpha0_bracket"] == ["inf", "inf"]


def test_alpha0_lil_oracle_and_ratio_consistency():
    rep = alpha0_estimate(Gaussian(1.0), NormSeqSpec.formula("lil"), SigmaPolicy.of_delta(1.0))
    lo, hi = rep.bracket
    assert lo <= 1.0 <= hi
    rb = rep.ratio_bounds
    assert lo <= rb.upper + 0.05 and hi >= rb.lower - 0.05


def test_alpha0_monotone_in_c():
    g = Gaussian(1.0)
    c = NormSeqSpec.formula("lil")
    small = alpha0_estimate(g, c, SigmaPolicy.of_delta(1.0)).bracket
    big = alpha0_estimate(g, NormSeqSpec.scaled(c, 1.5), SigmaPolicy.of_delta(1.0)).bracket
    assert big[0] <= small[0] and big[1] <= small[1]
    assert big[0] <= 1 / 1.5 <= big[1] + 0.01


def test_alpha0_feller_pruitt_loglog_far_path():
    # c = Psi with h = 2LLn on the Feller-Pruitt law: c/gamma -> 0, alpha0 infinite
    fp = feller_pruitt()
    c = NormSeqSpec.psi(Normalizer(SlowFunction.loglog_power(1.0)))
    rep = alpha0_estimate(fp, c, SigmaPolicy.of_delta(1.0))
    assert rep.flag == "infinite"


def test_report_evidence_rows():
    rep = alpha0_estimate(Gaussian(1.0), NormSeqSpec.formula("lil"), SigmaPolicy.of_constant(1.0))
    rows = rep.evidence_rows()
    assert rows and all(len(r) == 3 for r in rows)
    js = rep.to_json()
    assert js["alpha0_flag"] == "finite"
    assert js["sigma_policy"] == {"kind": "constant", "value": 1.0}


def test_norm_seq_constructors():
    ns = np.geomspace(1.0, 1e16, 40)
    cs = np.sqrt(2 * ns * np.array([LL(n) for n in ns]))
    tab = NormSeqSpec.explicit(ns, cs)
    lil = NormSeqSpec.formula("lil")
    for n in (1e3, 1e8, 1e15):
        assert tab.c(n) == pytest.approx(lil.c(n), rel=1e-3)
    with pytest.raises(ValueError):
        NormSeqSpec.explicit([1.0, 1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        NormSeqSpec.formula("nope")
    sc = NormSeqSpec.scaled(lil, 3.0)
    u = np.log(ns)
    assert np.array_equal(sc.values(u), lil.values(u) * 3.0)
    assert sc.describe()["factor"] == 3.0
