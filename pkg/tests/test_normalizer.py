import math

import numpy as np
import pytest

from lilnorm.distmodel import feller_pruitt
from lilnorm.logscale import L, LL, LLL
from lilnorm.normalizer import (Normalizer, SlowFunction, construct_psi_from_phi,
                                fixed_point_log_psi, hq_membership)

BUILTINS = [SlowFunction.loglog_power(1.0), SlowFunction.loglog_power(2.5),
            SlowFunction.log_power(1.0), SlowFunction.log_power(0.5),
            SlowFunction.stretched(0.3), SlowFunction.phi2(), SlowFunction.constant(3.0)]


def test_psi_examples():
    nm = Normalizer(SlowFunction.loglog_power(1.0))
    assert nm.psi(math.e) == pytest.approx(math.sqrt(2 * math.e))
    nm = Normalizer(SlowFunction.constant(2 * 1.5**2))
    assert nm.psi(7.0) == pytest.approx(1.5 * math.sqrt(14.0))
    nm = Normalizer(SlowFunction.log_power(1.0))
    assert nm.psi(math.e**3) == pytest.approx(math.sqrt(6 * math.e**3))


@pytest.mark.parametrize("h", BUILTINS, ids=lambda h: h.family)
def test_builtin_slow_functions(h):
    u = np.linspace(0.0, 300 * math.log(10.0), 4000)
    lv = h.log_value_array(u)
    assert np.all(np.isfinite(lv))
    if h.family != "feller-pruitt-phi2":
        assert np.all(np.diff(lv) >= -1e-12)
    # slow variation: log h(e t) - log h(t) shrinks
    step = h.log_value_array(u + 1.0) - lv
    assert abs(step[-1]) < 0.05
    assert abs(step[-1]) <= abs(step[len(step) // 10]) + 1e-12


def test_psi_monotone_and_inverse():
    nm = Normalizer(SlowFunction.loglog_power(1.0))
    xs = np.geomspace(1.0, 1e200, 300)
    ps = nm.psi_array(xs)
    assert np.all(np.diff(ps) > 0)
    assert np.all(np.diff(ps / np.sqrt(xs)) >= 0)
    assert abs(nm.psi_inverse(nm.psi(1e6)) - 1e6) <= 1e-2


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_inverse_case_loglog(p):
    nm = Normalizer(SlowFunction.loglog_power(p))
    w = 300 * math.log(10.0)
    lv = nm.log_psi_inverse_from_log(w)
    expected = 2 * w - math.log(2.0) - p * math.log(LL(1e300))
    # the asymptotic equivalence converges in LLy only; keep the honest trend
    err_hi = abs(lv - expected)
    err_lo = abs(nm.log_psi_inverse_from_log(6 * math.log(10.0)) - (
        12 * math.log(10.0) - math.log(2.0) - p * math.log(LL(1e6))))
    assert err_hi < err_lo


def test_inverse_case_logpower():
    r = 1.0
    nm = Normalizer(SlowFunction.log_power(r))
    w = 300 * math.log(10.0)
    ratio = math.exp(nm.log_psi_inverse_from_log(w) - 2 * w + r * math.log(L(1e300)))
    assert ratio == pytest.approx(2.0 ** -(r + 1), rel=0.02)


def test_hq_membership():
    for h in (SlowFunction.loglog_power(1.0), SlowFunction.log_power(1.0), SlowFunction.log_power(2.0)):
        assert hq_membership(h, 0.0).consistent
    assert hq_membership(SlowFunction.constant(1.0), 0.0).diagnostics[0].trend == "zero"
    q = 0.3
    h = SlowFunction.stretched(q)
    assert hq_membership(h, q, taus=(0.25, 0.5)).consistent
    with pytest.warns(UserWarning):
        rep = hq_membership(h, q, taus=(0.9,))
    assert rep.diagnostics[0].trend == "increasing"


def test_corollary_q_constants():
    # Psi_q(H_q(x))/x with Psi_q(x)=sqrt(x exp((Lx)^q)), H_q(x)=x^2/exp(2^q (Lx)^q)
    def ratio(q, w):
        lh = 2 * w - 2**q * w**q
        lpsi = 0.5 * (lh + lh**q)
        return math.exp(lpsi - w)

    assert ratio(0.3, 1e8) == pytest.approx(1.0, abs=0.01)
    assert ratio(0.5, 1e12) == pytest.approx(math.exp(-0.25), abs=0.01)


def test_fixed_point_constant_phi():
    phi = SlowFunction.constant(2.0)
    for u in (10.0, 100.0, 600.0):
        lp = fixed_point_log_psi(phi, u)
        x_ll = u + math.log(LL(math.exp(u)))
        assert lp == pytest.approx(0.5 * (x_ll + math.log(2.0)), abs=1e-12)


def test_construct_log_power_envelope():
    nm, rep = construct_psi_from_phi(feller_pruitt(), SlowFunction.log_power(1.0),
                                     log_x_grid=np.arange(1, 61) * math.log(10.0))
    assert rep.envelope_ok
    # Psi_1(x) ~ sqrt(x Lx LLx), slowly
    r = [nm.psi(x) / math.sqrt(x * L(x) * LL(x)) for x in (1e6, 1e30)]
    assert abs(r[1] - 1) < abs(r[0] - 1) + 1e-9
    assert abs(r[1] - 1) < 0.1


def test_phi2_uses_triple_log_inside_sine():
    phi = SlowFunction.phi2()
    for x in (1e10, 1e40, 1e250):
        expected = 2 * L(x) * (1 + LL(x) * math.sin(LLL(x)) ** 2)
        assert math.exp(phi.log_value(math.log(x))) == pytest.approx(expected, rel=1e-12)
    # the split form agrees with the direct one where both apply
    u = np.array([50.0, 500.0])
    slope, rest = phi.loglog_split(np.log(u))
    assert np.allclose(slope * np.log(u) + rest, phi.log_value_array(u), rtol=1e-12)


def test_table_slow_function(tmp_path):
    xs = np.geomspace(1.0, 1e10, 30)
    hs = 2.0 * np.log(np.maximum(np.log(np.maximum(xs, math.e)), math.e))
    h = SlowFunction.table(xs, hs)
    for x in (5.0, 1e3, 1e9):
        assert math.exp(h.log_value(math.log(x))) == pytest.approx(2.0 * LL(x), rel=1e-3)
