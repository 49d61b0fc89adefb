import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from lilnorm.alpha0 import NormSeqSpec
from lilnorm.cli import Config, apply_overrides
from lilnorm.distmodel import Gaussian, SymPareto, TailTable
from lilnorm.klass import KlassEval
from lilnorm.logscale import L, LL, LLL, f_tau
from lilnorm.mcsim import _neumaier, checkpoints
from lilnorm.normalizer import Normalizer, SlowFunction

xs = st.floats(min_value=0.0, max_value=1e300, allow_nan=False)
taus = st.floats(min_value=0.0, max_value=1.0)


@given(xs)
def test_iterated_logs_compose(x):
    assert math.isclose(L(L(x)), LL(x), rel_tol=1e-14)
    assert math.isclose(L(LL(x)), LLL(x), rel_tol=1e-14)
    assert LLL(x) <= LL(x) <= L(x)


@given(xs, xs)
def test_logs_monotone(x, y):
    lo, hi = min(x, y), max(x, y)
    assert L(lo) <= L(hi) and LL(lo) <= LL(hi) and LLL(lo) <= LLL(hi)


@given(st.floats(min_value=math.e, max_value=1e300), taus, taus)
def test_f_tau_monotone_in_tau(t, a, b):
    lo, hi = min(a, b), max(a, b)
    assert f_tau(t, lo) <= f_tau(t, hi)


@given(st.lists(st.floats(min_value=1e-3, max_value=0.999), min_size=2, max_size=6, unique=True),
       st.floats(min_value=0.01, max_value=100.0))
def test_tail_table_nonincreasing(ps, t):
    ps = sorted(ps, reverse=True)
    ts = [2.0**k for k in range(len(ps))]
    tt = TailTable(tuple(zip(ts, ps)))
    p, _ = tt.tail_with_flag(t)
    q, _ = tt.tail_with_flag(t * 1.5)
    assert 0.0 <= q <= p <= 1.0


_KLASS = {b: KlassEval(SymPareto(b)) for b in (1.5, 2.0, 3.0)}
_KLASS["g"] = KlassEval(Gaussian(1.0))


@settings(max_examples=60, suppress_health_check=[HealthCheck.too_slow])
@given(st.sampled_from(sorted(_KLASS, key=str)), st.floats(min_value=-3.0, max_value=9.0))
def test_klass_round_trip(key, log10_t):
    kl = _KLASS[key]
    t = 10.0**log10_t
    assert math.isclose(kl.K(kl.G(t)), t, rel_tol=1e-8)


@given(st.floats(min_value=0.0, max_value=3.0), st.floats(min_value=10.0, max_value=600.0),
       st.floats(min_value=0.1, max_value=50.0))
def test_psi_increasing_and_invertible(p, u, du):
    nm = Normalizer(SlowFunction.loglog_power(p))
    assert nm.log_psi_from_log(u + du) > nm.log_psi_from_log(u)
    w = nm.log_psi_from_log(u)
    assert math.isclose(nm.log_psi_inverse_from_log(w), u, rel_tol=1e-12)


@given(st.floats(min_value=1e-3, max_value=1e3), st.floats(min_value=1.0, max_value=30.0))
def test_scaled_sequence_multiplies(factor, u):
    base = NormSeqSpec.formula("lil")
    sc = NormSeqSpec.scaled(base, factor)
    assert sc.values(np.array([u]))[0] == base.values(np.array([u]))[0] * factor


@given(st.integers(min_value=1000, max_value=10**9), st.floats(min_value=1.01, max_value=3.0))
def test_checkpoints_end_at_n_max(n_max, ratio):
    cps = checkpoints(n_max, 1000, ratio)
    assert cps[0] == 1000 and cps[-1] == n_max
    assert np.all(np.diff(cps) > 0)


@given(st.lists(st.floats(min_value=-1e12, max_value=1e12), max_size=200))
def test_neumaier_matches_fsum(vals):
    total, comp = 0.0, 0.0
    for v in vals:
        total, comp = _neumaier(total, comp, v)
    exact = math.fsum(vals)
    assert abs((total + comp) - exact) <= 1e-15 * max(1.0, sum(abs(v) for v in vals))


@given(st.dictionaries(st.sampled_from(["a", "b", "c"]), st.integers(), min_size=1),
       st.integers())
def test_overrides_win(block, value):
    cfg = Config({"analysis": dict(block)})
    apply_overrides(cfg, ["--analysis.a", str(value)])
    assert cfg.data["analysis"]["a"] == value
    for k, v in block.items():
        if k != "a":
            assert cfg.data["analysis"][k] == v
