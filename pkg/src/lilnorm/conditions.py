"""The LIL condition triple for a law and a normaliser, its corollary forms,
and the moment/series tests behind them.

The limsup functional is

    F(x) = Psi^{-1}(x LLx) H(x) / (x^2 LLx),      limsup F = lambda^2 / 2,

evaluated along a geometric grid and summarised by the sup over the
trailing quarter of decades plus a trend label. The implied bounds on
``limsup |S_n| / a_n`` are ``[(1 - q)^{1/2} lambda, lambda]`` for
``h`` in ``H_q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distmodel import DIVERGENT, DistributionSpec, Flag, InfiniteMeanError
from .logscale import LL_array
from .normalizer import Normalizer, SlowFunction
from .series import (
    INCONCLUSIVE,
    ScaleLadder,
    far_window_sup,
    SeriesVerdict,
    dyadic_series_blocks,
    second_moment_verdict,
    trailing_trend,
)

LN10 = math.log(10.0)


def default_grid() -> np.ndarray:
    """``log x`` for ``x = 10^k``, ``k = 1..300``."""
    return np.arange(1, 301) * LN10


def _check_grid(log_grid) -> np.ndarray:
    u = np.asarray(log_grid, dtype=float)
    if u.ndim != 1 or len(u) < 3 or np.any(np.diff(u) <= 0):
        raise ValueError("grid must be increasing")
    if (u[-1] - u[0]) / LN10 < 20.0 - 1e-9:
        raise ValueError("grid must span at least 20 decades")
    steps = np.diff(u)
    if np.ptp(steps) > 1e-6 * np.max(steps):
        raise ValueError("grid must be geometric")
    return u


def default_q(h: SlowFunction) -> float:
    """The ``H_q`` class a built-in family belongs to (0 unless stretched)."""
    if h.family == "stretched":
        return float(h.params[0])
    return 0.0


@dataclass(frozen=True)
class LimsupEstimate:
    window_sup: float
    trend: str
    kappa: float
    skipped: int
    log_x: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    axis: str = "log10_x"  # or "LLL_x" for the far window

    @property
    def limsup_value(self) -> float | Flag:
        """The sup read through its trend: 0 if vanishing, divergent if diverging."""
        if self.trend == "diverging":
            return DIVERGENT
        if self.trend == "vanishing":
            return 0.0
        return self.window_sup

    def table(self) -> list[tuple[float, float]]:
        scale = LN10 if self.axis == "log10_x" else 1.0
        return [(float(u / scale), float(v)) for u, v in zip(self.log_x, self.values)]


def _lambda_from(limsup: float | Flag, factor: float) -> float:
    """``sqrt(factor * limsup)``, infinite for a divergent limsup."""
    if limsup is DIVERGENT:
        return math.inf
    return math.sqrt(factor * limsup)


def _log_H(dist: DistributionSpec, u: np.ndarray) -> np.ndarray:
    xs = np.exp(np.minimum(u, 709.0))
    with np.errstate(divide="ignore"):
        return np.log(dist.H_array(xs))


def _estimate(u: np.ndarray, log_f: np.ndarray) -> LimsupEstimate:
    ok = np.isfinite(log_f)
    skipped = int(np.sum(~ok))
    if np.sum(ok) < 3:
        raise ValueError("too few finite points on the grid")
    vals = np.exp(np.clip(log_f[ok], -745.0, 709.0))
    sup, trend, kappa = trailing_trend(u[ok], vals, frac=0.25)
    return LimsupEstimate(sup, trend, kappa, skipped, u[ok], vals)


def limsup_H_condition(dist: DistributionSpec, nm: Normalizer, log_grid=None,
                       far: bool | None = None, y_max: float = 60.0) -> LimsupEstimate:
    """``Psi^{-1}(x LLx) H(x) / (x^2 LLx)`` with trailing sup and trend.

    By default (``far=None``) a power-tail law with a normaliser that has a
    log-log form is read over the last ``3 pi`` of ``LLLx`` below ``y_max``,
    which covers three periods of any ``sin^2(LLLx)`` factor. Otherwise, or
    with ``far=False``, the trailing quarter of the decade grid is used.
    """
    if far is None:
        far = log_grid is None and dist.power_tail() is not None and nm.h.far_range
    if far:
        return _far_limsup(dist, nm, y_max)
    u = _check_grid(default_grid() if log_grid is None else log_grid)
    lll = np.log(LL_array(u))
    inv = np.array([nm.log_psi_inverse_from_log(float(a + b)) for a, b in zip(u, lll)])
    return _estimate(u, inv + _log_H(dist, u) - 2.0 * u - lll)


def _far_limsup(dist: DistributionSpec, nm: Normalizer, y_max: float) -> LimsupEstimate:
    a_h = nm.h.loglog_split(0.0)[0]
    c_u, c_v, _ = dist.far_log_H(np.zeros(1))

    def log_f(y):
        y = np.asarray(y, dtype=float)
        v = np.exp(y)
        with np.errstate(over="ignore"):
            u = np.exp(v)
        finite = np.isfinite(u)
        uf = np.where(finite, u, 1.0)
        # log Psi^{-1}(x LLx) = 2u + d with d = 2y - log h(Psi^{-1}); log of it is
        # v + log 2 + eps
        eps = np.zeros_like(v)
        for _ in range(60):
            lw = v + math.log(2.0) + eps
            d = 2.0 * y - (a_h * lw + nm.h.loglog_split(lw)[1])
            new = np.where(finite, np.log1p(np.maximum(d / (2.0 * uf), -0.5)), 0.0)
            done = np.all(np.abs(new - eps) <= 1e-15)
            eps = new
            if done:
                break
        lw = v + math.log(2.0) + eps
        rest_h = nm.h.loglog_split(lw)[1]
        rest_H = dist.far_log_H(v)[2]
        with np.errstate(invalid="ignore"):
            lead = np.zeros_like(u) if c_u == 0.0 else c_u * u
        return lead + (c_v - a_h) * v + y - a_h * (math.log(2.0) + eps) - rest_h + rest_H

    sup, trend, ys, vals = far_window_sup(log_f, y_max)
    kappa = math.nan
    return LimsupEstimate(sup, trend, kappa, 0, ys, vals, axis="LLL_x")


# -- moment / series tests ----------------------------------------------


def moment_condition(dist: DistributionSpec, nm: Normalizer, scale: float = 1.0,
                     u_max: float = 690.0, y_max: float = 60.0) -> SeriesVerdict:
    """Classify ``sum_n P(|X| > C a_n) < inf`` with ``C = scale``.

    The dyadic block table covers ``n <= e^u_max``. For a power-tail law and
    a normaliser whose ``h`` has a log-log form, the verdict is read on the
    ``LLLn`` scale up to ``y_max``; otherwise over ``log n <= u_max``.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    log_c = math.log(scale)

    def log_term(u):
        u = np.asarray(u, dtype=float)
        return dist.log_tail_u(nm.log_psi_array(u) + log_c)

    j_max = int(u_max / math.log(2.0)) - 1
    blocks = dyadic_series_blocks(log_term, j_max)

    pt = dist.power_tail()
    if pt is not None and nm.h.far_range:
        log_cst, beta, lt0 = pt
        a_h = nm.h.loglog_split(0.0)[0]

        def log_density_y(y):
            y = np.asarray(y, dtype=float)
            with np.errstate(over="ignore"):
                v = np.exp(y)
                u = np.exp(v)
            rest = nm.h.loglog_split(v)[1]
            # log a_n = u/2 + (a v + rest)/2 + log C; the Jacobian adds u + v + y
            cu, cv = 1.0 - 0.5 * beta, 1.0 - 0.5 * beta * a_h
            with np.errstate(invalid="ignore"):
                lead = (np.zeros_like(u) if cu == 0.0 else cu * u) + (
                    np.zeros_like(v) if cv == 0.0 else cv * v)
            far = log_cst - beta * log_c - 0.5 * beta * rest + lead + y
            finite = np.isfinite(u)
            if np.any(finite):
                uf = u[finite]
                log_a = 0.5 * (uf + a_h * v[finite] + rest[finite]) + log_c
                near = dist.log_tail_u(log_a) + uf + v[finite] + y[finite]
                far[finite] = np.where(log_a >= lt0, far[finite], near)
            return far

        ladder = ScaleLadder(1.0, y_max, base_level=3, max_level=3)
        return ladder.classify_fn(log_density_y, blocks)

    def log_density_u(u):
        return log_term(u) + np.asarray(u, dtype=float)

    ladder = ScaleLadder(0.0, u_max, base_level=1, max_level=3)
    return ladder.classify_fn(log_density_u, blocks)


def mean_zero(dist: DistributionSpec) -> str:
    """Built-in laws are symmetric, so EX = 0 exactly when E|X| < inf."""
    try:
        dist.mean_abs()
    except InfiniteMeanError:
        return "fails (infinite mean)"
    return "holds"


# -- corollary forms ------------------------------------------------------


@dataclass(frozen=True)
class CorollaryResult:
    family: str
    param: float
    estimate: LimsupEstimate
    lambda_hat: float
    moment: SeriesVerdict
    mean_zero: str

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "param": self.param,
            "lambda_hat": _num(self.lambda_hat),
            "window_sup": _num(self.estimate.window_sup),
            "trend": self.estimate.trend,
            "moment_condition": self.moment.as_moment(),
            "mean_zero": self.mean_zero,
            "evidence_table": self.estimate.table(),
            "moment_evidence": self.moment.to_json(),
        }


def _num(x):
    if isinstance(x, Flag):
        return str(x)
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else "nan"
    return x


def corollary_check(dist: DistributionSpec, family: str, param: float,
                    log_grid=None) -> CorollaryResult:
    """Closed-form limsup functional and matching moment test.

    ``family`` is ``"p"`` (``h = 2(LLx)^p``, ``p >= 1``), ``"r"``
    (``h = 2(Lx)^r``, ``r > 0``) or ``"q"`` (``h = exp((Lx)^q)``,
    ``0 < q <= 1/2``):

    * p: ``limsup (LLx)^(1-p) H(x) = lambda^2``, moment ``E X^2 / (LL|X|)^p``
    * r: ``limsup LLx / (Lx)^r H(x) = 2^r lambda^2``, moment ``E X^2 / (L|X|)^r``
    * q < 1/2: ``limsup LLx / exp(2^q (Lx)^q) H(x) = lambda^2 / 2``
    * q = 1/2: ``limsup e^(1/2) LLx / exp(sqrt2 (Lx)^(1/2)) H(x) = lambda^2 / 2``

    with moment ``E X^2 / exp(2^q (L|X|)^q)`` for both q cases.
    """
    u = _check_grid(default_grid() if log_grid is None else log_grid)
    lH = _log_H(dist, u)
    lu = np.log(np.maximum(u, 1.0))  # log Lx
    llu = np.log(LL_array(u))  # log LLx
    param = float(param)
    if family == "p":
        if not param >= 1.0:
            raise ValueError("p must be >= 1")
        log_f = (1.0 - param) * llu + lH
        factor = 1.0
        p = param

        def log_g(v):
            return -p * np.log(LL_array(v))

        def far_g(v, y, uu):
            return 0.0, -p * np.log(np.maximum(v, 1.0))
    elif family == "r":
        if not param > 0.0:
            raise ValueError("r must be > 0")
        log_f = llu - param * lu + lH
        factor = 2.0 ** (-param)
        r = param

        def log_g(v):
            return -r * np.log(np.maximum(np.asarray(v, dtype=float), 1.0))

        def far_g(v, y, uu):
            return -r, np.zeros_like(v)
    elif family == "q":
        if not 0.0 < param <= 0.5:
            raise ValueError("q must lie in (0, 1/2]")
        q = param
        lx = np.maximum(u, 1.0)
        if q < 0.5:
            log_f = llu - 2.0**q * lx**q + lH
        else:
            log_f = 0.5 + llu - math.sqrt(2.0) * lx**0.5 + lH
        factor = 2.0

        def log_g(v):
            return -(2.0**q) * np.maximum(np.asarray(v, dtype=float), 1.0) ** q

        def far_g(v, y, uu):
            with np.errstate(over="ignore"):
                return 0.0, -(2.0**q) * np.exp(q * np.maximum(v, 0.0))
    else:
        raise ValueError(f"unknown corollary family {family!r}")
    est = _estimate(u, log_f)
    lam = _lambda_from(est.limsup_value, factor)
    far = far_g if dist.power_tail() is not None else None
    moment = second_moment_verdict(dist, log_g, far)
    return CorollaryResult(family, param, est, lam, moment, mean_zero(dist))


def normalizer_for(family: str, param: float) -> Normalizer:
    """The normaliser a corollary family refers to."""
    if family == "p":
        return Normalizer(SlowFunction.loglog_power(param))
    if family == "r":
        return Normalizer(SlowFunction.log_power(param))
    if family == "q":
        return Normalizer(SlowFunction.stretched(param))
    raise ValueError(f"unknown corollary family {family!r}")


# -- full report ------------------------------------------------------------


@dataclass(frozen=True)
class ConditionReport:
    mean_zero: str
    moment_condition: str
    moment_evidence: SeriesVerdict
    estimate: LimsupEstimate
    q: float

    @property
    def limsup_value(self) -> float | Flag:
        return self.estimate.limsup_value

    @property
    def lambda_hat(self) -> float:
        return _lambda_from(self.limsup_value, 2.0)

    @property
    def bounds(self) -> tuple[float, float]:
        lam = self.lambda_hat
        return math.sqrt(1.0 - self.q) * lam, lam

    @property
    def verdict(self) -> str:
        """Overall reading: ``two-sided LIL``, ``stability``, ``fails`` or ``inconclusive``."""
        if self.mean_zero != "holds" or self.moment_condition == "infinite":
            return "fails"
        if self.moment_condition == INCONCLUSIVE:
            return INCONCLUSIVE
        lam = self.lambda_hat
        if lam == 0.0:
            return "stability"
        if math.isinf(lam):
            return "fails"
        return "two-sided LIL"

    @property
    def inconclusive(self) -> bool:
        return self.moment_condition == INCONCLUSIVE

    def to_json(self) -> dict:
        lo, hi = self.bounds
        return {
            "verdict": self.verdict,
            "lambda_hat": _num(self.lambda_hat),
            "window_sup": _num(self.estimate.window_sup),
            "trend": self.estimate.trend,
            "limsup_value": _num(self.limsup_value),
            "q": self.q,
            "bounds": [_num(lo), _num(hi)],
            "mean_zero": self.mean_zero,
            "moment_condition": self.moment_condition,
            "skipped_points": self.estimate.skipped,
            "evidence_table": self.estimate.table(),
            "moment_evidence": self.moment_evidence.to_json(),
        }


def analyze(dist: DistributionSpec, nm: Normalizer, q: float | None = None,
            log_grid=None) -> ConditionReport:
    """Evaluate mean zero, the moment condition and the limsup functional."""
    if q is None:
        q = default_q(nm.h)
    if not 0.0 <= q < 1.0:
        raise ValueError("q must lie in [0, 1)")
    est = limsup_H_condition(dist, nm, log_grid)
    mom = moment_condition(dist, nm)
    return ConditionReport(mean_zero(dist), mom.as_moment(), mom, est, float(q))


def stability_check(dist: DistributionSpec, nm: Normalizer, log_grid=None) -> str:
    """``stability`` iff the functional vanishes, the moment series converges
    and the mean is zero; otherwise ``no stability``."""
    rep = analyze(dist, nm, log_grid=log_grid)
    if rep.limsup_value == 0.0 and rep.moment_condition == "finite" and rep.mean_zero == "holds":
        return "stability"
    return "no stability"


def implied_lambda_agreement(dist: DistributionSpec, p: float, log_grid=None) -> tuple[float, float]:
    """``(corollary lambda, functional lambda)`` for ``h = 2(LLx)^p``."""
    cor = corollary_check(dist, "p", p, log_grid)
    est = limsup_H_condition(dist, normalizer_for("p", p), log_grid)
    return cor.lambda_hat, _lambda_from(est.limsup_value, 2.0)


__all__ = [
    "LimsupEstimate", "limsup_H_condition", "moment_condition", "mean_zero",
    "CorollaryResult", "corollary_check", "normalizer_for", "ConditionReport", "analyze",
    "stability_check", "implied_lambda_agreement", "default_grid", "default_q",
]
