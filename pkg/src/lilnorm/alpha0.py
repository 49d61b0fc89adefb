"""Cluster radius ``alpha0 = sup{alpha: sum_n n^-1 exp(-alpha^2 c_n^2 / (2 n sigma_n^2)) = inf}``.

The series is classified for each probed ``alpha`` with the same scale
ladder as the moment tests. Exponents grow with ``alpha``, so the
divergent set is an interval ``[0, alpha0]`` and bisection brackets its
end; inconclusive probes count as divergent.

``c_n / gamma_n`` gives the bounds ``1/b <= alpha0 <= 1/a`` with ``a, b``
the liminf and limsup of the ratio, read off a trailing window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import logsumexp

from .distmodel import DistributionSpec
from .klass import KlassEval
from .logscale import LL_array
from .normalizer import Normalizer
from .series import (CONVERGENT, DIVERGENT, INCONCLUSIVE, LOG2, LevelFit, ScaleLadder,
                     SeriesVerdict, _ternary_max)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


class NormSeqSpec:
    """A normalising sequence ``c(n)``, evaluated as ``log c`` at ``u = log n``."""

    def __init__(self, source: str, log_fn: Callable[[np.ndarray], np.ndarray], label: str,
                 params: dict | None = None):
        self.source = source
        self._log_fn = log_fn
        self.label = label
        self.params = params or {}
        self.h = None  # slow function behind a psi sequence

    @classmethod
    def gamma(cls, dist: DistributionSpec, klass: KlassEval | None = None) -> "NormSeqSpec":
        """Klass' ``gamma_n``."""
        kl = klass or KlassEval(dist)

        def log_fn(u):
            u = np.asarray(u, dtype=float)
            return np.array([kl.log_gamma_from_log(float(v)) for v in u.ravel()]).reshape(u.shape)

        return cls("gamma", log_fn, "gamma", {})

    @classmethod
    def psi(cls, nm: Normalizer, label: str | None = None) -> "NormSeqSpec":
        """``Psi(n) = sqrt(n h(n))``."""
        seq = cls("psi", nm.log_psi_array, label or f"psi[{nm.h.family}]",
                   {"h": nm.h.describe()})
        seq.h = nm.h
        return seq

    @classmethod
    def scaled(cls, base: "NormSeqSpec", factor: float) -> "NormSeqSpec":
        if not factor > 0:
            raise ValueError("factor must be positive")
        lf = math.log(factor)
        seq = cls("scaled", lambda u: base.log_c(u) + lf, f"{factor:g}*{base.label}",
                   {"base": base.describe(), "factor": factor})
        seq.base, seq.factor = base, float(factor)
        return seq

    def values(self, u) -> np.ndarray:
        """``c`` itself; scale factors multiply the base values directly."""
        if self.source == "scaled":
            return self.base.values(u) * self.factor
        return np.exp(self.log_c(u))

    @classmethod
    def explicit(cls, ns, cs) -> "NormSeqSpec":
        """Tabulated ``(n, c_n)``, monotone interpolation in log-log."""
        ns = np.asarray(ns, dtype=float)
        cs = np.asarray(cs, dtype=float)
        if len(ns) < 2 or np.any(np.diff(ns) <= 0) or np.any(ns <= 0) or np.any(cs <= 0):
            raise ValueError("table needs increasing positive n and positive c")
        interp = PchipInterpolator(np.log(ns), np.log(cs), extrapolate=True)
        lo, hi = math.log(ns[0]), math.log(ns[-1])

        def log_fn(u):
            u = np.asarray(u, dtype=float)
            return interp(np.clip(u, lo, hi))

        return cls("explicit", log_fn, "table", {"points": len(ns)})

    @classmethod
    def formula(cls, name: str, sigma: float = 1.0) -> "NormSeqSpec":
        """Named closed forms: ``lil`` = sigma sqrt(2n LLn), ``sqrt-n-LLn-quarter`` =
        n^(1/2) (LLn)^(1/4), ``sqrt-n-Ln`` = n^(1/2) Ln, ``sqrt-n`` = sigma n^(1/2),
        ``sqrt-n-Ln-LLn`` = (n Ln LLn)^(1/2)."""
        ls = math.log(sigma)
        forms = {
            "lil": lambda u: ls + 0.5 * (math.log(2.0) + u + np.log(LL_array(u))),
            "sqrt-n-LLn-quarter": lambda u: 0.5 * u + 0.25 * np.log(LL_array(u)),
            "sqrt-n-Ln": lambda u: 0.5 * u + np.log(np.maximum(u, 1.0)),
            "sqrt-n": lambda u: ls + 0.5 * np.asarray(u, dtype=float),
            "sqrt-n-Ln-LLn": lambda u: 0.5 * (u + np.log(np.maximum(u, 1.0))
                                              + np.log(LL_array(u))),
        }
        if name not in forms:
            raise ValueError(f"unknown formula {name!r}; choose from {sorted(forms)}")
        return cls("formula", forms[name], name, {"name": name, "sigma": sigma})

    @classmethod
    def function(cls, fn: Callable[[float], float], label: str = "callable") -> "NormSeqSpec":
        """Any scalar ``n -> c_n``."""
        def log_fn(u):
            u = np.asarray(u, dtype=float)
            return np.log([fn(math.exp(v)) for v in u.ravel()]).reshape(u.shape)

        return cls("callable", log_fn, label, {})

    def log_c(self, u) -> np.ndarray:
        return np.asarray(self._log_fn(np.asarray(u, dtype=float)), dtype=float)

    def c(self, n: float) -> float:
        return float(np.exp(self.log_c(np.array([math.log(n)]))[0]))

    def describe(self) -> dict:
        return {"source": self.source, "label": self.label, **self.params}


# -- regularity of c ----------------------------------------------------------


@dataclass(frozen=True)
class RegularityReport:
    monotone_ok: bool  # c/sqrt(n) nondecreasing on dyadic n
    unbounded_ok: bool  # and still growing at the end of the range
    growth_ok: dict  # eps -> bool
    m_eps: dict  # eps -> smallest m beyond which all sampled pairs pass
    witnesses: dict  # eps -> list of failing (m, n)
    monotone_witness: tuple | None

    @property
    def passed(self) -> bool:
        return self.monotone_ok and self.unbounded_ok and all(self.growth_ok.values())

    def to_json(self) -> dict:
        return {
            "c_over_sqrt_n_nondecreasing": self.monotone_ok,
            "c_over_sqrt_n_unbounded": self.unbounded_ok,
            "monotone_witness": self.monotone_witness,
            "growth": {str(e): {"ok": self.growth_ok[e], "m_eps": self.m_eps[e],
                                "witnesses": self.witnesses[e]} for e in self.growth_ok},
        }


def check_c_regularity(c: NormSeqSpec, nmax: float = 1e16, eps=(0.1, 0.01),
                       points: int = 64, rtol: float = 1e-12) -> RegularityReport:
    """``c_n/sqrt(n)`` nondecreasing and unbounded on dyadic ``n``; and
    ``c_n/c_m <= (1+eps)(n/m)`` for sampled ``m < n`` beyond some ``m_eps``
    that lies in the lower half of the log range."""
    if nmax < 1e3:
        raise ValueError("nmax must be at least 1e3")
    j = np.arange(1, int(math.floor(math.log2(nmax))) + 1)
    u = j * LOG2
    r = c.log_c(u) - 0.5 * u
    drops = np.nonzero(np.diff(r) < -rtol * np.maximum(1.0, np.abs(r[1:])))[0]
    monotone_ok = len(drops) == 0
    witness = None if monotone_ok else (float(2.0 ** j[drops[0]]), float(2.0 ** j[drops[0] + 1]))
    tail = r[-10:]
    unbounded_ok = bool(np.all(np.diff(tail) > rtol) and tail[-1] - tail[0] > 1e-6)

    us = np.linspace(math.log(1e3), math.log(nmax), points)
    lc = c.log_c(us)
    growth_ok, m_eps, wit = {}, {}, {}
    for e in eps:
        # bad[i, k]: pair (m = us[i], n = us[k]) violates, i < k
        bad = (lc[None, :] - lc[:, None]) > (math.log1p(e) + us[None, :] - us[:, None]) + rtol
        bad = np.triu(bad, 1)
        rows = np.nonzero(bad.any(axis=1))[0]
        i0 = int(rows[-1]) + 1 if len(rows) else 0
        growth_ok[e] = i0 <= points // 2
        m_eps[e] = float(math.exp(us[min(i0, points - 1)]))
        pairs = np.argwhere(bad)
        wit[e] = [(float(math.exp(us[a])), float(math.exp(us[b]))) for a, b in pairs[-5:]]
    return RegularityReport(monotone_ok, unbounded_ok, growth_ok, m_eps, wit, witness)


# -- sigma_n^2 ------------------------------------------------------------------


@dataclass(frozen=True)
class SigmaPolicy:
    """How ``sigma_n^2`` is set: ``H(delta c_n)``, ``H(d_n)`` or a constant."""

    kind: str  # delta | dseq | constant
    delta: float = 1.0
    d: NormSeqSpec | None = field(default=None, compare=False)
    value: float = 1.0

    @classmethod
    def of_delta(cls, delta: float) -> "SigmaPolicy":
        if not delta > 0:
            raise ValueError("delta must be positive")
        return cls("delta", delta=float(delta))

    @classmethod
    def of_dseq(cls, d: NormSeqSpec) -> "SigmaPolicy":
        return cls("dseq", d=d)

    @classmethod
    def of_constant(cls, value: float) -> "SigmaPolicy":
        if not value > 0:
            raise ValueError("sigma^2 must be positive")
        return cls("constant", value=float(value))

    def describe(self) -> dict:
        if self.kind == "delta":
            return {"kind": "delta", "delta": self.delta}
        if self.kind == "dseq":
            return {"kind": "dseq", "d": self.d.describe()}
        return {"kind": "constant", "value": self.value}


class TruncationError(ValueError):
    """``d_n`` violates ``d_n <= c_n`` or ``log(c_n/d_n)/LLn -> 0``."""


def check_truncation(c: NormSeqSpec, d: NormSeqSpec, nmax: float = 1e16,
                     j_min: int = 10) -> np.ndarray:
    """Trend check of ``log(c_n/d_n)/LLn`` on dyadic ``n``: nonnegative,
    nonincreasing, and falling at least like a power of ``1/LLn``.
    Returns the ratios; raises :class:`TruncationError` naming the first bad ``n``."""
    j = np.arange(j_min, int(math.floor(math.log2(nmax))) + 1)
    u = j * LOG2
    ll = LL_array(u)
    r = (c.log_c(u) - d.log_c(u)) / ll
    neg = np.nonzero(r < -1e-12)[0]
    if len(neg):
        raise TruncationError(f"d_n > c_n at n = 2^{j[neg[0]]}")
    up = np.nonzero(np.diff(r) > 1e-12 * np.maximum(1.0, np.abs(r[1:])))[0]
    if len(up):
        raise TruncationError(f"log(c_n/d_n)/LLn increases at n = 2^{j[up[0] + 1]}")
    if np.all(r <= 1e-12):
        return r
    half = len(r) // 2
    theta = np.polyfit(np.log(ll[half:]), np.log(np.maximum(r[half:], 1e-300)), 1)[0]
    if theta > -0.2:
        raise TruncationError(f"log(c_n/d_n)/LLn does not fall toward 0 by n = 2^{j[-1]}")
    return r


def log_sigma_sq(dist: DistributionSpec, c: NormSeqSpec, policy: SigmaPolicy,
                 u: np.ndarray, log_c: np.ndarray | None = None) -> np.ndarray:
    """``log sigma_n^2`` at ``u = log n``."""
    u = np.asarray(u, dtype=float)
    if policy.kind == "constant":
        return np.full(u.shape, math.log(policy.value))
    if policy.kind == "delta":
        lc = c.log_c(u) if log_c is None else log_c
        level = lc + math.log(policy.delta)
    elif policy.kind == "dseq":
        level = policy.d.log_c(u)
    else:
        raise ValueError(f"unknown sigma policy {policy.kind!r}")
    with np.errstate(divide="ignore"):
        return np.log(dist.H_array(np.exp(np.minimum(level, 709.0))))


def sigma_sq(dist: DistributionSpec, c: NormSeqSpec, policy: SigmaPolicy, n: float) -> float:
    return float(np.exp(log_sigma_sq(dist, c, policy, np.array([math.log(n)]))[0]))


# -- ratio bounds -------------------------------------------------------------


@dataclass(frozen=True)
class RatioBounds:
    lower: float  # 1/b
    upper: float  # 1/a
    a: float
    b: float
    trend: str  # bounded | to-zero | to-infinity
    theta: float  # fitted d log(c/gamma) / d log LLn

    def to_json(self) -> dict:
        return {"lower": _num(self.lower), "upper": _num(self.upper), "a": _num(self.a),
                "b": _num(self.b), "trend": self.trend, "theta": self.theta}


def ratio_bounds(dist: DistributionSpec, c: NormSeqSpec, nmax: float = 1e16,
                 klass: KlassEval | None = None, window: float = 0.25,
                 theta_tol: float = 0.1) -> RatioBounds:
    """``[1/b, 1/a]`` from ``c_n / gamma_n`` over the trailing dyadic window.

    A ratio drifting to 0 (``theta < -theta_tol`` against ``log LLn``) has
    ``a = b = 0`` and both bounds infinite; one drifting to infinity has
    ``a = b = inf`` and both bounds 0.
    """
    kl = klass or KlassEval(dist)
    j = np.arange(1, int(math.floor(math.log2(nmax))) + 1)
    k = max(4, int(math.ceil(window * len(j))))
    u = j[-k:] * LOG2
    lg = np.array([kl.log_gamma_from_log(float(v)) for v in u])
    lr = c.log_c(u) - lg
    a, b = float(np.exp(np.min(lr))), float(np.exp(np.max(lr)))
    theta = float(np.polyfit(np.log(LL_array(u)), lr, 1)[0])
    if theta < -theta_tol:
        return RatioBounds(math.inf, math.inf, 0.0, 0.0, "to-zero", theta)
    if theta > theta_tol:
        return RatioBounds(0.0, 0.0, math.inf, math.inf, "to-infinity", theta)
    return RatioBounds(1.0 / b, 1.0 / a, a, b, "bounded", theta)


# -- far range ------------------------------------------------------------------


class _FarExponents:
    """``log q`` on the ``y = LLL n`` scale for power-tail laws and built-in ``h``.

    With ``v = LL n``: ``log h = a_h v + rest_h`` and ``log sigma^2 = a e^(v_x)
    + b v_x + rest_H`` at ``v_x = LL(delta c_n)``. The ``v`` terms, which are
    ``e^y`` large, cancel symbolically.
    """

    def __init__(self, dist, h, policy, y_max: float = 60.0):
        self.dist = dist
        self.h = h
        self.policy = policy
        self.y_max = y_max

    def log_q(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        with np.errstate(over="ignore"):
            v = np.exp(y)
            u = np.exp(v)
        a_h, rest_h = self.h.loglog_split(v)
        finite = np.isfinite(u)
        if self.policy.kind == "constant":
            with np.errstate(invalid="ignore"):
                lead = np.where(a_h == 0.0, 0.0, a_h * v)
            return lead + rest_h - math.log(2.0) - math.log(self.policy.value)
        # log(delta c_n) = u/2 + log h/2 + log delta, so v_x = v - log 2 + shift
        log_h = a_h * v + rest_h
        with np.errstate(invalid="ignore", over="ignore"):
            shift = np.where(finite, np.log1p((log_h + 2.0 * math.log(self.policy.delta))
                                              / np.where(finite, u, 1.0)), 0.0)
        v_x = v - math.log(2.0) + shift
        a, b, rest_H = self.dist.far_log_H(v_x)
        with np.errstate(over="ignore", invalid="ignore"):
            grow = 0.0 if a == 0.0 else a * np.exp(v_x)
            coef = a_h - b
            lead = np.zeros_like(v) if coef == 0.0 else coef * v
        return lead + rest_h - b * (shift - math.log(2.0)) - rest_H - grow - math.log(2.0)

    def log_density(self, alpha: float, y) -> np.ndarray:
        """Level-3 log density ``-alpha^2 q + v + y`` of the series."""
        y = np.asarray(y, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            q = np.exp(self.log_q(y))
            return np.where(q == 0.0, 0.0, -alpha * alpha * q) + np.exp(y) + y

    def period_extremes(self, fn, periods: int = 2, points: int = 3000,
                        candidates: int = 8) -> list[tuple[float, float]]:
        """Refined (min, max) of ``fn`` over each of the last ``periods``
        intervals of length pi ending at ``y_max``."""
        out = []
        for k in range(periods, 0, -1):
            lo = self.y_max - k * math.pi
            hi = lo + math.pi
            ys = np.linspace(lo, hi, points)
            lv = np.asarray(fn(ys), dtype=float)
            step = ys[1] - ys[0]
            ext = []
            for sign in (1.0, -1.0):
                w = sign * lv
                best = float(np.max(w))
                peaks = np.nonzero((w[1:-1] > w[:-2]) & (w[1:-1] >= w[2:]))[0] + 1
                peaks = peaks[np.argsort(w[peaks])[::-1][:candidates]]
                for i in peaks:
                    best = max(best, _ternary_max(
                        lambda t: sign * float(fn(np.array([t]))[0]), ys[i] - step, ys[i] + step))
                ext.append(sign * best)
            out.append((ext[1], ext[0]))
        return out

    def classify(self, alpha: float, flat_tol: float = 0.005) -> SeriesVerdict:
        """Divergent when the peaks of the level-3 density stop falling."""
        (_, m1), (_, m2) = self.period_extremes(lambda y: self.log_density(alpha, y))
        if m2 == math.inf or (m1 == -math.inf and m2 == -math.inf):
            verdict = DIVERGENT if m2 == math.inf else CONVERGENT
            slope = m2
        else:
            slope = (m2 - m1) / math.pi
            verdict = DIVERGENT if slope >= -flat_tol else CONVERGENT
        fit = LevelFit(3, self.y_max - 2.0 * math.pi, self.y_max, slope, nan_or(m1), slope, verdict)
        reason = ("peaks of the level-3 density stop falling" if verdict == DIVERGENT
                  else "peaks of the level-3 density fall")
        return SeriesVerdict(verdict, reason, 3, (fit,))

    def ratio_bounds(self, tol: float = 0.05) -> "RatioBounds":
        """``c/gamma`` from ``(c/gamma)^2 -> q / LLn``, valid for tails with beta >= 2."""
        fn = lambda y: 0.5 * (self.log_q(y) - np.asarray(y, dtype=float))
        (lo1, hi1), (lo2, hi2) = self.period_extremes(fn)
        s_lo, s_hi = (lo2 - lo1) / math.pi, (hi2 - hi1) / math.pi
        a, b = math.exp(lo2), math.exp(hi2)
        if s_hi > tol:
            b = math.inf
        elif s_hi < -tol:
            b = 0.0
        if s_lo > tol:
            a = math.inf
        elif s_lo < -tol:
            a = 0.0
        trend = ("to-infinity" if a == math.inf else "to-zero" if b == 0.0
                 else "unbounded-above" if b == math.inf else "bounded")
        lower = math.inf if b == 0.0 else 1.0 / b
        upper = math.inf if a == 0.0 else 1.0 / a
        return RatioBounds(lower, upper, a, b, trend, s_hi)


def nan_or(x: float) -> float:
    return x if math.isfinite(x) else math.nan


def _far_exponents(dist, c: NormSeqSpec, policy: SigmaPolicy, y_max: float):
    pt = dist.power_tail()
    if pt is None or pt[1] < 2.0 or c.h is None or not c.h.far_range:
        return None
    if policy.kind not in ("delta", "constant"):
        return None
    return _FarExponents(dist, c.h, policy, y_max)


# -- alpha0 ---------------------------------------------------------------------


@dataclass(frozen=True)
class Probe:
    alpha: float
    verdict: str
    level: int
    ratio: float

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "verdict": self.verdict, "level": self.level,
                "block_ratio": _num(self.ratio)}


@dataclass(frozen=True)
class Alpha0Report:
    bracket: tuple[float, float] | None  # None when every probe was inconclusive
    flag: str  # finite | infinite | zero | inconclusive
    bisection_bracket: tuple[float, float] | None
    policy: dict
    c: dict
    ratio_bounds: RatioBounds
    regularity: RegularityReport
    small_tail_series: str  # sum P(|X| >= c_n) < inf ?
    probes: tuple[Probe, ...]
    evidence: dict = field(repr=False)  # alpha -> [(j, B_j)]
    scale_range: dict = field(default_factory=dict)  # where the series was read

    def to_json(self) -> dict:
        return {
            "alpha0_bracket": None if self.bracket is None else [_num(x) for x in self.bracket],
            "alpha0_flag": self.flag,
            "bisection_bracket": None if self.bisection_bracket is None
            else list(self.bisection_bracket),
            "c": self.c,
            "range": self.scale_range,
            "sigma_policy": self.policy,
            "ratio_bounds": self.ratio_bounds.to_json(),
            "regularity": self.regularity.to_json(),
            "tail_series_finite": self.small_tail_series,
            "probes": [p.to_json() for p in self.probes],
        }

    def evidence_rows(self) -> list[tuple[float, int, float]]:
        """``(alpha, j, B_j)`` for every probed alpha, in probe order."""
        rows = []
        for p in self.probes:
            for j, b in self.evidence[p.alpha]:
                rows.append((p.alpha, j, b))
        return rows


def _num(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else "-inf" if x < 0 else "nan"
    return x


class _Exponents:
    """``q(n) = c_n^2 / (2 n sigma_n^2)`` precomputed at every node used."""

    def __init__(self, dist, c, policy, nmax):
        self.ladder = ScaleLadder(0.0, math.log(nmax), base_level=1, max_level=3)
        jmax = int(math.floor(math.log2(nmax)))
        self.j = np.arange(0, jmax)
        edges = self.j * LOG2
        half = 0.5 * LOG2
        block_nodes = (edges[:, None] + half + half * _GL_X[None, :]).ravel()
        ends = np.append(edges, jmax * LOG2)
        nodes = np.concatenate([self.ladder.nodes(), block_nodes, ends])
        lc = c.log_c(nodes)
        ls = log_sigma_sq(dist, c, policy, nodes, lc)
        with np.errstate(over="ignore"):
            q = np.exp(2.0 * lc - math.log(2.0) - nodes - ls)
        n1 = self.ladder.nodes().size
        n2 = block_nodes.size
        self.q_ladder = q[:n1]
        self.q_blocks = q[n1:n1 + n2].reshape(len(self.j), -1)
        self.q_ends = q[n1 + n2:]
        self.ends = ends

    def classify(self, alpha: float) -> SeriesVerdict:
        # n * n^-1 exp(-alpha^2 q): the density of the series over log n
        return self.ladder.classify(-alpha * alpha * self.q_ladder)

    def blocks(self, alpha: float) -> list[tuple[int, float]]:
        """``B_j`` by 8-point Gauss-Legendre in ``log n`` plus the end correction."""
        a2 = alpha * alpha
        integral = logsumexp(-a2 * self.q_blocks, axis=1, b=0.5 * LOG2 * _GL_W[None, :])
        term = -a2 * self.q_ends - self.ends  # log of n^-1 exp(-alpha^2 q) at block ends
        out = []
        for k, j in enumerate(self.j):
            val = float(np.exp(integral[k]) + 0.5 * (np.exp(term[k]) - np.exp(term[k + 1])))
            out.append((int(j), max(val, 0.0)))
        return out


def alpha0_estimate(dist: DistributionSpec, c: NormSeqSpec, policy: SigmaPolicy,
                    nmax: float = 1e16, width: float = 0.01, alpha_cap: float = 1e3,
                    klass: KlassEval | None = None, far: bool | None = None,
                    y_max: float = 60.0) -> Alpha0Report:
    """Bracket ``alpha0`` by bisection over classified series.

    Two edges are bisected to ``width/2`` each: the smallest alpha whose series
    reads convergent, and below it the largest alpha whose density does not
    decay at all. Between them lie the near-flat cases the classifier cannot
    separate from divergence at finite range, so the bracket spans both.

    For power-tail laws (beta >= 2) with ``c = Psi`` from a built-in ``h`` the
    series and the ratio bounds are read far out, on ``LLL n <= y_max``; set
    ``far=False`` to stay below ``nmax``. Block sums always cover ``n <= nmax``.
    """
    if policy.kind == "dseq":
        check_truncation(c, policy.d, nmax)
    kl = klass or KlassEval(dist)
    regular = check_c_regularity(c, nmax)
    tail = _tail_series(dist, c, nmax)
    ex = _Exponents(dist, c, policy, nmax)
    fx = _far_exponents(dist, c, policy, y_max) if far is not False else None
    if far and fx is None:
        raise ValueError("far-range evaluation needs a power tail with beta >= 2 and c = Psi "
                         "from a built-in h")
    bounds = fx.ratio_bounds() if fx is not None else ratio_bounds(dist, c, nmax, kl)
    classify = fx.classify if fx is not None else ex.classify

    probes: list[Probe] = []
    evidence: dict = {}
    cache: dict = {}

    def probe(alpha: float) -> SeriesVerdict:
        if alpha not in cache:
            v = classify(alpha)
            cache[alpha] = v
            probes.append(Probe(alpha, v.verdict, v.level, v.ratio))
            evidence[alpha] = ex.blocks(alpha)
        return cache[alpha]

    def not_convergent(alpha: float) -> bool:
        # ties (inconclusive) go to the divergent side: alpha0 is a supremum
        return probe(alpha).verdict != CONVERGENT

    def clearly_divergent(alpha: float) -> bool:
        # density not decaying at all on the deciding level; near-flat decay
        # inside the classifier's tolerance does not count
        v = probe(alpha)
        if v.verdict != DIVERGENT:
            return False
        s = v.levels[-1].slope_late if v.levels else math.inf
        return not s < 0.0

    def bisect(pred, lo: float, hi: float) -> tuple[float, float]:
        while hi - lo > half_width:
            mid = 0.5 * (lo + hi)
            if pred(mid):
                lo = mid
            else:
                hi = mid
        return lo, hi

    half_width = 0.5 * width
    if math.isfinite(bounds.upper) and bounds.upper > 0:
        hi = 1.25 * bounds.upper + 0.1
    else:
        hi = 10.0
    while not_convergent(hi):
        if hi >= alpha_cap:
            break
        hi *= 2.0
    all_divergent = not_convergent(hi)
    if all_divergent:
        bis = (hi, math.inf)
    else:
        # the divergent/convergent edge, then the edge of clear divergence below it
        edge_lo, edge_hi = bisect(not_convergent, 0.0, hi)
        low, _ = bisect(clearly_divergent, 0.0, edge_lo) if edge_lo > 0 else (0.0, 0.0)
        bis = (low, edge_hi)

    if all(p.verdict == INCONCLUSIVE for p in probes):
        flag, bracket = INCONCLUSIVE, None
    elif bounds.trend == "to-zero" or all_divergent:
        flag, bracket = "infinite", (math.inf, math.inf)
    elif bounds.upper == 0.0 and bis[0] == 0.0:
        flag, bracket = "zero", bis
    else:
        flag, bracket = "finite", bis
    range_ = {"n_max": nmax} if fx is None else {"LLL_n_max": y_max}
    return Alpha0Report(bracket, flag, bis, policy.describe(), c.describe(), bounds, regular,
                        tail, tuple(probes), evidence, range_)


def _tail_series(dist, c, nmax) -> str:
    """Verdict on ``sum_n P(|X| >= c_n) < inf`` over ``n <= nmax``."""
    ladder = ScaleLadder(0.0, math.log(nmax), base_level=1, max_level=3)
    u = ladder.nodes()
    v = ladder.classify(dist.log_tail_u(c.log_c(u)) + u)
    return v.as_moment()


__all__ = [
    "NormSeqSpec", "SigmaPolicy", "RegularityReport", "check_c_regularity", "check_truncation",
    "TruncationError", "log_sigma_sq", "sigma_sq", "RatioBounds", "ratio_bounds", "Probe",
    "Alpha0Report", "alpha0_estimate", "DIVERGENT",
]
