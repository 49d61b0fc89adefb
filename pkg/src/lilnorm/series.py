"""Finite-range evidence about infinite series, tail integrals and limsups.

Series and integrals are cut into dyadic blocks (width ``log 2`` in
``u = log x``). Block sums are computed in log space, exactly for small
blocks and with Gauss-Legendre quadrature plus the Euler-Maclaurin end
correction for large ones.

Verdicts come from :class:`ScaleLadder`, which fits the trend of the block
density on the scales ``log n``, ``log log n`` and ``log log log n`` in turn
(repeated Cauchy condensation). Power-like decay on one scale is exponential
on the next, so the boundary cases ``1/(n Ln)``, ``1/(n Ln LLn)`` that look
flat-ish on the first scale are settled one or two scales up.

Nothing is decided: the output is a label plus the block table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import logsumexp

LOG2 = math.log(2.0)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)

CONVERGENT = "convergent"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class BlockSums:
    index: np.ndarray
    u_lo: np.ndarray
    u_hi: np.ndarray
    log_sum: np.ndarray

    def table(self) -> list[tuple[int, float]]:
        return [(int(j), float(np.exp(s))) for j, s in zip(self.index, self.log_sum)]


def _num(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")


def log_integral(log_f: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> float:
    """``log int_a^b exp(log_f(u)) du`` by 24-point Gauss-Legendre."""
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * _GL_X
    vals = np.asarray(log_f(nodes), dtype=float)
    return float(logsumexp(vals, b=_GL_W * half))


def dyadic_series_blocks(log_term: Callable[[np.ndarray], np.ndarray], j_max: int,
                         exact_below: int = 12) -> BlockSums:
    """Block sums ``B_j = sum_{2^j <= n < 2^(j+1)} term(n)`` for ``j = 0..j_max``.

    ``log_term`` maps ``u = log n`` (array) to ``log term(n)``.
    """
    out = []
    for j in range(j_max + 1):
        if j < exact_below:
            n = np.arange(2**j, 2 ** (j + 1), dtype=float)
            out.append(float(logsumexp(log_term(np.log(n)))))
            continue
        a, b = j * LOG2, (j + 1) * LOG2
        li = log_integral(lambda u: log_term(u) + u, a, b)
        ends = np.asarray(log_term(np.array([a, b])), dtype=float)
        # sum_{n=A}^{B-1} f(n) ~ int_A^B f + (f(A) - f(B)) / 2
        pos = np.logaddexp(li, ends[0] - LOG2)
        neg = ends[1] - LOG2
        if np.isfinite(neg) and neg < pos:
            out.append(float(pos + np.log1p(-np.exp(neg - pos))))
        else:
            out.append(float(pos))
    j = np.arange(j_max + 1)
    return BlockSums(j, j * LOG2, (j + 1) * LOG2, np.array(out))


def expectation_blocks(dist, log_g: Callable[[np.ndarray], np.ndarray], u_max: float,
                       u_min: float | None = None) -> BlockSums:
    """Blocks of ``E g(|X|)`` over ``log|X|`` in ``[j log2, (j+1) log2)``."""
    if u_min is None:
        u_min = min(0.0, math.log(dist.scale))
    j0 = math.floor(u_min / LOG2)
    j1 = math.ceil(u_max / LOG2)
    js = np.arange(j0, j1)
    out = []
    atoms = [(math.log(x), p) for x, p in dist.atoms() if x > 0]
    for j in js:
        a, b = j * LOG2, (j + 1) * LOG2
        val = log_integral(lambda u: log_g(u) + dist.log_abs_density_u(u), a, b)
        for au, p in atoms:
            if a <= au < b:
                val = float(np.logaddexp(val, float(log_g(np.array([au]))[0]) + math.log(p)))
        out.append(val)
    return BlockSums(js, js * LOG2, (js + 1) * LOG2, np.array(out))


def _fit_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class LevelFit:
    """Trend of the condensed density on one level of the ladder."""

    level: int
    lo: float
    hi: float
    slope: float
    slope_early: float
    slope_late: float
    decision: str

    @property
    def ratio(self) -> float:
        """Fitted ratio between consecutive dyadic blocks of this level."""
        if math.isnan(self.slope):
            return math.nan
        return math.exp(min(self.slope * LOG2, 709.0))

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "window": [self.lo, self.hi],
            "slope": _num(self.slope),
            "slope_early": _num(self.slope_early),
            "slope_late": _num(self.slope_late),
            "block_ratio": _num(self.ratio),
            "decision": self.decision,
        }


@dataclass(frozen=True)
class SeriesVerdict:
    verdict: str
    reason: str
    level: int
    levels: tuple[LevelFit, ...] = ()
    blocks: BlockSums | None = field(default=None, repr=False)

    @property
    def ratio(self) -> float:
        for fit in self.levels:
            if fit.level == self.level:
                return fit.ratio
        return math.nan

    def as_moment(self) -> str:
        return {CONVERGENT: "finite", DIVERGENT: "infinite"}.get(self.verdict, INCONCLUSIVE)

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "reason": self.reason,
            "level": self.level,
            "block_ratio": _num(self.ratio),
            "levels": [f.to_json() for f in self.levels],
        }
        if self.blocks is not None:
            out["blocks"] = [[j, b] for j, b in self.blocks.table()]
        return out


def _down(w: np.ndarray, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Map a level variable ``steps`` levels down; also return the log Jacobian."""
    jac = np.zeros_like(w)
    for _ in range(steps):
        jac = jac + w
        with np.errstate(over="ignore"):
            w = np.exp(w)
    return w, jac


class ScaleLadder:
    """Classify ``int^inf D(w) dw`` (or a series with that density) by condensation.

    Level 1 is ``u = log n``: dyadic blocks in ``n`` are unit blocks in ``u``.
    Level ``k + 1`` uses ``log`` of the level-``k`` variable, which is Cauchy
    condensation applied once more; the density picks up the Jacobian
    ``D_{k+1}(w) = D_k(e^w) e^w``. On each level the trailing ``window`` of
    the range is cut into sub-blocks and the log block density is fitted
    against the level variable, on the whole window and on its two halves.

    * decay whose rate shrinks (late/early slope ``< decel``) is power-like
      on this level: move one level up if there is one;
    * late slope ``>= -flat_tol``: blocks bounded below or growing, divergent;
    * still-slowing decay on the last level: inconclusive;
    * otherwise steady geometric decay: convergent.

    ``base_level`` says which level ``lo``/``hi`` and the density refer to.
    Callers evaluate the density once at :meth:`nodes` and pass the values
    to :meth:`classify`, so one ladder serves many densities.
    """

    def __init__(self, lo: float, hi: float, base_level: int = 1, max_level: int = 3,
                 window: float = 0.5, min_span: float = 0.25, flat_tol: float = 0.005,
                 decel: float = 0.85, max_sub: int = 4096):
        if not hi > lo:
            raise ValueError("empty range")
        self.base_level = base_level
        self.flat_tol = flat_tol
        self.decel = decel
        self._levels = []  # (level, lo, hi, mids, width, node slice)
        chunks = []
        offset = 0
        a, b = float(lo), float(hi)
        for level in range(base_level, max_level + 1):
            if level > base_level:
                a, b = math.log(max(a, math.e)), math.log(max(b, math.e))
            span = window * (b - a)
            if span < min_span:
                break
            w_lo = b - span
            count = int(min(max_sub, max(16, math.ceil(span / (LOG2 / 8)))))
            edges = np.linspace(w_lo, b, count + 1)
            width = edges[1] - edges[0]
            mids = 0.5 * (edges[1:] + edges[:-1])
            nodes = (mids[:, None] + 0.5 * width * _GL8_X[None, :]).ravel()
            base, jac = _down(nodes, level - base_level)
            chunks.append((base, jac))
            self._levels.append((level, w_lo, b, mids, width, slice(offset, offset + nodes.size)))
            offset += nodes.size
        self._base = np.concatenate([c[0] for c in chunks]) if chunks else np.empty(0)
        self._jac = np.concatenate([c[1] for c in chunks]) if chunks else np.empty(0)

    def nodes(self) -> np.ndarray:
        """Base-level abscissae at which the log density is needed."""
        return self._base

    @property
    def levels(self) -> list[int]:
        return [lv[0] for lv in self._levels]

    def classify_fn(self, log_density: Callable[[np.ndarray], np.ndarray],
                    blocks: BlockSums | None = None) -> SeriesVerdict:
        return self.classify(np.asarray(log_density(self._base), dtype=float), blocks)

    def classify(self, log_values: np.ndarray, blocks: BlockSums | None = None) -> SeriesVerdict:
        log_values = np.asarray(log_values, dtype=float)
        fits: list[LevelFit] = []
        nan = math.nan
        for idx, (level, w_lo, w_hi, mids, width, sl) in enumerate(self._levels):
            vals = (log_values[sl] + self._jac[sl]).reshape(len(mids), -1)
            vals = np.where(np.isnan(vals), -np.inf, vals)
            dens = logsumexp(vals, axis=1, b=0.5 * _GL8_W[None, :]) if vals.size else vals
            dens = np.asarray(dens, dtype=float)
            half = len(mids) // 2
            if np.any(np.isposinf(dens)):
                fits.append(LevelFit(level, w_lo, w_hi, math.inf, nan, math.inf, DIVERGENT))
                return SeriesVerdict(DIVERGENT, "infinite block density", level, tuple(fits), blocks)
            if np.all(np.isneginf(dens[half:])) or np.isneginf(dens[-1]):
                fits.append(LevelFit(level, w_lo, w_hi, -math.inf, nan, -math.inf, CONVERGENT))
                return SeriesVerdict(CONVERGENT, "block sums vanish", level, tuple(fits), blocks)
            ok = np.isfinite(dens)
            early, late = ok.copy(), ok.copy()
            early[half:] = False
            late[:half] = False
            if np.sum(late) < 4:
                fits.append(LevelFit(level, w_lo, w_hi, nan, nan, nan, INCONCLUSIVE))
                continue
            slope = _fit_line(mids[ok], dens[ok])[0]
            s_late = _fit_line(mids[late], dens[late])[0]
            s_early = _fit_line(mids[early], dens[early])[0] if np.sum(early) >= 4 else nan
            slowing = s_early < 0 and s_late < 0 and s_late / s_early < self.decel
            if slowing and idx + 1 < len(self._levels):
                fits.append(LevelFit(level, w_lo, w_hi, slope, s_early, s_late, "condense"))
                continue
            if s_late >= -self.flat_tol:
                fits.append(LevelFit(level, w_lo, w_hi, slope, s_early, s_late, DIVERGENT))
                return SeriesVerdict(DIVERGENT, f"block sums bounded below or growing on level {level}",
                                     level, tuple(fits), blocks)
            if slowing:
                fits.append(LevelFit(level, w_lo, w_hi, slope, s_early, s_late, INCONCLUSIVE))
                break
            fits.append(LevelFit(level, w_lo, w_hi, slope, s_early, s_late, CONVERGENT))
            return SeriesVerdict(CONVERGENT, f"steady geometric decay on level {level}",
                                 level, tuple(fits), blocks)
        last = fits[-1].level if fits else self.base_level
        return SeriesVerdict(INCONCLUSIVE, "decay still slowing on the last resolvable level",
                             last, tuple(fits), blocks)


# -- limsup along a grid --------------------------------------------------


def trailing_trend(u: np.ndarray, values: np.ndarray, frac: float = 0.25,
                   threshold: float = 0.05) -> tuple[float, str, float]:
    """Trailing-window sup and trend of ``values`` sampled at ``u = log x``.

    The trend is the elasticity ``kappa = d log F / d log Lx`` fitted over the
    window: ``|kappa| <= threshold`` reads as converging, above as diverging,
    below as vanishing. Sign changes of the increments with a relative
    amplitude over 1% read as oscillating.

    Returns ``(window_sup, trend, kappa)``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(values, dtype=float)
    ok = np.isfinite(v)
    u, v = u[ok], v[ok]
    k = max(3, int(math.ceil(frac * len(v))))
    uw, vw = u[-k:], v[-k:]
    sup = float(np.max(vw))
    if np.all(vw == 0.0):
        return 0.0, "vanishing", -math.inf
    if np.any(vw <= 0.0):
        return sup, "oscillating", math.nan
    lv = np.log(vw)
    kappa, _ = _fit_line(np.log(np.maximum(uw, 1.0)), lv)
    inc = np.diff(lv)
    signs = np.sign(inc[np.abs(inc) > 1e-12])
    amplitude = float(np.ptp(lv - np.polyval(np.polyfit(np.log(np.maximum(uw, 1.0)), lv, 1),
                                                np.log(np.maximum(uw, 1.0)))))
    if len(signs) > 1 and np.any(signs[1:] != signs[:-1]) and amplitude > 0.01:
        return sup, "oscillating", kappa
    if kappa > threshold:
        return sup, "diverging", kappa
    if kappa < -threshold:
        return sup, "vanishing", kappa
    return sup, "converging", kappa


# -- E X^2 g(|X|) < inf ---------------------------------------------------


def second_moment_verdict(dist, log_g: Callable[[np.ndarray], np.ndarray],
                          far_g: Callable | None = None, u_max: float = 690.0,
                          y_max: float = 60.0) -> SeriesVerdict:
    """Classify ``E[X^2 g(|X|)] < inf``.

    ``log_g(u)`` gives ``log g(e^u)``. If ``far_g`` is given it maps arrays
    ``(v, y, u)`` with ``v = log log x``, ``y = log v`` and ``u = e^v``
    (possibly ``inf``) to ``(c, rest)`` meaning ``log g = c v + rest``; the
    density is then classified directly on the ``y`` scale up to ``y_max``,
    which reaches far past double range. Otherwise the ladder runs over
    ``log x <= u_max``. The dyadic blocks over ``log x <= u_max`` are attached
    in both cases.
    """
    blocks = expectation_blocks(dist, lambda u: 2.0 * np.asarray(u) + log_g(u), u_max=u_max)
    if far_g is not None:
        def log_density_y(y):
            y = np.asarray(y, dtype=float)
            with np.errstate(over="ignore"):
                v = np.exp(y)
                u = np.exp(v)
            c, rest = far_g(v, y, u)
            coef = c + 1.0  # the Jacobian du/dy = e^v e^y adds one v
            with np.errstate(invalid="ignore"):
                lead = np.zeros_like(v) if coef == 0.0 else coef * v
            return dist.log_m2_density_u(u) + lead + rest + y

        probe = log_density_y(np.array([y_max]))
        if not np.isnan(probe[0]):
            ladder = ScaleLadder(1.0, y_max, base_level=3, max_level=3)
            return ladder.classify_fn(log_density_y, blocks)

    def log_density_u(u):
        u = np.asarray(u, dtype=float)
        return dist.log_m2_density_u(u) + log_g(u)

    lo = max(0.0, math.log(dist.scale))
    ladder = ScaleLadder(lo, u_max, base_level=1, max_level=3)
    return ladder.classify_fn(log_density_u, blocks)


# -- sup over a window far out on the LLL scale ---------------------------


def _ternary_max(f, lo: float, hi: float) -> float:
    """Max of a unimodal ``f`` on ``[lo, hi]``, narrowed to adjacent doubles.

    Peaks of ``1/(1 + e^y sin^2 y)`` are ``e^(-y/2)`` wide, far below what a
    tolerance relative to ``y`` resolves.
    """
    for _ in range(300):
        a = lo + (hi - lo) / 3.0
        b = hi - (hi - lo) / 3.0
        if not lo < a < b < hi:
            break
        if f(a) < f(b):
            lo = a
        else:
            hi = b
    return max(f(lo), f(hi), f(0.5 * (lo + hi)))


def far_window_sup(log_fn: Callable[[np.ndarray], np.ndarray], y_hi: float,
                   span: float = 3.0 * math.pi, points: int = 6000,
                   max_peaks: int = 32) -> tuple[float, str, np.ndarray, np.ndarray]:
    """Sup and trend of ``exp(log_fn(y))`` over ``y`` in ``[y_hi - span, y_hi]``.

    Sampled local maxima are refined by ternary search, so narrow peaks of
    oscillating functionals are not missed. Returns ``(sup, trend, y, values)``.
    """
    ys = np.linspace(y_hi - span, y_hi, points)
    lv = np.asarray(log_fn(ys), dtype=float)
    best = float(np.max(lv))
    step = ys[1] - ys[0]
    peaks = np.nonzero((lv[1:-1] > lv[:-2]) & (lv[1:-1] >= lv[2:]))[0] + 1
    peaks = peaks[np.argsort(lv[peaks])[::-1][:max_peaks]]
    for i in peaks:
        best = max(best, _ternary_max(lambda t: float(log_fn(np.array([t]))[0]),
                                      ys[i] - step, ys[i] + step))
    vals = np.exp(np.clip(lv, -745.0, 709.0))
    finite = np.isfinite(lv)
    if not np.any(finite) or np.isneginf(lv[-1]):
        trend = "vanishing"
    elif np.ptp(lv[finite]) > 0.01 and len(peaks) > 1:
        trend = "oscillating"
    else:
        # growth of log F per unit of LLLx, fitted on log values so that
        # under- or overflowing functionals keep their trend
        kappa = _fit_line(ys[finite], lv[finite])[0]
        trend = "diverging" if kappa > 0.05 else "vanishing" if kappa < -0.05 else "converging"
    return math.exp(min(best, 709.0)), trend, ys, vals
