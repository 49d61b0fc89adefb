"""Klass functionals: ``G(t) = t^2 / (H(t) + t M(t))``, its inverse ``K``, and
``gamma_n = sqrt(2) K(n / LLn) LLn``.

``G`` is evaluated in log form so that arguments far beyond ``1e154`` stay
representable. ``K`` is found by bracketing on a memoised geometric grid of
``G`` values and then solving in ``log t`` with Brent's method to machine
precision.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize

from .distmodel import DegenerateLawError, DistributionSpec
from .logscale import LL, LL_from_log


class InversionError(RuntimeError):
    pass


class KlassEval:
    """Cached evaluator of G, K and gamma_n for one law."""

    def __init__(self, dist: DistributionSpec, rtol: float = 1e-10, grid_ratio: float = 1.05,
                 grid_decades: tuple[float, float] = (-6.0, 20.0)):
        self.dist = dist
        self.rtol = rtol
        lo, hi = grid_decades
        step = math.log(grid_ratio)
        count = int(math.ceil((hi - lo) * math.log(10.0) / step)) + 1
        log_t = math.log(dist.scale) + lo * math.log(10.0) + step * np.arange(count)
        log_g = np.array([self.log_G_from_log(v) for v in log_t])
        self._grid_log_t = log_t
        self._grid_log_G = np.maximum.accumulate(log_g)

    # -- G ----------------------------------------------------------------
    def _denominator(self, t: float) -> float:
        return self.dist.H(t) + t * self.dist.M(t)

    def log_G_from_log(self, v: float) -> float:
        """``log G(exp(v))``."""
        t = math.exp(v)
        den = self._denominator(t)
        if not den > 0.0:
            raise DegenerateLawError(f"H(t) + t M(t) = 0 at t = {t!r}")
        return 2.0 * v - math.log(den)

    def G(self, t: float) -> float:
        if not t > 0:
            raise ValueError("G needs t > 0")
        return math.exp(self.log_G_from_log(math.log(t)))

    # -- K ----------------------------------------------------------------
    def log_K_from_log(self, w: float) -> float:
        """``log K(exp(w))``; Brent's method in log t to double resolution."""
        grid_t, grid_g = self._grid_log_t, self._grid_log_G
        i = int(np.searchsorted(grid_g, w, side="left"))
        if 0 < i < len(grid_g):
            lo, hi = grid_t[i - 1], grid_t[i]
        else:
            lo, hi = self._expand(w, i)
        f = lambda v: self.log_G_from_log(v) - w
        f_lo, f_hi = f(lo), f(hi)
        if f_lo >= 0.0:
            return lo if f_lo == 0.0 else self._bisect(lo, hi, w)
        if f_hi <= 0.0:
            return hi if f_hi == 0.0 else self._bisect(lo, hi, w)
        root = optimize.brentq(f, lo, hi, xtol=1e-300, rtol=4.0 * np.finfo(float).eps,
                               maxiter=200)
        if abs(f(root)) > self.rtol:
            raise InversionError(f"K inversion failed at log x = {w!r}")
        return root

    def _bisect(self, lo: float, hi: float, w: float) -> float:
        """Plain bisection in log t down to adjacent doubles (flat stretches of G)."""
        for _ in range(400):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if self.log_G_from_log(mid) < w:
                lo = mid
            else:
                hi = mid
        if abs(self.log_G_from_log(hi) - w) > self.rtol and abs(self.log_G_from_log(lo) - w) > self.rtol:
            raise InversionError(f"K inversion failed at log x = {w!r}")
        return hi

    def _expand(self, w: float, i: int) -> tuple[float, float]:
        grid_t = self._grid_log_t
        if i == 0:
            hi = grid_t[0]
            step = 1.0
            lo = hi - step
            while self.log_G_from_log(lo) >= w:
                hi, step = lo, 2.0 * step
                lo = hi - step
                if step > 1e4:
                    raise InversionError(f"no lower bracket for log x = {w!r}")
            return lo, hi
        lo = grid_t[-1]
        step = 1.0
        hi = lo + step
        while self.log_G_from_log(hi) < w:
            lo, step = hi, 2.0 * step
            hi = lo + step
            if hi > 705.0:
                raise InversionError(f"no upper bracket for log x = {w!r}")
        return lo, hi

    def K(self, x: float) -> float:
        if not x > 0:
            raise ValueError("K needs x > 0")
        return math.exp(self.log_K_from_log(math.log(x)))

    # -- gamma_n ------------------------------------------------------------
    def log_gamma_from_log(self, u: float) -> float:
        """``log gamma_n`` for ``n = exp(u)`` (n need not be an integer)."""
        ll = LL_from_log(u)
        return 0.5 * math.log(2.0) + self.log_K_from_log(u - math.log(ll)) + math.log(ll)

    def gamma(self, n: float) -> float:
        if n < 1:
            raise ValueError("gamma_n needs n >= 1")
        ll = LL(n)
        return math.sqrt(2.0) * self.K(n / ll) * ll

    def gamma_array(self, ns: np.ndarray) -> np.ndarray:
        return np.array([self.gamma(float(n)) for n in np.ravel(ns)]).reshape(np.shape(ns))


def klass_sequence(kl: KlassEval, ns) -> list[tuple[float, float, float]]:
    """Rows ``(n, gamma_n, K(n/LLn))``."""
    rows = []
    for n in ns:
        ll = LL(n)
        k = kl.K(n / ll)
        rows.append((float(n), math.sqrt(2.0) * k * ll, k))
    return rows
