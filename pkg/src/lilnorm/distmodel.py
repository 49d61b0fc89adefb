"""Symmetric mean-zero laws: tails, truncated moments and sampling.

Every law exposes

* ``tail(t) = P(|X| > t)``
* ``H(t) = E X^2 1{|X| <= t}`` and ``M(t) = E|X| 1{|X| > t}``
* ``H_quadrature`` / ``M_quadrature``: the same moments integrated from the
  tail alone, used as an independent route for the closed forms
* ``log_abs_density_u(u)``: log density of ``log|X|`` at ``u``, for moment
  integrals evaluated in log space
* ``sample(rng, count)``

A tail table is read from a two-column text file whose first line is
``# lil-tail-table v1``.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate, special

TAIL_TABLE_HEADER = "# lil-tail-table v1"


class Flag(enum.Enum):
    """Marker for quantities that are infinite; never used in arithmetic."""

    DIVERGENT = "divergent"

    def __repr__(self) -> str:
        return self.value

    __str__ = __repr__


DIVERGENT = Flag.DIVERGENT


class InfiniteMeanError(ValueError):
    """E|X| is infinite, so M(t) does not exist."""


class DegenerateLawError(ValueError):
    """H(t) + t M(t) vanishes."""


class ExtrapolationWarning(UserWarning):
    pass


def _check_t(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise ValueError(f"expected finite t >= 0, got {t!r}")
    return t


@dataclass(frozen=True)
class DistributionSpec:
    """Base class. Subclasses supply the closed forms."""

    kind = "abstract"

    # -- required by subclasses -------------------------------------------
    def tail(self, t: float) -> float:
        raise NotImplementedError

    def log_tail_u(self, u: np.ndarray) -> np.ndarray:
        """``log P(|X| > exp(u))``, vectorised; ``-inf`` where the tail vanishes."""
        raise NotImplementedError

    def H(self, t: float) -> float:
        raise NotImplementedError

    def M(self, t: float) -> float:
        raise NotImplementedError

    def mean_abs(self) -> float:
        return self.M(0.0)

    def second_moment(self) -> float | Flag:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        raise NotImplementedError

    @property
    def scale(self) -> float:
        """A characteristic size of |X|, used to place grids."""
        raise NotImplementedError

    def breakpoints(self) -> list[float]:
        """Points where the tail is not smooth."""
        return []

    def log_abs_density_u(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def atoms(self) -> list[tuple[float, float]]:
        """Point masses of |X| away from zero, as (location, probability)."""
        return []

    def describe(self) -> dict:
        """Kind and parameters, JSON-ready."""
        out = {"kind": self.kind}
        for f in dataclasses.fields(self):
            if f.init:
                val = getattr(self, f.name)
                out[f.name] = [list(p) for p in val] if f.name == "points" else val
        return out

    def power_tail(self) -> tuple[float, float, float] | None:
        """``(log C, beta, log t0)`` when ``P(|X| > t) = C t^-beta`` for all ``t >= t0``."""
        return None

    def far_log_H(self, v: np.ndarray) -> tuple[float, float, np.ndarray]:
        """``log H(x) = a u + b v + rest`` with ``u = log x``, ``v = log u``.

        Needs a power tail and ``x`` beyond its start; ``u`` may overflow.
        Returns ``(a, b, rest)``.
        """
        pt = self.power_tail()
        if pt is None:
            raise ValueError(f"{self.kind} has no power tail")
        log_c, beta, lt0 = pt
        v = np.asarray(v, dtype=float)
        with np.errstate(over="ignore"):
            u = np.exp(v)
        finite = np.isfinite(u)
        uf = np.where(finite, u, 1.0)
        h0 = self.H(math.exp(lt0))
        if beta == 2.0:
            # H = H0 + 2C (u - lt0)
            corr = (h0 / (2.0 * math.exp(log_c)) - lt0) / uf
            return 0.0, 1.0, math.log(2.0 * math.exp(log_c)) + np.where(finite, np.log1p(corr), 0.0)
        k = beta * math.exp(log_c) / (2.0 - beta)
        if beta < 2.0:
            # H = H0 + k (x^(2-beta) - t0^(2-beta))
            with np.errstate(over="ignore", under="ignore"):
                corr = (h0 / k - math.exp((2.0 - beta) * lt0)) * np.exp(-(2.0 - beta) * uf)
            return 2.0 - beta, 0.0, math.log(k) + np.where(finite, np.log1p(corr), 0.0)
        # beta > 2: H = H0 - k' (x^(2-beta) - t0^(2-beta)), k' = -k > 0
        total = h0 - k * math.exp((2.0 - beta) * lt0)
        with np.errstate(under="ignore"):
            val = total + np.where(finite, k * np.exp((2.0 - beta) * uf), 0.0)
        return 0.0, 0.0, np.log(val)

    def log_m2_density_u(self, u: np.ndarray) -> np.ndarray:
        """``log(x^2 * density of log|X|)`` at ``x = exp(u)``: the density of
        ``E X^2`` over ``log|X|``. Laws with power tails override this so that
        ``u = inf`` gives the limiting value; here it is ``nan``.
        """
        u = np.asarray(u, dtype=float)
        with np.errstate(invalid="ignore"):
            out = 2.0 * u + self.log_abs_density_u(np.where(np.isfinite(u), u, 0.0))
        return np.where(np.isfinite(u), out, np.nan)

    # -- shared ------------------------------------------------------------
    def tail_with_flag(self, t: float) -> tuple[float, bool]:
        return self.tail(t), False

    def has_finite_mean(self) -> bool:
        try:
            self.mean_abs()
        except InfiniteMeanError:
            return False
        return True

    def H_array(self, t: np.ndarray) -> np.ndarray:
        return np.array([self.H(x) for x in np.ravel(t)]).reshape(np.shape(t))

    def _pieces(self, lo: float, hi: float) -> list[tuple[float, float]]:
        """Split [lo, hi] at the law's breakpoints and geometric steps of e^2."""
        cuts = sorted({lo, hi, *[b for b in self.breakpoints() if lo < b < hi]})
        out = []
        for a, b in zip(cuts[:-1], cuts[1:]):
            if a <= 0.0:
                out.append((a, b))
                continue
            n = max(1, math.ceil(math.log(b / a) / 2.0))
            edges = np.geomspace(a, b, n + 1)
            edges[0], edges[-1] = a, b
            out.extend(zip(edges[:-1], edges[1:]))
        return out

    def H_quadrature(self, t: float, rtol: float = 1e-10) -> float:
        """``H(t) = int_0^t 2 s (P(|X|>s) - P(|X|>t)) ds`` by adaptive quadrature."""
        t = _check_t(t)
        if t == 0.0:
            return 0.0
        pt = self.tail(t)
        first = min(t, self.scale) * 1e-3
        total = 0.0
        for a, b in [(0.0, first), *self._pieces(first, t)]:
            if a == 0.0:
                val, _ = integrate.quad(lambda s: 2.0 * s * (self.tail(s) - pt), a, b,
                                        epsabs=0.0, epsrel=rtol, limit=200)
            else:
                val, _ = integrate.quad(
                    lambda v: 2.0 * math.exp(2.0 * v) * (self.tail(math.exp(v)) - pt),
                    math.log(a), math.log(b), epsabs=0.0, epsrel=rtol, limit=200)
            total += val
        return total

    def M_quadrature(self, t: float, rtol: float = 1e-10) -> float:
        """``M(t) = t P(|X|>t) + int_t^inf P(|X|>s) ds`` by adaptive quadrature."""
        t = _check_t(t)
        if not self.has_finite_mean():
            raise InfiniteMeanError(f"{self!r} has infinite mean")
        lo = t if t > 0.0 else self.scale * 1e-3
        total = t * self.tail(t)
        if t == 0.0:
            total += integrate.quad(self.tail, 0.0, lo, epsabs=0.0, epsrel=rtol)[0]
        hi = max(lo, self.scale) * 1e6
        for a, b in self._pieces(lo, hi):
            total += integrate.quad(lambda v: math.exp(v) * self.tail(math.exp(v)),
                                    math.log(a), math.log(b), epsabs=0.0, epsrel=rtol,
                                    limit=200)[0]
        total += self._tail_integral_beyond(hi, rtol)
        return total

    def _tail_integral_beyond(self, hi: float, rtol: float) -> float:
        val, _ = integrate.quad(lambda v: math.exp(v) * self.tail(math.exp(v)),
                                math.log(hi), math.inf, epsabs=0.0, epsrel=rtol, limit=200)
        return val


@dataclass(frozen=True)
class Rademacher(DistributionSpec):
    """``X = +-amplitude`` with probability 1/2 each."""

    amplitude: float = 1.0
    kind = "rademacher"

    def __post_init__(self):
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")

    @property
    def scale(self) -> float:
        return self.amplitude

    def breakpoints(self):
        return [self.amplitude]

    def tail(self, t):
        return 1.0 if _check_t(t) < self.amplitude else 0.0

    def log_tail_u(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(u < math.log(self.amplitude), 0.0, -np.inf)

    def H(self, t):
        return 0.0 if _check_t(t) < self.amplitude else self.amplitude**2

    def H_array(self, t):
        return np.where(np.asarray(t) < self.amplitude, 0.0, self.amplitude**2)

    def M(self, t):
        return self.amplitude if _check_t(t) < self.amplitude else 0.0

    def second_moment(self):
        return self.amplitude**2

    def log_abs_density_u(self, u):
        return np.full(np.shape(u), -np.inf)

    def log_m2_density_u(self, u):
        return np.full(np.shape(u), -np.inf)

    def atoms(self):
        return [(self.amplitude, 1.0)]

    def _tail_integral_beyond(self, hi, rtol):
        return 0.0

    def sample(self, rng, count):
        return self.amplitude * (2.0 * rng.integers(0, 2, size=count) - 1.0)


@dataclass(frozen=True)
class Gaussian(DistributionSpec):
    sigma: float = 1.0
    kind = "gaussian"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def scale(self):
        return self.sigma

    def tail(self, t):
        return float(special.erfc(_check_t(t) / (self.sigma * math.sqrt(2.0))))

    def log_tail_u(self, u):
        s = np.exp(np.asarray(u, dtype=float)) / self.sigma
        return math.log(2.0) + special.log_ndtr(-s)

    def H(self, t):
        s = _check_t(t) / self.sigma
        return self.sigma**2 * float(special.gammainc(1.5, 0.5 * s * s))

    def H_array(self, t):
        s = np.asarray(t, dtype=float) / self.sigma
        with np.errstate(over="ignore"):
            return self.sigma**2 * special.gammainc(1.5, 0.5 * s * s)

    def M(self, t):
        s = _check_t(t) / self.sigma
        return self.sigma * math.sqrt(2.0 / math.pi) * math.exp(-0.5 * s * s)

    def second_moment(self):
        return self.sigma**2

    def log_abs_density_u(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(over="ignore"):
            x = np.exp(u) / self.sigma
            return 0.5 * math.log(2.0 / math.pi) - 0.5 * x * x + u - math.log(self.sigma)

    def log_m2_density_u(self, u):
        u = np.asarray(u, dtype=float)
        small = np.minimum(u, 400.0)
        return np.where(u < 400.0, 2.0 * small + self.log_abs_density_u(small), -np.inf)

    def _tail_integral_beyond(self, hi, rtol):
        # tail(hi) < 1e-200 for hi = 1e6 sigma
        return 0.0

    def sample(self, rng, count):
        return self.sigma * rng.standard_normal(count)


@dataclass(frozen=True)
class SymPareto(DistributionSpec):
    """Density ``(beta xmin^beta / 2) |x|^-(beta+1)`` on ``|x| >= xmin``."""

    beta: float
    xmin: float = 1.0
    kind = "sym-pareto"

    def __post_init__(self):
        if not (self.beta > 0 and self.xmin > 0):
            raise ValueError("beta and xmin must be positive")

    @property
    def scale(self):
        return self.xmin

    def breakpoints(self):
        return [self.xmin]

    def tail(self, t):
        t = _check_t(t)
        if t < self.xmin:
            return 1.0
        return (self.xmin / t) ** self.beta

    def log_tail_u(self, u):
        u = np.asarray(u, dtype=float)
        lx = math.log(self.xmin)
        return np.where(u < lx, 0.0, -self.beta * (u - lx))

    def H(self, t):
        t = _check_t(t)
        if t <= self.xmin:
            return 0.0
        w = math.log(t / self.xmin)
        z = (2.0 - self.beta) * w
        # beta xmin^2 (exp(z) - 1) / (2 - beta), stable near beta = 2
        rel = 1.0 if z == 0.0 else math.expm1(z) / z
        return self.beta * self.xmin**2 * w * rel

    def H_array(self, t):
        t = np.asarray(t, dtype=float)
        w = np.log(np.maximum(t, self.xmin) / self.xmin)
        z = (2.0 - self.beta) * w
        with np.errstate(invalid="ignore", divide="ignore"):
            rel = np.where(z == 0.0, 1.0, np.expm1(z) / np.where(z == 0.0, 1.0, z))
        return self.beta * self.xmin**2 * w * rel

    def mean_abs(self):
        if self.beta <= 1.0:
            raise InfiniteMeanError(f"sym-pareto with beta={self.beta} has infinite mean")
        return self.beta * self.xmin / (self.beta - 1.0)

    def M(self, t):
        t = _check_t(t)
        m0 = self.mean_abs()
        if t < self.xmin:
            return m0
        return m0 * (self.xmin / t) ** (self.beta - 1.0)

    def second_moment(self):
        if self.beta <= 2.0:
            return DIVERGENT
        return self.beta * self.xmin**2 / (self.beta - 2.0)

    def log_abs_density_u(self, u):
        u = np.asarray(u, dtype=float)
        lx = math.log(self.xmin)
        return np.where(u < lx, -np.inf, math.log(self.beta) - self.beta * (u - lx))

    def power_tail(self):
        lx = math.log(self.xmin)
        return self.beta * lx, self.beta, lx

    def log_m2_density_u(self, u):
        u = np.asarray(u, dtype=float)
        lx = math.log(self.xmin)
        # beta xmin^beta x^(2 - beta); exact for u = inf as well
        slope = 2.0 - self.beta
        with np.errstate(invalid="ignore"):
            power = np.zeros_like(u) if slope == 0.0 else slope * u
        return np.where(u < lx, -np.inf, math.log(self.beta) + self.beta * lx + power)

    def _tail_integral_beyond(self, hi, rtol):
        if self.beta <= 1.0:
            return math.inf
        return hi * self.tail(hi) / (self.beta - 1.0)

    def sample(self, rng, count):
        u = 1.0 - rng.random(count)  # (0, 1]
        sign = 2.0 * rng.integers(0, 2, size=count) - 1.0
        return sign * self.xmin * u ** (-1.0 / self.beta)


def feller_pruitt() -> SymPareto:
    """Density ``|x|^-3`` on ``|x| >= 1``."""
    return SymPareto(beta=2.0, xmin=1.0)


@dataclass(frozen=True)
class TailTable(DistributionSpec):
    """Law of |X| given by points ``(t_i, P(|X| > t_i))``.

    Between positive points the tail is linear in log-log coordinates; a
    segment ending at probability zero is linear in t. Below the first point
    the tail is flat at its first value (the missing mass sits at zero).
    Beyond the last positive point the last segment's power law is extended
    and flagged as extrapolated.
    """

    points: tuple[tuple[float, float], ...]
    kind = "tail-table"
    _t: np.ndarray = field(init=False, repr=False, compare=False)
    _p: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple((float(t), float(p)) for t, p in self.points)
        if not pts:
            raise ValueError("tail table is empty")
        t = np.array([a for a, _ in pts])
        p = np.array([b for _, b in pts])
        if np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise ValueError("tail table abscissae must be positive and strictly increasing")
        if np.any(p < 0) or np.any(p > 1) or np.any(np.diff(p) >= 0):
            raise ValueError("tail probabilities must lie in [0, 1] and strictly decrease")
        if p[-1] > 0 and len(p) < 2:
            raise ValueError("a positive final tail needs two points to extrapolate")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_p", p)

    @classmethod
    def from_file(cls, path: str | Path) -> "TailTable":
        text = Path(path).read_text(encoding="utf-8").splitlines()
        if not text or text[0].strip() != TAIL_TABLE_HEADER:
            raise ValueError(f"{path}: first line must be {TAIL_TABLE_HEADER!r}")
        rows = []
        for lineno, line in enumerate(text[1:], start=2):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two columns")
            rows.append((float(parts[0]), float(parts[1])))
        return cls(tuple(rows))

    def to_file(self, path: str | Path) -> None:
        lines = [TAIL_TABLE_HEADER] + [f"{t!r} {p!r}" for t, p in self.points]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @property
    def scale(self):
        return float(self._t[0])

    def breakpoints(self):
        return list(self._t)

    @property
    def _last_exponent(self) -> float:
        t, p = self._t, self._p
        return -math.log(p[-1] / p[-2]) / math.log(t[-1] / t[-2])

    def tail_with_flag(self, t):
        t = _check_t(t)
        ts, ps = self._t, self._p
        if t < ts[0]:
            return float(ps[0]), False
        if t >= ts[-1]:
            if ps[-1] == 0.0:
                return 0.0, False
            return float(ps[-1] * (ts[-1] / t) ** self._last_exponent), t > ts[-1]
        i = int(np.searchsorted(ts, t, side="right")) - 1
        t0, t1, p0, p1 = ts[i], ts[i + 1], ps[i], ps[i + 1]
        if p1 == 0.0:
            return float(p0 * (t1 - t) / (t1 - t0)), False
        w = math.log(t / t0) / math.log(t1 / t0)
        return float(p0 * (p1 / p0) ** w), False

    def tail(self, t):
        p, extrapolated = self.tail_with_flag(t)
        if extrapolated:
            warnings.warn(f"tail({t!r}) extrapolated beyond table", ExtrapolationWarning,
                          stacklevel=2)
        return p

    def _tail_quiet(self, t):
        return self.tail_with_flag(t)[0]

    def log_tail_u(self, u):
        u = np.asarray(u, dtype=float)
        out = np.empty(u.shape)
        for idx, val in np.ndenumerate(u):
            p = self._tail_quiet(math.exp(val)) if val < 709 else self._far_tail(val)
            out[idx] = math.log(p) if p > 0 else -math.inf
        return out

    def _far_tail(self, u):
        if self._p[-1] == 0.0:
            return 0.0
        return math.exp(math.log(self._p[-1]) - self._last_exponent * (u - math.log(self._t[-1])))

    def log_abs_density_u(self, u):
        u = np.asarray(u, dtype=float)
        out = np.full(u.shape, -np.inf)
        ts, ps = self._t, self._p
        lts = np.log(ts)
        for idx, val in np.ndenumerate(u):
            if val < lts[0]:
                continue
            if val >= lts[-1]:
                if ps[-1] > 0:
                    lp = math.log(self._far_tail(val))
                    out[idx] = math.log(self._last_exponent) + lp
                continue
            i = int(np.searchsorted(lts, val, side="right")) - 1
            if ps[i + 1] == 0.0:
                # uniform mass on the final segment, density in log scale = x p
                out[idx] = val + math.log(ps[i] / (ts[i + 1] - ts[i]))
            else:
                slope = -math.log(ps[i + 1] / ps[i]) / (lts[i + 1] - lts[i])
                lp = math.log(ps[i]) - slope * (val - lts[i])
                out[idx] = math.log(slope) + lp
        return out

    def atoms(self):
        return []

    def power_tail(self):
        if self._p[-1] == 0.0:
            return None
        beta = self._last_exponent
        lt = math.log(self._t[-1])
        return math.log(self._p[-1]) + beta * lt, beta, lt

    def log_m2_density_u(self, u):
        u = np.asarray(u, dtype=float)
        lt = math.log(self._t[-1])
        finite = np.isfinite(u)
        with np.errstate(invalid="ignore"):
            out = np.where(finite, 2.0 * u, 0.0) + self.log_abs_density_u(np.where(finite, u, lt))
        far = u >= lt
        if np.any(far):
            if self._p[-1] > 0:
                beta = self._last_exponent
                slope = 2.0 - beta
                with np.errstate(invalid="ignore"):
                    power = np.zeros_like(u[far]) if slope == 0.0 else slope * u[far]
                out[far] = math.log(beta) + math.log(self._p[-1]) + beta * lt + power
            else:
                out[far] = -np.inf
        return out

    def _integral_piece(self, f, a, b, rtol):
        return integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=200)[0]

    def H(self, t, rtol: float = 1e-10):
        t = _check_t(t)
        if t <= self._t[0]:
            # only the atom at zero lies below the first point
            return 0.0
        pt = self._tail_quiet(t)
        total = 0.0
        for a, b in self._pieces(float(self._t[0]), t):
            total += self._integral_piece(
                lambda v: 2.0 * math.exp(2.0 * v) * (self._tail_quiet(math.exp(v)) - pt),
                math.log(a), math.log(b), rtol)
        # the flat part below the first point contributes t0^2 (p0 - pt)
        return total + float(self._t[0]) ** 2 * (float(self._p[0]) - pt)

    def H_quadrature(self, t, rtol: float = 1e-10):
        return self.H(t, rtol)

    def mean_abs(self):
        if self._p[-1] > 0 and self._last_exponent <= 1.0:
            raise InfiniteMeanError("extrapolated tail exponent <= 1 gives infinite mean")
        return self.M(0.0)

    def M(self, t, rtol: float = 1e-10):
        t = _check_t(t)
        if self._p[-1] > 0 and self._last_exponent <= 1.0:
            raise InfiniteMeanError("extrapolated tail exponent <= 1 gives infinite mean")
        total = t * self._tail_quiet(t)
        lo = t
        if t < self._t[0]:
            total += (self._t[0] - t) * self._p[0]
            lo = float(self._t[0])
        last = float(self._t[-1])
        if lo < last:
            for a, b in self._pieces(lo, last):
                total += self._integral_piece(
                    lambda v: math.exp(v) * self._tail_quiet(math.exp(v)),
                    math.log(a), math.log(b), rtol)
        if self._p[-1] > 0:
            start = max(lo, last)
            total += start * self._tail_quiet(start) / (self._last_exponent - 1.0)
        return float(total)

    def M_quadrature(self, t, rtol: float = 1e-10):
        return self.M(t, rtol)

    def second_moment(self):
        if self._p[-1] == 0.0:
            return self.H(float(self._t[-1]))
        beta = self._last_exponent
        if beta <= 2.0:
            return DIVERGENT
        last = float(self._t[-1])
        # int_T^inf 2 s P(|X|>s) ds for the power tail, less nothing: H(inf)
        return self.H(last) + last**2 * self._p[-1] * beta / (beta - 2.0)

    def sample(self, rng, count):
        u = 1.0 - rng.random(count)  # P(|X| > x) = u
        sign = 2.0 * rng.integers(0, 2, size=count) - 1.0
        return sign * self._inverse_tail(u)

    def _inverse_tail(self, u: np.ndarray) -> np.ndarray:
        ts, ps = self._t, self._p
        out = np.zeros(u.shape)
        for idx, val in np.ndenumerate(u):
            if val > ps[0]:
                continue  # atom at zero
            if ps[-1] > 0 and val <= ps[-1]:
                out[idx] = ts[-1] * (ps[-1] / val) ** (1.0 / self._last_exponent)
                continue
            # ps is decreasing: find i with ps[i] >= val > ps[i+1]
            i = int(np.searchsorted(-ps, -val, side="right")) - 1
            i = min(i, len(ps) - 2)
            t0, t1, p0, p1 = ts[i], ts[i + 1], ps[i], ps[i + 1]
            if p1 == 0.0:
                out[idx] = t1 - val * (t1 - t0) / p0
            else:
                w = math.log(val / p0) / math.log(p1 / p0)
                out[idx] = t0 * (t1 / t0) ** w
        return out


@dataclass(frozen=True)
class MomentCache:
    """H and M tabulated on the geometric grid ``t0 * ratio**k``."""

    t: np.ndarray
    H: np.ndarray
    M: np.ndarray
    rtol: float

    @classmethod
    def build(cls, dist: DistributionSpec, t0: float, ratio: float, count: int,
              rtol: float = 1e-10) -> "MomentCache":
        grid = t0 * ratio ** np.arange(count)
        hv = np.array([dist.H(x) for x in grid])
        mv = np.array([dist.M(x) for x in grid])
        return cls(grid, hv, mv, rtol)

    def check(self) -> bool:
        tol = 1e-12 * np.maximum(1.0, np.abs(self.H))
        return bool(np.all(np.diff(self.H) >= -tol[1:])
                    and np.all(np.diff(self.M) <= 1e-12 * np.maximum(1.0, self.M[:-1]))
                    and np.all(self.H + self.t * self.M > 0))
