"""Monte Carlo partial sums ``S_n / a_n`` on a geometric checkpoint schedule.

Every path draws from its own Philox streams, one per block of draws, keyed
by ``(seed, path, block)``; so results do not depend on how paths are spread
over threads. Draws are streamed block by block and never kept.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .alpha0 import NormSeqSpec
from .distmodel import DistributionSpec
from .klass import KlassEval
from .normalizer import Normalizer

N_MAX_LIMIT = 10**10
BLOCK = 1 << 20


def checkpoints(n_max: int, first: int = 1000, ratio: float = 1.2) -> np.ndarray:
    """``round(first * ratio^k)`` up to ``n_max``, deduplicated, ending at ``n_max``."""
    if n_max < first:
        raise ValueError(f"n_max = {n_max} is below the first checkpoint {first}")
    if not ratio > 1:
        raise ValueError("checkpoint ratio must exceed 1")
    k = int(math.floor(math.log(n_max / first) / math.log(ratio))) + 1
    pts = np.unique(np.rint(first * ratio ** np.arange(k)).astype(np.int64))
    pts = pts[pts <= n_max]
    if pts[-1] != n_max:
        pts = np.append(pts, np.int64(n_max))
    return pts


def _as_sequence(normalizer, dist) -> NormSeqSpec:
    if isinstance(normalizer, NormSeqSpec):
        return normalizer
    if isinstance(normalizer, Normalizer):
        return NormSeqSpec.psi(normalizer)
    if normalizer == "gamma":
        return NormSeqSpec.gamma(dist, KlassEval(dist))
    raise ValueError(f"invalid normalizer {normalizer!r}")


@dataclass(frozen=True)
class SimConfig:
    dist: DistributionSpec
    normalizer: object  # Normalizer, NormSeqSpec or "gamma"
    n_max: int
    paths: int = 16
    seed: int = 42
    ratio: float = 1.2
    first: int = 1000
    summation: str = "compensated"  # or "plain"
    threads: int | None = None  # default: LIL_THREADS or 1

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max > N_MAX_LIMIT:
            raise ValueError(f"n_max must be an integer <= {N_MAX_LIMIT}")
        if self.n_max < self.first:
            raise ValueError(f"n_max = {self.n_max} is below the first checkpoint {self.first}")
        if int(self.paths) != self.paths or self.paths < 1:
            raise ValueError("paths must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.summation not in ("plain", "compensated"):
            raise ValueError("summation must be 'plain' or 'compensated'")

    def worker_count(self) -> int:
        if self.threads is not None:
            return max(1, int(self.threads))
        return max(1, int(os.environ.get("LIL_THREADS", "1")))

    def describe(self) -> dict:
        seq = _as_sequence(self.normalizer, self.dist) if self.normalizer != "gamma" else None
        return {
            "dist": self.dist.describe(),
            "normalizer": seq.describe() if seq is not None else {"source": "gamma"},
            "n_max": int(self.n_max), "paths": int(self.paths), "seed": int(self.seed),
            "ratio": self.ratio, "first": self.first, "summation": self.summation,
        }


def _stream(seed: int, path: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(path, block))
    return np.random.Generator(np.random.Philox(ss))


def simulate_path(dist: DistributionSpec, cps: np.ndarray, seed: int, path: int,
                  summation: str = "compensated", block: int = BLOCK) -> np.ndarray:
    """``S_n`` at each checkpoint of one path."""
    out = np.empty(len(cps))
    total, comp = 0.0, 0.0  # Neumaier running sum
    start = 0  # draws consumed so far
    k = 0
    n_max = int(cps[-1])
    b = 0
    while start < n_max:
        count = min(block, n_max - start)
        x = np.asarray(dist.sample(_stream(seed, path, b), count), dtype=float)
        end = start + count
        stop = int(np.searchsorted(cps, end, side="right"))
        if summation == "plain":
            run = np.cumsum(x)
            for i in range(k, stop):
                out[i] = total + run[int(cps[i]) - start - 1]
            total = total + run[-1]
        else:
            lo = 0
            for i in range(k, stop):
                hi = int(cps[i]) - start
                total, comp = _neumaier(total, comp, float(np.sum(x[lo:hi])))
                out[i] = total + comp
                lo = hi
            total, comp = _neumaier(total, comp, float(np.sum(x[lo:])))
        k = stop
        start = end
        b += 1
        if not math.isfinite(total):
            raise OverflowError(f"S_n overflowed on path {path} before n = {end}")
    return out


def _neumaier(total: float, comp: float, x: float) -> tuple[float, float]:
    t = total + x
    if abs(total) >= abs(x):
        comp += (total - t) + x
    else:
        comp += (x - t) + total
    return t, comp


@dataclass(frozen=True)
class Histogram:
    lo: np.ndarray
    hi: np.ndarray
    mass: np.ndarray
    symmetry: float  # total variation between histogram and its mirror image
    occupancy: float  # fraction of bins in [-m, m] that were hit
    m: float
    samples: int

    def rows(self) -> list[tuple[float, float, float]]:
        return [(float(a), float(b), float(c)) for a, b, c in zip(self.lo, self.hi, self.mass)]


@dataclass(frozen=True)
class SimResult:
    config: SimConfig = field(repr=False)
    checkpoints: np.ndarray
    sums: np.ndarray  # (paths, checkpoints)
    a: np.ndarray  # unscaled a_n at each checkpoint
    factors: tuple = ()  # scale factors, applied to S_n/a_n one after another

    @property
    def ratios(self) -> np.ndarray:
        r = self.sums / self.a[None, :]
        for f in self.factors:
            r = r / f  # so a scaled normaliser divides every ratio by exactly f
        return r

    @property
    def running_max(self) -> np.ndarray:
        """Running max of ``|S_n|/a_n`` over checkpoints, per path."""
        return np.maximum.accumulate(np.abs(self.ratios), axis=1)

    @property
    def path_max(self) -> np.ndarray:
        return self.running_max[:, -1]

    @property
    def pooled_max(self) -> float:
        return float(np.max(self.path_max))

    @property
    def seed(self) -> int:
        return int(self.config.seed)

    def rows(self) -> list[tuple[int, int, float, float]]:
        r, m = self.ratios, self.running_max
        return [(p, int(n), float(r[p, k]), float(m[p, k]))
                for p in range(r.shape[0]) for k, n in enumerate(self.checkpoints)]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["# seed", self.seed])
            w.writerow(["path", "n", "S_over_a", "running_max"])
            for row in self.rows():
                w.writerow([row[0], row[1], repr(row[2]), repr(row[3])])


def run_sim(cfg: SimConfig) -> SimResult:
    cps = checkpoints(int(cfg.n_max), cfg.first, cfg.ratio)
    seq = _as_sequence(cfg.normalizer, cfg.dist)
    factors = []
    while seq.source == "scaled":
        factors.insert(0, seq.factor)
        seq = seq.base
    a = seq.values(np.log(cps.astype(float)))
    if not np.all(np.isfinite(a) & (a > 0)):
        raise ValueError("normalizer is not positive and finite at every checkpoint")

    def one(p):
        return simulate_path(cfg.dist, cps, int(cfg.seed), p, cfg.summation)

    workers = min(cfg.worker_count(), int(cfg.paths))
    if workers == 1:
        sums = [one(p) for p in range(cfg.paths)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sums = list(pool.map(one, range(cfg.paths)))  # ordered by path index
    return SimResult(cfg, cps, np.vstack(sums), a, tuple(factors))


def cluster_histogram(res: SimResult, bins: int = 20, burn_in: int = 0) -> Histogram:
    """Histogram of post-burn-in checkpoint values, pooled over paths, on
    ``bins`` equal bins of ``[-m, m]`` with ``m`` the largest ``|value|``."""
    if not 0 <= burn_in < len(res.checkpoints):
        raise ValueError("burn_in must be below the number of checkpoints")
    vals = res.ratios[:, burn_in:].ravel()
    if vals.size == 0:
        raise ValueError("no samples after burn-in")
    m = float(np.max(np.abs(vals)))
    if m == 0.0:
        return Histogram(np.zeros(1), np.zeros(1), np.ones(1), 0.0, 1.0, 0.0, vals.size)
    edges = np.linspace(-m, m, bins + 1)
    counts, _ = np.histogram(vals, bins=edges)
    mass = counts / counts.sum()
    symmetry = 0.5 * float(np.sum(np.abs(mass - mass[::-1])))
    occupancy = float(np.mean(counts > 0))
    return Histogram(edges[:-1], edges[1:], mass, symmetry, occupancy, m, vals.size)


def write_histogram_csv(hist: Histogram, path, seed: int) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["# seed", seed])
        w.writerow(["bin_lo", "bin_hi", "mass"])
        for a, b, c in hist.rows():
            w.writerow([repr(a), repr(b), repr(c)])


__all__ = ["SimConfig", "SimResult", "Histogram", "checkpoints", "run_sim", "simulate_path",
           "cluster_histogram", "write_histogram_csv", "N_MAX_LIMIT"]
