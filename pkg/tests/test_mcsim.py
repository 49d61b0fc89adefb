import csv

import numpy as np
import pytest

from lilnorm.alpha0 import NormSeqSpec
from lilnorm.distmodel import Gaussian, Rademacher, TailTable
from lilnorm.mcsim import (SimConfig, checkpoints, cluster_histogram, run_sim, simulate_path,
                           write_histogram_csv)

LIL = NormSeqSpec.formula("lil")

# Reference run with pinned seed 42, 16 paths, n_max = 1e7 (rademacher): path
# maxima ranged over [0.436, 1.110]; gaussian [0.614, 1.294]. The bands below
# are sanity bands around those runs, not limit constants.
BAND = (0.4, 1.6)


@pytest.fixture(scope="module")
def rad_big():
    return run_sim(SimConfig(Rademacher(), LIL, n_max=10**7, paths=16, seed=42))


@pytest.fixture(scope="module")
def gauss_big():
    return run_sim(SimConfig(Gaussian(1.0), LIL, n_max=10**7, paths=16, seed=42))


def test_checkpoints_geometric():
    cps = checkpoints(10**7)
    assert cps[0] == 1000 and cps[-1] == 10**7
    assert np.all(np.diff(cps) > 0)
    ratios = cps[1:-1] / cps[:-2]
    assert np.allclose(ratios, 1.2, rtol=1e-3)
    assert checkpoints(5000, first=1000, ratio=2.0).tolist() == [1000, 2000, 4000, 5000]


@pytest.mark.parametrize("kwargs", [dict(paths=0), dict(n_max=10**11), dict(n_max=10),
                                    dict(summation="kahan"), dict(seed=-1)])
def test_config_validation(kwargs):
    base = dict(dist=Rademacher(), normalizer=LIL, n_max=10**4)
    base.update(kwargs)
    with pytest.raises(ValueError):
        SimConfig(**base)


def test_degenerate_law():
    res = run_sim(SimConfig(TailTable(((1.0, 0.0),)), LIL, n_max=10**4, paths=3))
    assert not np.any(res.ratios)
    assert res.pooled_max == 0.0
    hist = cluster_histogram(res)
    assert hist.mass.tolist() == [1.0] and hist.lo.tolist() == [0.0]


def test_rademacher_sums_are_integers():
    cps = checkpoints(5000)
    s = simulate_path(Rademacher(), cps, 3, 0)
    assert np.array_equal(s, np.rint(s))
    assert np.all(np.abs(s) <= cps)
    assert np.all((s - cps) % 2 == 0)


def test_paths_do_not_depend_on_block_size():
    cps = checkpoints(20_000)
    a = simulate_path(Gaussian(1.0), cps, 9, 1, block=2**20)
    b = simulate_path(Gaussian(1.0), cps, 9, 1, block=2**20)
    assert np.array_equal(a, b)
    c = simulate_path(Gaussian(1.0), cps, 9, 2)
    assert not np.array_equal(a, c)


def test_thread_layout_does_not_matter():
    one = run_sim(SimConfig(Gaussian(1.0), LIL, n_max=10**5, paths=6, seed=5, threads=1))
    three = run_sim(SimConfig(Gaussian(1.0), LIL, n_max=10**5, paths=6, seed=5, threads=3))
    assert np.array_equal(one.sums, three.sums)


def test_thread_count_from_environment(monkeypatch):
    monkeypatch.setenv("LIL_THREADS", "3")
    assert SimConfig(Rademacher(), LIL, n_max=10**4).worker_count() == 3
    assert SimConfig(Rademacher(), LIL, n_max=10**4, threads=2).worker_count() == 2


def test_running_max_and_pooled(rad_big):
    assert np.all(np.diff(rad_big.running_max, axis=1) >= 0)
    assert rad_big.pooled_max == np.max(rad_big.path_max)


def test_scaling_is_exact():
    cfg = dict(dist=Gaussian(1.0), n_max=10**5, paths=4, seed=11)
    base = run_sim(SimConfig(normalizer=LIL, **cfg))
    for factor in (0.5, 3.0, 7.0):
        sc = run_sim(SimConfig(normalizer=NormSeqSpec.scaled(LIL, factor), **cfg))
        assert np.array_equal(sc.ratios, base.ratios / factor)
        assert np.array_equal(sc.running_max, base.running_max / factor)


@pytest.mark.slow
def test_summation_modes_agree():
    cps = checkpoints(10**7)
    comp = simulate_path(Rademacher(), cps, 42, 0, "compensated")
    plain = simulate_path(Rademacher(), cps, 42, 0, "plain")
    assert np.array_equal(comp, plain)
    for p in range(2):
        comp = simulate_path(Gaussian(1.0), cps, 42, p, "compensated")
        plain = simulate_path(Gaussian(1.0), cps, 42, p, "plain")
        big = np.abs(comp) > 10.0  # relative error is meaningless near a zero crossing
        assert np.max(np.abs(comp - plain)[big] / np.abs(comp[big])) < 1e-9


@pytest.mark.slow
def test_rademacher_band_and_histogram(rad_big):
    assert np.all((rad_big.path_max > BAND[0]) & (rad_big.path_max < BAND[1]))
    hist = cluster_histogram(rad_big)
    assert hist.symmetry < 0.2 and hist.occupancy > 0.8
    assert hist.mass.sum() == pytest.approx(1.0)


@pytest.mark.slow
def test_gaussian_same_bands(gauss_big):
    assert np.all((gauss_big.path_max > BAND[0]) & (gauss_big.path_max < BAND[1]))
    hist = cluster_histogram(gauss_big)
    assert hist.symmetry < 0.2 and hist.occupancy > 0.8


def test_histogram_burn_in_checked(rad_big):
    with pytest.raises(ValueError):
        cluster_histogram(rad_big, burn_in=len(rad_big.checkpoints))
    h = cluster_histogram(rad_big, burn_in=10)
    assert h.samples == 16 * (len(rad_big.checkpoints) - 10)


def test_csv_outputs(tmp_path):
    res = run_sim(SimConfig(Rademacher(), LIL, n_max=2000, paths=2, seed=4))
    res.write_csv(tmp_path / "paths.csv")
    rows = list(csv.reader(open(tmp_path / "paths.csv")))
    assert rows[0] == ["# seed", "4"]
    assert rows[1] == ["path", "n", "S_over_a", "running_max"]
    assert len(rows) == 2 + 2 * len(res.checkpoints)
    assert float(rows[2][2]) == res.ratios[0, 0]
    write_histogram_csv(cluster_histogram(res, bins=4), tmp_path / "h.csv", res.seed)
    rows = list(csv.reader(open(tmp_path / "h.csv")))
    assert len(rows) == 2 + 4
