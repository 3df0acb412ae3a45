from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from heavytraffic.errors import DomainError
from heavytraffic.harness import (
    EmpiricalDistribution,
    gaussian_htip_family,
    htip_condition_check,
    ks_distance,
    ks_two_sample,
    pruitt_check,
    rw_levy_equivalence,
    truncated_variance_htip_family,
    sweep_heavy_traffic,
)
from heavytraffic.models import HeavyTrafficFamily, LevyModel, ParetoJumps
from heavytraffic.rng import stream

from conftest import exp_cdf


# ---------------------------------------------------------------- KS distance


def test_ks_one_point():
    assert ks_distance([0.5], lambda x: np.clip(x, 0, 1)) == 0.5


def test_ks_quantile_midpoints():
    n = 1000
    mid = stats.expon.ppf((np.arange(n) + 0.5) / n)
    assert ks_distance(mid, stats.expon.cdf) <= 1 / n


def test_ks_wrong_law():
    x = stream(1).standard_exponential(100_000)
    d = ks_distance(x, exp_cdf(2.0))
    assert d > 0.15
    assert d == pytest.approx(0.25, abs=0.01)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 400), seed=st.integers(0, 2**32))
def test_ks_matches_scipy(n, seed):
    x = np.random.default_rng(seed).normal(size=n)
    assert ks_distance(x, stats.norm.cdf) == pytest.approx(stats.kstest(x, stats.norm.cdf).statistic, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 300), m=st.integers(1, 300), seed=st.integers(0, 2**32))
def test_two_sample_matches_scipy(n, m, seed):
    rng = np.random.default_rng(seed)
    # rounding produces ties
    x, y = np.round(rng.normal(size=n), 1), np.round(rng.normal(0.2, size=m), 1)
    assert ks_two_sample(x, y) == pytest.approx(stats.ks_2samp(x, y).statistic, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=200))
def test_ecdf_is_a_cdf(values):
    e = EmpiricalDistribution(values)
    assert e.count == len(values)
    assert np.all(np.diff(e.samples) >= 0)
    grid = np.concatenate(([-2e6], np.sort(values), [2e6]))
    f = e.ecdf(grid)
    assert f[0] == 0 and f[-1] == 1 and np.all(np.diff(f) >= 0)
    # right-continuity: the value at a sample point includes it
    assert np.all(e.ecdf(e.samples) >= (np.arange(e.count) + 1) / e.count)


def test_empty_distribution():
    with pytest.raises(DomainError):
        EmpiricalDistribution([])


# ---------------------------------------------------------------- sweeps


def test_sweep_mm1_decreases(mm1):
    rep = sweep_heavy_traffic(HeavyTrafficFamily(mm1), [0.9, 0.99], 20_000, seed=1)
    ks = rep.ks_values()
    assert ks[1] < ks[0]
    assert rep.metadata["limit"] == {"kind": "ml", "alpha": 1.0, "scale": 1.0}


def test_sweep_pareto_monotone(pareto15):
    rep = sweep_heavy_traffic(HeavyTrafficFamily(pareto15), [0.9, 0.99, 0.999], 20_000, seed=2)
    ks = rep.ks_values()
    assert ks[0] > ks[1] > ks[2]
    assert all(abs(r.extras["residual"]) <= 1e-10 for r in rep.rows)
    assert all(0 <= k <= 1 for k in ks)


def test_sweep_empty(pareto15):
    rep = sweep_heavy_traffic(HeavyTrafficFamily(pareto15), [], 1000, seed=3)
    assert rep.rows == []
    assert rep.metadata["seed"] == 3 and rep.metadata["model"]["lambda"] == 1.0
    assert rep.to_csv() == "param,delta,n,ks,drift,seconds\n"


def test_sweep_failed_row_is_recorded(mm1):
    rep = sweep_heavy_traffic(HeavyTrafficFamily(mm1), [0.5, 0.9], 2000, seed=4)
    assert rep.rows[0].status == "failed" and "BracketFailure" in rep.rows[0].error
    assert rep.rows[1].status == "ok"


def test_sweep_gaussian_grid(brownian):
    rep = sweep_heavy_traffic(HeavyTrafficFamily(brownian), [0.1], 5000, seed=5, c_horizon=16)
    row = rep.rows[0]
    assert row.extras["method"] == "grid" and row.extras["step"] == 1.0
    assert row.delta == pytest.approx(0.1, rel=1e-9)
    assert 0 <= row.drift < 0.01


def test_report_bytes_identical_across_workers(pareto15):
    fam = HeavyTrafficFamily(pareto15)
    r1 = sweep_heavy_traffic(fam, [0.9, 0.99], 20_000, seed=6, workers=1)
    r2 = sweep_heavy_traffic(fam, [0.9, 0.99], 20_000, seed=6, workers=2)
    assert r1.to_json() == r2.to_json()
    assert r1.to_csv() == r2.to_csv()
    assert r1.to_csv().splitlines()[0] == "param,delta,n,ks,drift,seconds"


# ---------------------------------------------------------------- walk versus path


def test_equivalence_mm1(mm1):
    rep = rw_levy_equivalence(mm1, [1 / 0.9, 1 / 0.99], 20_000, seed=7, dominance_paths=500)
    ks = rep.ks_values()
    assert ks[1] < ks[0]
    assert all(r.extras["dominance_violations"] == 0 for r in rep.rows)
    assert rep.rows[1].extras["ks_sup"] < rep.rows[0].extras["ks_sup"]
    assert rep.rows[1].extras["ks_walk"] < rep.rows[0].extras["ks_walk"]


@pytest.mark.slow
def test_equivalence_gaussian(brownian):
    rep = rw_levy_equivalence(brownian, [0.1, 0.01], 100_000, seed=8)
    low = rep.rows[1]
    assert low.delta == pytest.approx(0.01, rel=1e-9)
    assert low.extras["ks_walk"] < 0.03 and low.extras["ks_sup"] < 0.03


def test_equivalence_two_sample_shrinks_with_size(mm1):
    a = 1 / 0.99
    small = rw_levy_equivalence(mm1, [a], 5000, seed=9).rows[0].ks
    big = rw_levy_equivalence(mm1, [a], 50_000, seed=10).rows[0].ks
    assert big <= small + 2 * 1.36 * math.sqrt(2 / 5000)


# ---------------------------------------------------------------- Pruitt bound


def test_pruitt_flags_rare_cells(pareto15):
    tab = pruitt_check(pareto15.centered(), [1.0], [4.0, 1e9], 20_000, seed=11)
    rare = tab.cells[1]
    assert rare["hits"] == 0 and rare["ratio"] == 0.0 and rare["flagged"] and rare["flag"] == "InsufficientHits"
    assert not tab.cells[0]["flagged"]
    assert tab.max_ratio == tab.cells[0]["ratio"]


def test_pruitt_cell_stable_under_doubling(pareto15):
    c = pareto15.centered()
    r1 = pruitt_check(c, [1.0], [8.0], 1_000_000, seed=12).cells[0]["ratio"]
    r2 = pruitt_check(c, [1.0], [8.0], 2_000_000, seed=13).cells[0]["ratio"]
    assert 0.01 <= r1 <= 10
    assert r2 == pytest.approx(r1, rel=0.05)


def test_pruitt_doubling_t(pareto15):
    c = pareto15.centered()
    m1 = pruitt_check(c, [2.0], [4.0, 8.0, 16.0], 200_000, seed=14).max_ratio
    m2 = pruitt_check(c, [4.0], [4.0, 8.0, 16.0], 200_000, seed=14).max_ratio
    assert m2 <= 2 * m1


def test_pruitt_requires_centred(pareto15):
    with pytest.raises(DomainError):
        pruitt_check(pareto15, [1.0], [4.0], 100, seed=0)


# ---------------------------------------------------------------- condition (I)


def test_htip_gaussian_exact():
    tab = htip_condition_check(*gaussian_htip_family(), [1e-1, 1e-2, 1e-3, 1e-4])
    assert [r["product"] for r in tab.rows] == [1.0, 1.0, 1.0, 1.0]
    assert tab.beta_hat == 1.0 and tab.drift == 0.0


@settings(max_examples=50, deadline=None)
@given(a=st.floats(1e-6, 10))
def test_htip_gaussian_product_to_rounding(a):
    tab = htip_condition_check(*gaussian_htip_family(), [a])
    assert abs(tab.rows[0]["product"] - 1.0) <= 4 * 2.0**-52


def test_htip_truncated_variance(pareto15):
    tab = htip_condition_check(*truncated_variance_htip_family(pareto15.centered()), [1e-1, 1e-2, 1e-3])
    assert tab.drift < 0.02
    assert tab.beta_hat == pytest.approx(1.0, rel=1e-9)


def test_htip_empty():
    tab = htip_condition_check(*gaussian_htip_family(), [])
    assert tab.rows == [] and tab.beta_hat is None and tab.drift is None
