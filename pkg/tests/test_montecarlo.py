import math

import numpy as np
import pytest
from scipy import stats

from gridcell import kernels
from gridcell.errors import BudgetExceeded, DomainError, NoActiveBS
from gridcell.geometry import CoverageInputs, rho_min, success_probability
from gridcell.montecarlo import (
    NetworkRealization,
    SchemeResult,
    associate,
    band_count,
    build_realization,
    cluster_active,
    compare_schemes,
    empirical_success_probability,
    nearest_active_distances,
    prediction_interval,
    sample_ppp,
    scheme_cluster,
    scheme_no_coordination,
    sinr_at_mt,
)


def rng(seed=0):
    return np.random.default_rng(seed)


def test_sample_ppp_empty():
    assert sample_ppp(0.0, 100.0, rng()).shape == (0, 2)
    with pytest.raises(DomainError):
        sample_ppp(-1.0, 100.0, rng())


def test_sample_ppp_count_moments():
    r = rng(1)
    counts = np.array([sample_ppp(5e-3, 100.0, r).shape[0] for _ in range(10000)])
    assert counts.mean() == pytest.approx(50.0, rel=0.02)
    assert counts.var() / counts.mean() == pytest.approx(1.0, abs=0.05)


def test_sample_ppp_uniform():
    pts = sample_ppp(1e-2, 100.0, rng(2))
    assert np.all((pts >= 0) & (pts <= 100))
    assert stats.kstest(pts[:, 0] / 100, "uniform").pvalue > 1e-3


def test_band_count(cfg):
    assert band_count(cfg, 1.0, 5.55e-3) == 10
    assert band_count(cfg, 0.01, 8e-3) == 1
    assert band_count(cfg, 0.5, 0.0) == 1


def test_full_activity(cfg):
    real = build_realization(cfg, 1.0, 1e-3, rng(3), window=500.0)
    assert real.bs_active.all()
    assert np.all(real.bs_band >= 1)


def test_thinning_fraction(cfg):
    r = rng(4)
    act = tot = 0
    for _ in range(40):
        real = build_realization(cfg, 0.3, 1e-4, r)
        act += int(real.bs_active.sum())
        tot += real.bs_active.size
    assert act / tot == pytest.approx(0.3, abs=0.01)


def test_bands_only_on_active(cfg):
    real = build_realization(cfg, 0.4, 2e-3, rng(5))
    assert np.all(real.bs_band[~real.bs_active] == 0)
    assert np.all((real.bs_band[real.bs_active] >= 1) & (real.bs_band[real.bs_active] <= real.n_bands))


def test_association_brute_force(cfg):
    real = build_realization(cfg, 0.5, 2e-3, rng(6), window=300.0)
    act = real.active_index
    for i in range(real.mt_points.shape[0]):
        d = np.abs(real.bs_points[act] - real.mt_points[i])
        d = np.minimum(d, 300.0 - d)
        assert act[np.argmin((d**2).sum(1))] == real.association[i]


def test_no_active_bs(cfg):
    r = rng(7)
    with pytest.raises(NoActiveBS):
        build_realization(cfg.replace(lambda_B=1e-7), 0.01, 1e-4, r, window=100.0, resample=False)
    with pytest.raises(NoActiveBS):
        associate(np.zeros((1, 2)), np.zeros((1, 2)), np.array([False]), 10.0)


def test_nearest_distance_distribution(cfg):
    rho = 0.4
    r = rng(8)
    d = np.concatenate([nearest_active_distances(build_realization(cfg, rho, 2e-4, r)) for _ in range(5)])
    lam = cfg.lambda_B * rho
    cdf = lambda x: 1 - np.exp(-lam * math.pi * x**2)
    assert stats.kstest(d, cdf).pvalue > 1e-3


def test_sinr_noise_limit(cfg):
    c = cfg.replace(sigma2=1e-30)
    bs = np.array([[0.0, 0.0], [50.0, 50.0]])
    mts = np.array([[3.0, 4.0]])
    real = NetworkRealization(1000.0, bs, mts, np.array([True, True]), np.array([1, 2]), np.array([0]), 2)
    r1, r2 = rng(9), rng(9)
    s = sinr_at_mt(real, 0, c, r1)
    h = r2.exponential(1.0, size=(1, 2))[0, 0]
    assert s == pytest.approx(20 * 5.0**-4 * h / 1e-30, rel=1e-12)


def test_sinr_scale_invariant_in_power(cfg):
    c = cfg.replace(sigma2=1e-30)
    real = build_realization(c, 1.0, 5.55e-3, rng(10), window=400.0)
    a = sinr_at_mt(real, 0, c, rng(11))
    b = sinr_at_mt(real, 0, c.replace(P_B=40.0), rng(11))
    assert a == pytest.approx(b, rel=1e-9)
    with pytest.raises(DomainError):
        sinr_at_mt(real, -1, c, rng(11))


def test_empirical_success_matches_analytic(cfg):
    lam = 5.55e-3
    est = empirical_success_probability(cfg, 0.6, lam, 60, seed=3)
    p = success_probability(cfg, CoverageInputs(0.6, lam))
    lo, hi = prediction_interval(p, est.links)
    assert lo <= est.fraction <= hi
    clo, chi = est.ci
    assert clo <= est.fraction <= chi


def test_empirical_success_tiny_at_huge_threshold(cfg):
    c = cfg.replace(beta=1e6)
    # few MTs per realization: at this threshold links sharing a geometry are strongly correlated
    est = empirical_success_probability(c, 1.0, 1e-3, 300, seed=9, mts_per_realization=20)
    p = success_probability(c, CoverageInputs(1.0, 1e-3))
    assert p < 0.1
    lo, hi = prediction_interval(p, est.links)
    assert lo <= est.fraction <= hi
    # a threshold beyond any realistic link budget leaves almost nothing
    assert empirical_success_probability(cfg.replace(beta=1e15), 1.0, 1e-3, 5, seed=1).fraction < 0.01


def test_empirical_success_at_rho_min(cfg):
    lam = 8e-4
    est = empirical_success_probability(cfg, rho_min(cfg, lam), lam, 100, seed=5)
    lo, hi = prediction_interval(0.95, est.links)
    assert lo <= est.fraction <= hi


def make_real(bs, mts, window=1000.0):
    full = np.ones(len(bs), bool)
    bs = np.asarray(bs, float)
    mts = np.asarray(mts, float).reshape(-1, 2)
    assoc, _ = associate(mts, bs, full, window)
    return NetworkRealization(window, bs, mts, full, np.ones(len(bs), np.int64), assoc)


def test_no_coordination_zero_mts(cfg):
    real = make_real([[0, 0], [500, 500]], np.empty((0, 2)))
    res = scheme_no_coordination(real, cfg)
    assert res.total_cost == pytest.approx(2 * cfg.P_s / 1e6)


def test_no_coordination_all_occupied(cfg):
    real = make_real([[0, 0], [500, 500]], [[1, 1], [499, 499], [501, 500]])
    res = scheme_no_coordination(real, cfg)
    assert res.total_cost == pytest.approx((2 * cfg.P_a + cfg.P_B / cfg.mu * 3) / 1e6)


def test_cluster_pair_lighter_sleeps(cfg):
    bs = [[100, 100], [150, 100], [600, 600]]
    mts = [[90, 100]] * 3 + [[160, 100]] * 5
    real = make_real(bs, mts)
    loads = np.bincount(real.association, minlength=3)
    assert loads.tolist() == [3, 5, 0]
    active, new = cluster_active(real, loads, 100.0)
    assert active.tolist() == [False, True, False]
    assert new.tolist() == [0, 8, 0]


def test_cluster_tie_lower_index_sleeps(cfg):
    real = make_real([[100, 100], [150, 100]], [[90, 100], [160, 100]])
    active, new = cluster_active(real, np.array([1, 1]), 100.0)
    assert active.tolist() == [False, True] and new.tolist() == [0, 2]


def test_cluster_small_radius_equals_no_coordination(cfg):
    real = build_realization(cfg, 1.0, 1e-3, rng(12))
    assert scheme_cluster(real, cfg, 1e-3).total_cost == scheme_no_coordination(real, cfg).total_cost
    with pytest.raises(DomainError):
        scheme_cluster(real, cfg, 0.0)


def test_scheme_result_validation():
    with pytest.raises(Exception):
        SchemeResult("other", 1.0)
    with pytest.raises(Exception):
        SchemeResult("proposed", 1.0, empirical_p_suc=1.5)


def test_compare_schemes_small(cfg, profiles):
    a = compare_schemes(cfg, profiles, 3, 8, seed=1, start=7)
    b = compare_schemes(cfg, profiles, 3, 8, seed=1, start=7, workers=2)
    for s in a:
        assert a[s].total_cost == b[s].total_cost
    assert a["proposed"].total_cost <= a["cluster"].total_cost <= a["no_coordination"].total_cost
    assert 0.8 < a["proposed"].empirical_p_suc <= 1.0


def test_compare_schemes_single_realization_deterministic(cfg, profiles):
    a = compare_schemes(cfg, profiles, 3, 1, seed=4, start=7)
    b = compare_schemes(cfg, profiles, 3, 1, seed=4, start=7)
    assert {k: v.total_cost for k, v in a.items()} == {k: v.total_cost for k, v in b.items()}


def test_compare_schemes_budget(cfg, profiles):
    with pytest.raises(BudgetExceeded):
        compare_schemes(cfg, profiles, 3, 100, budget=10)


def test_kernel_backends_agree_on_realization(cfg):
    real = build_realization(cfg, 0.5, 2e-3, rng(13))
    act = real.active_index
    a, _ = kernels.np_torus_nearest(real.mt_points, real.bs_points[act], real.window)
    np.testing.assert_array_equal(act[a], real.association)
