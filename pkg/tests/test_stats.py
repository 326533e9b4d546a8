"""Statistics tests; scipy appears here only as an independent oracle."""

import math

import numpy as np
import pytest
from scipy import special
from scipy import stats as scipy_stats

from kingman.lookdown import PointProcessSample
from kingman.rng import make_stream, sample_poisson_times
from kingman.stats import (
    Partition,
    RunningStats,
    fit_log_slope,
    gumbel_cdf,
    independence_check,
    kolmogorov_sf,
    ks_test,
    ks_test_two_sample,
    poisson_suite,
    quadratic_variation,
    qv_mesh_scan,
    sum_squared_lifelengths,
    variance_scaling,
)

EXP_CDF = lambda v: 1.0 - np.exp(-np.asarray(v))  # noqa: E731


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov
# ---------------------------------------------------------------------------

def test_kolmogorov_sf_against_scipy():
    for lam in (0.3, 0.5, 0.8, 1.0, 1.36, 2.0):
        assert kolmogorov_sf(lam) == pytest.approx(special.kolmogorov(lam), abs=1e-9)
    assert kolmogorov_sf(0.01) == 1.0
    assert kolmogorov_sf(-1.0) == 1.0
    assert kolmogorov_sf(10.0) == 0.0


def test_ks_one_sample_against_scipy():
    x = make_stream(61, 0).exponentials(1.0, 500)
    mine = ks_test(x, EXP_CDF)
    ref = scipy_stats.ks_1samp(x, scipy_stats.expon.cdf, method="asymp")
    assert mine.statistic == pytest.approx(ref.statistic, abs=1e-13)
    assert mine.p_value == pytest.approx(ref.pvalue, abs=1e-9)
    assert mine.n == 500


def test_ks_detects_wrong_distribution():
    x = make_stream(61, 1).exponentials(2.0, 400)
    assert ks_test(x, EXP_CDF).p_value < 1e-6
    good = make_stream(61, 2).exponentials(1.0, 400)
    assert ks_test(good, EXP_CDF).p_value > 1e-3


def test_ks_input_validation():
    with pytest.raises(ValueError):
        ks_test(np.arange(5), EXP_CDF)
    with pytest.raises(ValueError):
        ks_test(np.linspace(0, 1, 20), lambda v: np.asarray(v) * 2.0)
    with pytest.raises(ValueError):
        ks_test(np.linspace(0, 1, 20), lambda v: np.array([0.5]))


def test_ks_two_sample_against_scipy():
    a = make_stream(61, 3).exponentials(1.0, 400)
    b = make_stream(61, 4).exponentials(1.0, 600)
    mine = ks_test_two_sample(a, b)
    ref = scipy_stats.ks_2samp(a, b, method="asymp")
    assert mine.statistic == pytest.approx(ref.statistic, abs=1e-13)
    # scipy's asymptotic variant adds a finite-sample continuity correction;
    # the plain limit law should still land close.
    assert mine.p_value == pytest.approx(ref.pvalue, abs=0.05)
    c = make_stream(61, 5).exponentials(3.0, 600)
    assert ks_test_two_sample(a, c).p_value < 1e-6
    with pytest.raises(ValueError):
        ks_test_two_sample(a[:4], b)


def test_gumbel_cdf_values():
    assert gumbel_cdf(0.0) == pytest.approx(0.36787944117144233, abs=1e-15)
    assert gumbel_cdf(-math.log(math.log(2.0))) == pytest.approx(0.5, abs=1e-12)
    arr = gumbel_cdf(np.array([-1.0, 0.0, 1.0, 4.0]))
    assert arr.shape == (4,)
    assert np.all(np.diff(arr) > 0.0)


# ---------------------------------------------------------------------------
# partitions, quadratic variation
# ---------------------------------------------------------------------------

class _LinearPath:
    def __init__(self, slope):
        self.slope = slope

    def eval(self, t):
        return self.slope * np.asarray(t, dtype=np.float64)


def test_partition_constructors():
    p = Partition.uniform(0.0, 1.0, 4)
    assert p.n_cells == 4
    assert p.mesh == pytest.approx(0.25)
    assert np.array_equal(p.points, np.linspace(0, 1, 5))
    d = Partition.dyadic(2.0, 4.0, 3)
    assert d.n_cells == 8 and d.points[0] == 2.0 and d.points[-1] == 4.0
    r = Partition.random(0.0, 1.0, 10, make_stream(67, 0))
    assert r.n_cells == 10
    assert r.points[0] == 0.0 and r.points[-1] == 1.0
    assert np.all(np.diff(r.points) > 0.0)


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition(np.array([1.0]))
    with pytest.raises(ValueError):
        Partition(np.array([0.0, 0.0, 1.0]))
    with pytest.raises(ValueError):
        Partition.uniform(0.0, 1.0, 0)
    with pytest.raises(ValueError):
        Partition.dyadic(0.0, 1.0, -1)


def test_quadratic_variation_of_linear_path_vanishes_dyadically():
    path = _LinearPath(2.0)
    part = Partition.uniform(0.0, 1.0, 4)
    assert quadratic_variation(path, part) == pytest.approx(1.0)
    rows = qv_mesh_scan(path, (0.0, 1.0), [0, 1, 2, 5])
    for mesh, qv in rows:
        assert qv == pytest.approx(4.0 * mesh)
    assert rows[0][0] == 1.0 and rows[3][0] == pytest.approx(2.0**-5)
    with pytest.raises(ValueError):
        qv_mesh_scan(path, (1.0, 1.0), [0])


# ---------------------------------------------------------------------------
# life-length sums
# ---------------------------------------------------------------------------

def _fake_sample(level, lives, window=(0.0, 10.0)):
    lives = np.asarray(lives, dtype=np.float64)
    deaths = np.linspace(window[0] + 1.0, window[1], num=lives.size)
    return PointProcessSample(
        level=level,
        window=window,
        death_times=deaths,
        life_lengths=lives,
        burn_in=1.0,
        tol=1e-3,
        truncation_level=2001,
    )


def test_sum_squared_lifelengths_accumulates():
    samples = [
        _fake_sample(3, [2.0]),
        _fake_sample(2, [1.0, 1.0]),
        _fake_sample(4, []),
    ]
    levels, s = sum_squared_lifelengths(samples)
    assert levels.tolist() == [2, 3, 4]
    assert s.tolist() == [2.0, 6.0, 6.0]
    empty_levels, empty_s = sum_squared_lifelengths([])
    assert empty_levels.size == 0 and empty_s.size == 0


def test_sum_squared_lifelengths_validation():
    with pytest.raises(ValueError):
        sum_squared_lifelengths([_fake_sample(3, [1.0])])
    with pytest.raises(ValueError):
        sum_squared_lifelengths([_fake_sample(2, [1.0]), _fake_sample(4, [1.0])])
    with pytest.raises(ValueError):
        sum_squared_lifelengths([_fake_sample(2, [1.0]), _fake_sample(2, [1.0])])
    with pytest.raises(ValueError):
        sum_squared_lifelengths(
            [_fake_sample(2, [1.0]), _fake_sample(3, [1.0], window=(0.0, 9.0))]
        )


# ---------------------------------------------------------------------------
# Poissonity and independence
# ---------------------------------------------------------------------------

def _poisson_replicates(level, window, reps, stream):
    out = []
    rate = float(level - 1)
    for _ in range(reps):
        times = sample_poisson_times(stream, rate, window)
        out.append(
            PointProcessSample(
                level=level,
                window=window,
                death_times=times,
                life_lengths=np.zeros_like(times),
                burn_in=0.0,
                tol=1e-3,
                truncation_level=2001,
            )
        )
    return out


def test_poisson_suite_accepts_true_poisson():
    samples = _poisson_replicates(3, (0.0, 6.0), 200, make_stream(71, 0))
    res = poisson_suite(samples)
    assert res.expected_count == pytest.approx(12.0)
    assert abs(res.count_z) < 3.5
    assert abs(res.dispersion_z) < 3.5
    assert res.n_valid_gap_reps > 150
    assert res.gap_rejection_fraction <= 0.12
    assert res.pooled_gap_ks is not None and res.pooled_gap_ks.p_value > 1e-3


def test_poisson_suite_rejects_regular_process():
    window = (0.0, 6.0)
    samples = []
    for r in range(100):
        times = np.linspace(0.25, 5.75, 12) + 1e-4 * r
        samples.append(
            PointProcessSample(
                level=3,
                window=window,
                death_times=times,
                life_lengths=np.zeros_like(times),
                burn_in=0.0,
                tol=1e-3,
                truncation_level=2001,
            )
        )
    res = poisson_suite(samples)
    assert res.gap_rejection_fraction > 0.9
    assert res.dispersion_z < -5.0


def test_poisson_suite_validation():
    with pytest.raises(ValueError):
        poisson_suite([])
    a = _poisson_replicates(2, (0.0, 6.0), 1, make_stream(71, 1))
    b = _poisson_replicates(3, (0.0, 6.0), 1, make_stream(71, 2))
    with pytest.raises(ValueError):
        poisson_suite(a + b)


def test_independence_check_iid_counts():
    gen = make_stream(71, 3).generator
    counts = gen.poisson(8.0, size=(500, 4))
    res = independence_check(counts, [2, 3, 4, 5])
    assert res.max_abs_correlation < 0.2
    assert res.degenerate_levels == ()


def test_independence_check_flags_structure():
    gen = make_stream(71, 4).generator
    base = gen.poisson(8.0, size=(300, 1)).astype(float)
    noise = gen.poisson(8.0, size=(300, 1)).astype(float)
    constant = np.full((300, 1), 5.0)
    m = np.hstack([base, base, noise, constant])
    res = independence_check(m, [2, 3, 4, 5])
    assert res.max_abs_correlation == pytest.approx(1.0)
    assert res.argmax_pair == (2, 3)
    assert res.degenerate_levels == (5,)
    with pytest.raises(ValueError):
        independence_check(m[:2], [2, 3, 4, 5])
    with pytest.raises(ValueError):
        independence_check(m, [2, 3])


# ---------------------------------------------------------------------------
# scaling fits
# ---------------------------------------------------------------------------

def test_fit_log_slope_exact_recovery():
    xs = np.exp(np.array([0.0, 1.0, 2.0, 3.0]))
    ys = 3.0 * np.log(xs) + 1.0
    slope, intercept, r2 = fit_log_slope(xs, ys)
    assert slope == pytest.approx(3.0, abs=1e-12)
    assert intercept == pytest.approx(1.0, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        fit_log_slope(np.array([2.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        fit_log_slope(np.array([2.0, 2.0]), np.array([1.0, 2.0]))


def test_variance_scaling_with_pure_drift():
    n = 7
    rows = variance_scaling(
        n, [0.1, 0.01], 5, lambda eps, reps: np.full(reps, n * eps)
    )
    for eps, ratio, mean_sq, se in rows:
        assert mean_sq == pytest.approx((n * eps) ** 2, rel=1e-12)
        assert ratio == pytest.approx(n**2 * eps / abs(math.log(eps)), rel=1e-12)
        assert se == 0.0
    with pytest.raises(ValueError):
        variance_scaling(n, [1.5], 5, lambda eps, reps: np.zeros(reps))
    with pytest.raises(ValueError):
        variance_scaling(n, [0.1], 5, lambda eps, reps: np.zeros(reps + 1))


# ---------------------------------------------------------------------------
# RunningStats
# ---------------------------------------------------------------------------

def test_running_stats_matches_numpy():
    xs = make_stream(73, 0).generator.normal(3.0, 2.0, size=1000)
    acc = RunningStats()
    for x in xs:
        acc.add(float(x))
    assert acc.n == 1000
    assert acc.mean == pytest.approx(xs.mean(), rel=1e-12)
    assert acc.variance == pytest.approx(xs.var(ddof=1), rel=1e-10)
    assert acc.std_error == pytest.approx(xs.std(ddof=1) / math.sqrt(1000), rel=1e-10)


def test_running_stats_merge_equals_whole():
    xs = make_stream(73, 1).generator.normal(size=997)
    whole = RunningStats.from_array(xs)
    left = RunningStats.from_array(xs[:400])
    right = RunningStats.from_array(xs[400:])
    left.merge(right)
    assert left.n == whole.n
    assert left.mean == pytest.approx(whole.mean, rel=1e-12)
    assert left.m2 == pytest.approx(whole.m2, rel=1e-10)
    empty = RunningStats()
    empty.merge(whole)
    assert empty.mean == pytest.approx(whole.mean, rel=1e-12)
