import numpy as np
import pytest
from scipy import stats

from rnachannel.kinetics import (
    Composition,
    EmptyStrand,
    KineticParams,
    replication_time_stats,
    sample_replication_time,
)


def test_uniform_rate_moments_are_n_over_k():
    comp = Composition(5000, 5000, 5000, 5000)
    params = KineticParams.from_rate(22.0)
    ts = replication_time_stats(comp, params)
    assert ts.mean == pytest.approx(20000 / 22.0, rel=1e-12)
    assert ts.variance == pytest.approx(20000 / 22.0**2, rel=1e-12)


def test_per_letter_moments_hand_computed():
    # 3*1 + 5*2 + 7*3 + 9*4 = 70; 3*.1 + 5*.2 + 7*.3 + 9*.4 = 7.0
    comp = Composition(3, 5, 7, 9)
    params = KineticParams([1.0, 2.0, 3.0, 4.0], [0.1, 0.2, 0.3, 0.4])
    ts = replication_time_stats(comp, params)
    assert ts.mean == pytest.approx(70.0, rel=1e-12)
    assert ts.variance == pytest.approx(7.0, rel=1e-12)


def test_gaussian_samples_match_moments():
    comp = Composition(250, 250, 250, 250)
    params = KineticParams.from_rate(22.0)
    rng = np.random.default_rng(42)
    n = 20000
    x = np.array([sample_replication_time(comp, params, "gaussian", rng) for _ in range(n)])
    exact = replication_time_stats(comp, params)
    assert abs(x.mean() - exact.mean) < 4 * np.sqrt(exact.variance / n)
    assert x.var(ddof=1) == pytest.approx(exact.variance, rel=0.1)
    assert np.all(x > 0)


def test_exact_sum_samples_match_moments():
    comp = Composition(100, 150, 200, 250)
    params = KineticParams.per_letter([0.01, 0.02, 0.03, 0.04])
    rng = np.random.default_rng(43)
    n = 20000
    x = np.array([sample_replication_time(comp, params, "exact_sum", rng) for _ in range(n)])
    exact = replication_time_stats(comp, params)
    assert abs(x.mean() - exact.mean) < 4 * np.sqrt(exact.variance / n)
    assert x.var(ddof=1) == pytest.approx(exact.variance, rel=0.1)
    assert np.all(x > 0)


def test_exact_sum_single_letter_is_exponential():
    comp = Composition(1, 0, 0, 0)
    params = KineticParams.per_letter([2.0, 1.0, 1.0, 1.0])
    rng = np.random.default_rng(44)
    x = np.array([sample_replication_time(comp, params, "exact_sum", rng) for _ in range(5000)])
    res = stats.kstest(x, stats.expon(scale=2.0).cdf)
    assert res.pvalue > 0.01


def test_exact_sum_two_letters_is_gamma():
    comp = Composition(0, 3, 0, 0)
    params = KineticParams.per_letter([1.0, 0.5, 1.0, 1.0])
    rng = np.random.default_rng(45)
    x = np.array([sample_replication_time(comp, params, "exact_sum", rng) for _ in range(5000)])
    res = stats.kstest(x, stats.gamma(a=3, scale=0.5).cdf)
    assert res.pvalue > 0.01


def test_gaussian_truncation_keeps_times_positive():
    # sd far above the mean: untruncated draws would often be negative
    comp = Composition(1, 0, 0, 0)
    params = KineticParams([0.05, 0.05, 0.05, 0.05], [25.0, 25.0, 25.0, 25.0])
    rng = np.random.default_rng(46)
    x = np.array([sample_replication_time(comp, params, "gaussian", rng) for _ in range(2000)])
    assert np.all(x > 0)


def test_zero_variance_gaussian_returns_the_mean():
    comp = Composition(2, 2, 0, 0)
    params = KineticParams([0.5, 0.5, 0.5, 0.5], [0.0, 0.0, 0.0, 0.0])
    rng = np.random.default_rng(47)
    assert sample_replication_time(comp, params, "gaussian", rng) == pytest.approx(2.0)


def test_empty_strand_rejected():
    params = KineticParams.from_rate(22.0)
    with pytest.raises(EmptyStrand):
        sample_replication_time(Composition(0, 0, 0, 0), params, "gaussian")


def test_unknown_mode_rejected():
    params = KineticParams.from_rate(22.0)
    with pytest.raises(ValueError):
        sample_replication_time(Composition(1, 0, 0, 0), params, "laplace")


def test_composition_validation_and_helpers():
    with pytest.raises(ValueError):
        Composition(-1, 0, 0, 0)
    comp = Composition.from_digits([0, 0, 1, 2, 3, 3])
    assert comp.as_tuple() == (2, 1, 1, 2)
    assert comp.total() == 6
    assert Composition.from_array(comp.as_array()) == comp


def test_kinetic_params_validation():
    with pytest.raises(ValueError):
        KineticParams.from_rate(0.0)
    with pytest.raises(ValueError):
        KineticParams([1.0, 1.0, 1.0, 0.0], [1.0, 1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        KineticParams([1.0, 1.0, 1.0, 1.0], [1.0, -1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        KineticParams([1.0, 1.0], [1.0, 1.0])
    p = KineticParams.per_letter([1.0, 2.0, 3.0, 4.0])
    assert np.allclose(p.var_time, [1.0, 4.0, 9.0, 16.0])
