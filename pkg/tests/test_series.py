import math

import numpy as np
import pytest

from phylodtm.series import SeriesTables, log_rising_sum, recip_rising_sum


def direct_log_sum(alpha, k):
    """Extended-precision direct-summation oracle for g(alpha, k)."""
    if k == 0:
        return 0.0
    xi = np.arange(k, dtype=np.longdouble)
    return float(np.log(np.longdouble(alpha) + xi).sum())


def direct_recip_sum(alpha, k):
    if k == 0:
        return 0.0
    xi = np.arange(k, dtype=np.longdouble)
    return float((1.0 / (np.longdouble(alpha) + xi)).sum())


@pytest.fixture(scope="module")
def tables():
    return SeriesTables(120_000)


def test_table_invariants(tables):
    # S_p(2) is the single-term value
    assert tables.table(0)[2] == 0.0  # log 1
    for p in range(1, tables.order + 2):
        assert tables.table(p)[2] == 1.0
    # strictly increasing: p = 0 from k >= 3, p >= 1 from k >= 2
    assert (np.diff(tables.table(0)[3:]) > 0).all()
    for p in range(1, tables.order + 2):
        assert (np.diff(tables.table(p)[2:]) > 0).all()


def test_empty_and_single_term(tables):
    assert log_rising_sum(0.37, 0, tables) == 0.0
    assert recip_rising_sum(0.37, 0, tables) == 0.0
    assert log_rising_sum(2.5, 1, tables) == pytest.approx(math.log(2.5), rel=1e-14)
    assert recip_rising_sum(4.0, 2, tables) == pytest.approx(0.45, rel=1e-14)


def test_long_sum_small_alpha(tables):
    got = log_rising_sum(0.7, 100_000, tables)
    want = direct_log_sum(0.7, 100_000)
    assert abs(got - want) <= 1e-8 * abs(want)

    got = recip_rising_sum(1.3, 50_000, tables)
    want = direct_recip_sum(1.3, 50_000)
    assert abs(got - want) <= 1e-8 * abs(want)


def test_threshold_boundary_cases(tables):
    # worst-case Taylor terms: alpha just above T with eps near +-0.5, few terms
    for alpha in (10.5, 10.4999999, 9.5000001, 11.49, 10.0, 13.5):
        for k in (1, 2, 3, 7):
            g = log_rising_sum(alpha, k, tables)
            h = recip_rising_sum(alpha, k, tables)
            assert abs(g - direct_log_sum(alpha, k)) <= 1e-8 * abs(direct_log_sum(alpha, k))
            assert abs(h - direct_recip_sum(alpha, k)) <= 1e-8 * abs(direct_recip_sum(alpha, k))


def test_random_sweep_meets_contract(tables):
    rng = np.random.default_rng(42)
    log_a = rng.uniform(np.log(1e-3), np.log(1e4), size=300)
    alphas = np.exp(log_a)
    ks = rng.integers(0, 100_001, size=300)
    for alpha, k in zip(alphas, ks):
        k = int(k)
        g, h = log_rising_sum(alpha, k, tables), recip_rising_sum(alpha, k, tables)
        gw, hw = direct_log_sum(alpha, k), direct_recip_sum(alpha, k)
        assert abs(g - gw) <= 1e-8 * max(abs(gw), 1e-300)
        assert abs(h - hw) <= 1e-8 * max(abs(hw), 1e-300)


def test_vectorized_matches_scalar(tables):
    rng = np.random.default_rng(1)
    alphas = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), size=50))
    ks = rng.integers(0, 500, size=50)
    gv = log_rising_sum(alphas, ks, tables)
    hv = recip_rising_sum(alphas, ks, tables)
    for i in range(50):
        assert gv[i] == log_rising_sum(float(alphas[i]), int(ks[i]), tables)
        assert hv[i] == recip_rising_sum(float(alphas[i]), int(ks[i]), tables)


def test_integer_alpha_exact(tables):
    # eps = 0: tail reduces to pure table differences
    for alpha in (1.0, 7.0, 10.0, 250.0):
        for k in (1, 5, 200):
            g = log_rising_sum(alpha, k, tables)
            assert g == pytest.approx(direct_log_sum(alpha, k), rel=1e-12)


def test_errors(tables):
    with pytest.raises(ValueError):
        log_rising_sum(-1.0, 5, tables)
    with pytest.raises(ValueError):
        log_rising_sum(0.0, 5, tables)
    with pytest.raises(ValueError):
        log_rising_sum(2.0, -3, tables)
    with pytest.raises(ValueError):
        log_rising_sum(5.0, tables.k_max + 10, tables)


def test_overflow_fallback():
    small = SeriesTables(200)
    alpha, k = 5000.25, 400
    g = log_rising_sum(alpha, k, small, on_overflow="lgamma")
    h = recip_rising_sum(alpha, k, small, on_overflow="lgamma")
    assert abs(g - direct_log_sum(alpha, k)) <= 1e-8 * abs(direct_log_sum(alpha, k))
    assert abs(h - direct_recip_sum(alpha, k)) <= 1e-8 * abs(direct_recip_sum(alpha, k))


def test_capacity_for_counts():
    t = SeriesTables.for_counts(5000)
    assert t.k_max >= 5000 + t.threshold
