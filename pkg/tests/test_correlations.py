import numpy as np
import pytest

from quasilattice.elliptic import HIGH, LOW, EllipticParams
from quasilattice.errors import BaseCaseUnavailable, NotConverged
from quasilattice.ising.correlations import (CorrelationTable, RapidityMultiset, embedded_value,
                                             extrapolate, g_correlation, toda_residuals)

K_TEST = 0.3


@pytest.fixture(scope="module")
def table():
    return CorrelationTable(n_max=3)


def test_multiset_normalization():
    K = 2.0
    a = RapidityMultiset.normalized([3.9, 0.1], K)
    assert a.entries == pytest.approx((0.0, 0.2))
    b = RapidityMultiset.normalized([0.5, 0.7, 1.0, 1.2], K)
    assert a.count == 2 and b.count == 4
    assert RapidityMultiset.normalized([10.5, 10.7, 11.0, 11.2], K).key() == b.key()
    assert RapidityMultiset.normalized([], K).entries == ()
    with pytest.raises(ValueError):
        RapidityMultiset.normalized([0.1, 0.2, 0.3], K)
    with pytest.raises(ValueError):
        RapidityMultiset.normalized([0.0, 2.0], K)


def test_empty_multiset_is_one(table):
    p = EllipticParams(K_TEST)
    assert g_correlation(table, p, []) == 1.0


@pytest.mark.parametrize("regime", [LOW, HIGH])
def test_engine_matches_direct_embedding(table, regime):
    p = EllipticParams(K_TEST, regime)
    q = p.quarter_period / 5
    for pattern in ((0, 1, 3, 4), (0, 0, 2, 3), (0, 1, 1, 3, 4, 4)):
        raps = [x * q for x in pattern]
        ref, err, _ = extrapolate(lambda m: embedded_value(p, raps, m), range(8, 41, 4), 1e-10)
        assert g_correlation(table, p, raps) == pytest.approx(float(ref), abs=1e-8)


def test_quadratic_identities_hold(table):
    p = EllipticParams(K_TEST, LOW)
    q = p.quarter_period / 5
    for rest in ((), (q, 2 * q)):
        first, second = toda_residuals(table, p, 0.0, q, 3 * q, 4 * q, rest)
        assert abs(first) < 1e-9 and abs(second) < 1e-9


def test_dual_flag_swaps_regime(table):
    low, high = EllipticParams(K_TEST, LOW), EllipticParams(K_TEST, HIGH)
    raps = [0.0, 0.2 * low.quarter_period]
    assert g_correlation(table, low, raps, dual=True) == g_correlation(table, high, raps)


def test_long_range_limits(table):
    # all-equal crossings follow one straight row: g decays to M^2 below criticality, 0 above
    low, high = EllipticParams(K_TEST, LOW), EllipticParams(K_TEST, HIGH)
    g_low = [g_correlation(table, low, [0.0] * (2 * n)) for n in (1, 2, 3)]
    g_high = [g_correlation(table, high, [0.0] * (2 * n)) for n in (1, 2, 3)]
    m2 = low.k_prime ** 0.5
    assert np.all(np.diff(g_low) < 0) and g_low[-1] > m2
    assert g_low[-1] - m2 < 1e-3
    assert np.all(np.diff(g_high) < 0) and 0 < g_high[-1] < 1e-2


def test_cap_is_enforced(table):
    p = EllipticParams(K_TEST)
    with pytest.raises(BaseCaseUnavailable):
        g_correlation(table, p, [0.0] * 8)


def test_extrapolate_reports_failure():
    with pytest.raises(NotConverged):
        extrapolate(lambda m: float(m), range(4), 1e-12)
    val, err, used = extrapolate(lambda m: 1.0 + 0.5 ** m, range(1, 10), 1e-12)
    assert float(val) == pytest.approx(1.0, abs=1e-12)
