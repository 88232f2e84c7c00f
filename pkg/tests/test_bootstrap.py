import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pot_tailrisk.bootstrap import (
    BootstrapError,
    bootstrap_estimate,
    bootstrap_vector,
    percentile_interval,
    resample,
)
from pot_tailrisk.catalog import SeverityCatalog
from pot_tailrisk.rng import stream

HUNDRED = SeverityCatalog(np.arange(1, 101, dtype=float))


def mean_severity(cat):
    return float(cat.severities.mean())


def failing_on_repeated_one(cat):
    if np.count_nonzero(cat.severities == 1) >= 2:
        raise ValueError("replicate rejected")
    return float(cat.severities.mean())


def test_percentile_interval_hand_values():
    lo, hi = percentile_interval(np.arange(1, 2001), 0.90)
    assert lo == pytest.approx(100.95)
    assert hi == pytest.approx(1900.05)
    assert percentile_interval([4.2], 0.9) == (4.2, 4.2)
    assert percentile_interval([1, 2, 3], 1.0) == (1.0, 3.0)
    with pytest.raises(ValueError):
        percentile_interval([], 0.9)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_intervals_nest(values, l1, l2):
    a, b = sorted((l1, l2))
    lo1, hi1 = percentile_interval(values, a)
    lo2, hi2 = percentile_interval(values, b)
    assert lo2 <= lo1 <= hi1 <= hi2


def test_resample_single_event_and_determinism():
    one = SeverityCatalog(np.array([3.0]))
    assert resample(one, stream(0, 0)).severities.tolist() == [3.0]
    a = resample(HUNDRED, stream(5, 3))
    b = resample(HUNDRED, stream(5, 3))
    assert np.array_equal(a.severities, b.severities)


def test_resample_expected_multiplicity():
    cat = SeverityCatalog(np.arange(1, 51, dtype=float))
    counts = np.zeros(50)
    reps = 10**4
    for i in range(reps):
        counts += np.bincount(resample(cat, stream(1, i)).severities.astype(int) - 1, minlength=50)
    mult = counts / reps
    # each count is Binomial(50, 1/50); mean over 1e4 replicates has sd ~ 0.01
    assert np.all(np.abs(mult - 1) < 0.05)


def test_mean_interval_matches_normal_approximation():
    s = bootstrap_estimate(HUNDRED, mean_severity, B=2000, level=0.9, seed=11)
    half = (s.hi - s.lo) / 2
    expected = 1.6448536 * np.std(np.arange(1, 101)) / 10
    assert s.lo < 50.5 < s.hi
    assert half == pytest.approx(expected, rel=0.15)
    assert s.point == 50.5
    assert s.B == 2000 and s.n_failed == 0


def test_constant_estimator():
    s = bootstrap_estimate(HUNDRED, lambda c: 7.0, B=50, seed=0)
    assert (s.lo, s.hi) == (7.0, 7.0)


def test_determinism_across_jobs():
    a = bootstrap_estimate(HUNDRED, mean_severity, B=64, seed=99, jobs=1)
    b = bootstrap_estimate(HUNDRED, mean_severity, B=64, seed=99, jobs=3)
    assert np.array_equal(a.replicates, b.replicates)
    assert (a.lo, a.hi) == (b.lo, b.hi)
    c = bootstrap_estimate(HUNDRED, mean_severity, B=64, seed=100)
    assert not np.array_equal(a.replicates, c.replicates)


def test_failures_are_counted():
    s = bootstrap_estimate(HUNDRED, failing_on_repeated_one, B=200, seed=3)
    assert s.n_failed > 0
    assert s.n_failed + s.replicates.size == 200
    with pytest.raises(BootstrapError, match="replicate rejected"):
        bootstrap_vector(SeverityCatalog(np.array([1.0, 1.0])), failing_on_repeated_one, B=20, seed=0, point=1.0)


def test_vector_components_fail_independently():
    def est(cat):
        m = cat.severities.mean()
        return [m, np.nan if m > 50.5 else m]

    first, second = bootstrap_vector(HUNDRED, est, B=300, seed=2, point=[50.5, 50.5])
    assert first.n_failed == 0
    assert 0 < second.n_failed < 300
    assert second.replicates.size + second.n_failed == 300
    assert np.all(second.replicates <= 50.5)


def test_all_nan_component_is_none():
    summaries = bootstrap_vector(HUNDRED, lambda c: [1.0, np.nan], B=10, seed=0)
    assert summaries[0] is not None and summaries[1] is None


def test_argument_validation():
    with pytest.raises(ValueError):
        bootstrap_estimate(HUNDRED, mean_severity, B=0)
    with pytest.raises(ValueError):
        bootstrap_estimate(HUNDRED, mean_severity, B=10, level=1.0)


@given(st.integers(0, 2**64 - 1), st.integers(1, 30))
@settings(max_examples=20, deadline=None)
def test_summary_invariants(seed, B):
    s = bootstrap_estimate(HUNDRED, mean_severity, B=B, seed=seed)
    assert s.lo <= s.hi
    assert s.n_failed + s.replicates.size == B
    assert s.interval(0.5)[0] >= s.lo and s.interval(0.5)[1] <= s.hi
