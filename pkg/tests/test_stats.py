import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kramers_reset import FptSamples, SimParams
from kramers_reset.stats import (
    Histogram,
    InsufficientPeaksError,
    NoSuccessfulAttemptError,
    NonPositiveFrequencyError,
    bootstrap_renewal,
    build_histogram,
    detect_peaks,
    fit_exponential_decay,
    fraction_escaped_by,
    renewal_mfpt_deterministic,
    renewal_mfpt_poisson,
    strongest_per_period,
    summarize,
    summarize_times,
    z_score,
)


def S(*t):
    return FptSamples.from_times(list(t))


def test_summary_degenerate():
    s = summarize(S(2, 2, 2, 2))
    assert (s.mean, s.std_dev, s.cv, s.ci95_half_width) == (2, 0, 0, 0)


def test_summary_two_points():
    s = summarize(S(1, 3))
    assert s.mean == 2 and s.std_dev == 1 and s.cv == 0.5
    assert s.ci95_half_width == pytest.approx(2 / math.sqrt(2), rel=1e-15)


def test_exponential_cv_unity():
    x = np.random.default_rng(0).exponential(1.0, 1_000_000)
    assert abs(summarize_times(x).cv - 1) < 0.01


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 1e3), min_size=1, max_size=200))
def test_summary_invariants(t):
    s = summarize_times(t)
    assert s.std_dev >= 0
    assert s.cv == pytest.approx(s.std_dev / s.mean)
    assert s.ci95_half_width == pytest.approx(2 * s.std_dev / math.sqrt(len(t)))


def test_summary_refuses_censored():
    s = FptSamples.from_times([1.0, math.nan])
    with pytest.raises(ValueError):
        summarize(s)


def test_fraction_escaped():
    s = S(1.2, 3.0, 25.0, 40.0)
    assert fraction_escaped_by(s, 0.0) == 0.0
    assert fraction_escaped_by(s, 20.0) == 0.5
    assert fraction_escaped_by(s, 1e5) == 1.0
    with pytest.raises(ValueError):
        fraction_escaped_by(s, -1.0)


def test_fraction_counts_censored_as_not_escaped():
    assert fraction_escaped_by(FptSamples.from_times([1.0, math.nan]), 1e9) == 0.5


def test_histogram_single_bin():
    h = build_histogram(S(1.1, 1.2), 0.5)
    nz = [(e, f) for e, f in h.bins if f > 0]
    assert nz == [(1.0, 1.0)]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.0, 200.0), min_size=1, max_size=300), st.sampled_from([0.1, 0.25, 1.0]))
def test_histogram_mass_and_membership(t, w):
    h = build_histogram(S(*t), w)
    assert h.rf.sum() == pytest.approx(1.0)
    assert (h.rf >= 0).all()
    for x in t:
        i = int(math.floor(x / w))
        assert h.left_edges[i] <= x + 1e-9 and h.rf[i] > 0


def test_histogram_serializes():
    h = build_histogram(S(1.1, 1.2, 2.0), 0.5)
    assert h.to_csv().splitlines()[0] == "left_edge,right_edge,relative_frequency"
    assert '"bin_width": 0.5' in h.to_json()


def _hist(values):
    # unit bins centred on integers
    return Histogram(1.0, np.asarray(values, dtype=float), origin=-0.5)


def test_single_spike_peak():
    assert detect_peaks(_hist([0, 0, 0, 0.4, 0, 0])) == [(3.0, 0.4)]


def test_two_bump_peaks():
    rf = [0, 0.05, 0.3, 0.1, 0.02, 0.1, 0.04, 0]
    assert detect_peaks(_hist(rf)) == [(2.0, 0.3), (5.0, 0.1)]


def test_plateau_resolves_to_first_bin():
    assert detect_peaks(_hist([0, 0.2, 0.2, 0])) == [(1.0, 0.2)]


def test_empty_histogram_has_no_peaks():
    assert detect_peaks(_hist([0, 0, 0])) == []


def test_strongest_per_period():
    peaks = [(1.2, 0.1), (1.8, 0.2), (3.5, 0.05)]
    assert strongest_per_period(peaks, 2.0) == [(1.8, 0.2), (3.5, 0.05)]


@pytest.mark.parametrize("weighted", [True, False])
def test_exact_exponential_fit(weighted):
    peaks = [(t, 2 * math.exp(-0.5 * t)) for t in (1, 2, 3, 4)]
    fit = fit_exponential_decay(peaks, weighted=weighted)
    assert fit.a == pytest.approx(2, rel=1e-12)
    assert fit.b == pytest.approx(0.5, rel=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_needs_three_peaks():
    with pytest.raises(InsufficientPeaksError):
        fit_exponential_decay([(1, 0.2), (2, 0.1)])


def test_fit_rejects_zero_frequency():
    with pytest.raises(NonPositiveFrequencyError):
        fit_exponential_decay([(1, 0.2), (2, 0.0), (3, 0.1)])


def test_renewal_det_never_fires():
    assert renewal_mfpt_deterministic(S(0.5, 1.0, 1.5), 2.0) == pytest.approx(1.0)


def test_renewal_det_hand_value():
    assert renewal_mfpt_deterministic(S(1, 3, 5), 2.0) == pytest.approx(5.0)


def test_renewal_det_no_success():
    with pytest.raises(NoSuccessfulAttemptError):
        renewal_mfpt_deterministic(S(3, 4), 2.0)


def test_renewal_poisson_closed_form():
    assert renewal_mfpt_poisson(S(1.0), 1.0) == pytest.approx(math.e - 1, rel=1e-12)


def test_renewal_poisson_small_rate_limit():
    s = S(1.0, 2.5, 7.0, 30.0)
    assert renewal_mfpt_poisson(s, 1e-9) == pytest.approx(summarize(s).mean, rel=1e-5)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.1, 50.0), min_size=2, max_size=50), st.floats(0.5, 60.0))
def test_renewal_det_huge_period_is_plain_mean(t, extra):
    s = S(*t)
    assert renewal_mfpt_deterministic(s, max(t) + extra) == pytest.approx(np.mean(t))


def test_bootstrap_and_z():
    t = np.random.default_rng(3).exponential(5.0, 2000) + 1.0
    s = FptSamples.from_times(t)
    pred = bootstrap_renewal(s, "poisson", 0.2, n_boot=100, seed=1)
    assert pred.mfpt == pytest.approx(renewal_mfpt_poisson(s, 0.2))
    assert 0 < pred.std_error < pred.mfpt
    direct = summarize_times(t)
    assert math.isfinite(z_score(direct, pred))
    again = bootstrap_renewal(s, "poisson", 0.2, n_boot=100, seed=1)
    assert again == pred


def test_renewal_rejects_bad_controls():
    with pytest.raises(ValueError):
        renewal_mfpt_deterministic(S(1.0), 0.0)
    with pytest.raises(ValueError):
        renewal_mfpt_poisson(S(1.0), -1.0)


def test_from_times_defaults():
    s = FptSamples.from_times([1.0, 2.0], params=SimParams(absorb_x=6.0))
    assert s.n_escaped == 2 and (s.max_x == 6.0).all()
