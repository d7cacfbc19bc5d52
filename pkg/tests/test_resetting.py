import numpy as np
import pytest
from scipy import stats as sps

from kramers_reset import (
    Deterministic,
    NoReset,
    Poisson,
    ResetPoint,
    RngStream,
    State,
    apply_reset,
    next_reset_time,
    parse_schedule,
)
from kramers_reset.resetting import schedule_code


def test_no_reset_never_fires():
    assert next_reset_time(NoReset(), 5.0) is None


def test_deterministic_next():
    assert next_reset_time(Deterministic(2.0), 4.0) == 6.0


def _poisson_draws(n, r=0.4, seed=7):
    s = RngStream(seed, 0)
    return np.array([next_reset_time(Poisson(r), 0.0, s) for _ in range(n)])


def test_poisson_mean():
    assert abs(_poisson_draws(1_000_000).mean() - 2.5) < 0.01


def test_poisson_ks():
    x = _poisson_draws(100_000, seed=11)
    assert sps.kstest(x, "expon", args=(0, 2.5)).pvalue > 0.01


def test_poisson_needs_stream():
    with pytest.raises(ValueError):
        next_reset_time(Poisson(1.0), 0.0)


@pytest.mark.parametrize(
    "s, xr, expected",
    [
        (State(4.2, -1.3, 2.0), -2.899, State(-2.899, 0.0, 2.0)),
        (State(-2.899, 0.0, 0.0), -2.899, State(-2.899, 0.0, 0.0)),
        (State(5.9, 3.0, 7.7), 5.0, State(5.0, 0.0, 7.7)),
    ],
)
def test_apply_reset(s, xr, expected):
    assert apply_reset(s, ResetPoint(xr)) == expected


def test_reset_point_rejects_velocity():
    with pytest.raises(ValueError):
        ResetPoint(0.0, 1.0)


@pytest.mark.parametrize(
    "text, expected",
    [("none", NoReset()), ("det:2", Deterministic(2.0)), ("poisson:0.4", Poisson(0.4)),
     (" DET:1.5 ", Deterministic(1.5))],
)
def test_parse_schedule(text, expected):
    assert parse_schedule(text) == expected


@pytest.mark.parametrize("text", ["", "det", "det:x", "poisson:-1", "det:0", "levy:2", "det:inf"])
def test_parse_schedule_rejects(text):
    with pytest.raises(ValueError):
        parse_schedule(text)


def test_literal_roundtrip():
    for s in (NoReset(), Deterministic(2.0), Poisson(0.4)):
        assert parse_schedule(s.literal) == s


def test_theta_and_codes():
    assert Poisson(0.4).theta == pytest.approx(2.5)
    assert schedule_code(NoReset()) == (0, 0.0)
    assert schedule_code(Deterministic(2.0)) == (1, 2.0)
    assert schedule_code(Poisson(0.4)) == (2, 0.4)
