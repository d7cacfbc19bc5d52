import numpy as np
import pytest

from kramers_reset import Deterministic, NoReset, Poisson, RngStream, SimParams, run_ensemble, run_trajectory
from kramers_reset import _backend

from _helpers import requires_compiled

SCHEDULES = [NoReset(), Deterministic(2.0), Poisson(0.4)]


@requires_compiled
@pytest.mark.parametrize("sched", SCHEDULES)
def test_compiled_bitwise_equals_scalar(spec, paper_params, sched):
    s = run_ensemble(spec, paper_params, sched, None, 12, 33, backend="compiled")
    for i in range(12):
        ref = run_trajectory(spec, paper_params, sched, None, RngStream(33, i))
        assert s[i] == ref


@requires_compiled
@pytest.mark.parametrize("sched", SCHEDULES)
def test_fallback_tracks_compiled(spec, paper_params, sched):
    a = run_ensemble(spec, paper_params, sched, None, 60, 8, backend="compiled")
    b = run_ensemble(spec, paper_params, sched, None, 60, 8, backend="python")
    assert np.array_equal(a.n_resets, b.n_resets)
    assert np.array_equal(a.censored, b.censored)
    np.testing.assert_allclose(a.fpt, b.fpt, rtol=1e-9)
    np.testing.assert_allclose(a.max_x, b.max_x, rtol=1e-9)


def test_fallback_censoring_and_threads_ignored(spec):
    p = SimParams(t_max=5.0)
    a = run_ensemble(spec, p, Deterministic(2.0), None, 40, 2, backend="python", threads=1)
    b = run_ensemble(spec, p, Deterministic(2.0), None, 40, 2, backend="python", threads=8)
    assert a.to_csv() == b.to_csv()
    assert a.n_censored > 0


def test_backend_env(monkeypatch):
    monkeypatch.setenv("KRAMERS_RESET_BACKEND", "python")
    assert _backend.default_name() == "python"
    monkeypatch.setenv("KRAMERS_RESET_BACKEND", "nonsense")
    with pytest.raises(RuntimeError):
        _backend.default_name()


def test_thread_env(monkeypatch):
    monkeypatch.setenv("KRAMERS_RESET_THREADS", "3")
    assert _backend.resolve_threads(None) == 3
    assert _backend.resolve_threads(2) == 2
    monkeypatch.delenv("KRAMERS_RESET_THREADS")
    assert _backend.resolve_threads(None) == 1
