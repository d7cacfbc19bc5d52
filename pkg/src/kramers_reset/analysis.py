"""Parameter sweeps, noise-aware minimum detection and the CV = 1 threshold."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import SimParams
from .engine import FptSamples, run_ensemble
from .potential import PotentialSpec, evaluate, landmarks, left_position_at_energy
from .resetting import Deterministic, NoReset, Poisson, ResetPoint
from .rng import derive_seed
from .stats import NoSuccessfulAttemptError, SummaryStats, deterministic_mfpt_from_times, summarize


# seed-derivation tags, one per sweep family
_BASELINE, _DET, _POISSON, _NOISE, _X0, _CV = 0, 1, 2, 3, 4, 5


@dataclass
class SweepCurve:
    control_name: str
    points: list[tuple[float, SummaryStats]]
    baseline: SummaryStats | None = None
    metric: str = "mean"
    skipped: list[tuple[float, str]] = field(default_factory=list)

    def __post_init__(self):
        c = self.controls
        if len(c) > 1 and not (np.diff(c) > 0).all():
            raise ValueError("control values must be strictly increasing")

    @property
    def controls(self) -> np.ndarray:
        return np.array([c for c, _ in self.points], dtype=float)

    @property
    def means(self) -> np.ndarray:
        return np.array([s.mean for _, s in self.points])

    @property
    def ci95(self) -> np.ndarray:
        return np.array([s.ci95_half_width for _, s in self.points])

    def values(self) -> np.ndarray:
        return np.array([getattr(s, self.metric) for _, s in self.points])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.control_name, "n", "mean", "std", "cv", "ci95"])
        for c, s in self.points:
            w.writerow([repr(float(c)), s.n, repr(s.mean), repr(s.std_dev), repr(s.cv), repr(s.ci95_half_width)])
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {
            "control_name": self.control_name,
            "metric": self.metric,
            "points": [{"control": float(c), **s.as_dict()} for c, s in self.points],
            "baseline": self.baseline.as_dict() if self.baseline else None,
            "skipped": [{"control": float(c), "reason": r} for c, r in self.skipped],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


@dataclass
class MinimaReport:
    global_min: tuple[float, float] | None
    local_minima: list[tuple[float, float]] = field(default_factory=list)
    baseline: float | None = None
    ratio_at_global: float | None = None

    def as_dict(self) -> dict:
        return {
            "global_min": list(self.global_min) if self.global_min else None,
            "local_minima": [list(m) for m in self.local_minima],
            "baseline": self.baseline,
            "ratio_at_global": self.ratio_at_global,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        lines = ["kind,control,mean"]
        for c, m in self.local_minima:
            kind = "global" if self.global_min and (c, m) == tuple(self.global_min) else "local"
            lines.append(f"{kind},{c!r},{m!r}")
        if self.baseline is not None:
            lines.append(f"baseline,,{self.baseline!r}")
        return "\n".join(lines) + "\n"


def _is_local_min(means, ci, i) -> bool:
    """``i`` is a minimum if, walking outwards on each side, a point exceeding it by
    more than the summed 95% half-widths appears before any lower point."""
    m = means[i]
    for direction in (-1, 1):
        j = i + direction
        walled = False
        while 0 <= j < len(means):
            lower = means[j] < m or (direction < 0 and means[j] == m)
            if lower:
                return False
            if means[j] - m > ci[j] + ci[i]:
                walled = True
                break
            j += direction
        if not walled:
            return False
    return True


def find_minima(curve: SweepCurve, baseline: float | None = None) -> MinimaReport:
    """Local minima separated from their surroundings by more than the Monte Carlo noise."""
    if len(curve.points) < 3:
        raise ValueError("need at least 3 sweep points")
    means = curve.values()
    ci = curve.ci95 if curve.metric == "mean" else np.zeros(len(means))
    c = curve.controls
    local = [(float(c[i]), float(means[i])) for i in range(len(means)) if _is_local_min(means, ci, i)]
    if baseline is None and curve.baseline is not None:
        baseline = curve.baseline.mean
    if not local:
        return MinimaReport(None, [], baseline, None)
    g = min(local, key=lambda p: (p[1], p[0]))
    ratio = g[1] / baseline if baseline else None
    return MinimaReport(g, local, baseline, ratio)


def _ensemble_stats(spec, params, sched, reset_point, n_traj, seed, threads, backend):
    s = run_ensemble(spec, params, sched, reset_point, n_traj, seed, threads=threads, backend=backend)
    return summarize(s)


def baseline_samples(spec: PotentialSpec, params: SimParams, n_traj: int, seed: int,
                     *, threads=None, backend=None) -> FptSamples:
    """Reset-free ensemble; seeded so every sweep with the same master seed shares it."""
    return run_ensemble(spec, params, NoReset(), None, n_traj, derive_seed(seed, _BASELINE),
                        threads=threads, backend=backend)


def baseline_stats(spec: PotentialSpec, params: SimParams, n_traj: int, seed: int,
                   *, threads=None, backend=None) -> SummaryStats:
    return summarize(baseline_samples(spec, params, n_traj, seed, threads=threads, backend=backend))


def _check_grid(grid, name):
    g = [float(v) for v in grid]
    if not g:
        raise ValueError(f"{name} grid is empty")
    if any(b <= a for a, b in zip(g, g[1:])):
        raise ValueError(f"{name} grid must be strictly ascending")
    return g


def sweep_deterministic(spec: PotentialSpec, params: SimParams, reset_point: ResetPoint | None,
                        t_r_grid, n_traj: int = 10_000, seed: int = 0, *, baseline: bool = True,
                        prescreen: bool = True, max_predicted_mfpt: float | None = None,
                        threads=None, backend=None) -> SweepCurve:
    """One deterministic-reset ensemble per period in ``t_r_grid``.

    With ``prescreen`` (needs ``baseline``), periods that no reset-free sample
    escapes within are skipped: their MFPT exceeds ``n_traj * t_r`` and the
    ensemble would run into ``t_max``. ``max_predicted_mfpt`` additionally
    skips periods whose renewal prediction exceeds it. Prescreening is only
    sound when resets return to the initial condition.
    """
    grid = _check_grid(t_r_grid, "t_r")
    base = baseline_samples(spec, params, n_traj, seed, threads=threads, backend=backend) if baseline else None
    same_start = reset_point is None or reset_point.x_r == params.x0
    pts, skipped = [], []
    for i, t_r in enumerate(grid):
        if prescreen and base is not None and same_start:
            try:
                pred = deterministic_mfpt_from_times(base.complete_times(), t_r)
            except NoSuccessfulAttemptError:
                skipped.append((t_r, f"no reset-free escape before t_r among {len(base)} samples"))
                continue
            if max_predicted_mfpt is not None and pred > max_predicted_mfpt:
                skipped.append((t_r, f"renewal prediction {pred:.6g} exceeds {max_predicted_mfpt:g}"))
                continue
        pts.append((t_r, _ensemble_stats(spec, params, Deterministic(t_r), reset_point, n_traj,
                                         derive_seed(seed, _DET, i), threads, backend)))
    return SweepCurve("t_r", pts, summarize(base) if base is not None else None, skipped=skipped)


def sweep_poisson(spec: PotentialSpec, params: SimParams, reset_point: ResetPoint | None,
                  theta_grid, n_traj: int = 10_000, seed: int = 0, *, baseline: bool = True,
                  threads=None, backend=None) -> SweepCurve:
    """Sweep over the mean reset interval theta = 1/r."""
    grid = _check_grid(theta_grid, "theta")
    if grid[0] <= 0:
        raise ValueError("theta values must be positive")
    pts = [
        (th, _ensemble_stats(spec, params, Poisson(1.0 / th), reset_point, n_traj,
                             derive_seed(seed, _POISSON, i), threads, backend))
        for i, th in enumerate(grid)
    ]
    base = baseline_stats(spec, params, n_traj, seed, threads=threads, backend=backend) if baseline else None
    return SweepCurve("theta", pts, base)


def sweep_noise(spec: PotentialSpec, params: SimParams, eps_grid, n_traj: int = 10_000,
                seed: int = 0, *, threads=None, backend=None) -> SweepCurve:
    grid = _check_grid(eps_grid, "eps")
    if grid[0] <= 0:
        raise ValueError("noise intensities must be positive")
    pts = [
        (eps, _ensemble_stats(spec, replace(params, eps=eps), NoReset(), None, n_traj,
                              derive_seed(seed, _NOISE, i), threads, backend))
        for i, eps in enumerate(grid)
    ]
    return SweepCurve("eps", pts)


def sweep_initial_condition(spec: PotentialSpec, params: SimParams, x0_grid, n_traj: int = 10_000,
                            seed: int = 0, *, threads=None, backend=None) -> tuple[SweepCurve, SweepCurve]:
    """Reset-free MFPT and CV against the resting initial position."""
    grid = _check_grid(x0_grid, "x0")
    lm = landmarks(spec)
    if not (lm.x_minus < grid[0] and grid[-1] < lm.x_plus):
        raise ValueError(f"initial positions must lie strictly inside ({lm.x_minus}, {lm.x_plus})")
    pts = [
        (x0, _ensemble_stats(spec, replace(params, x0=x0), NoReset(), None, n_traj,
                             derive_seed(seed, _X0, i), threads, backend))
        for i, x0 in enumerate(grid)
    ]
    return SweepCurve("x0", pts), SweepCurve("x0", list(pts), metric="cv")


@dataclass
class CvThreshold:
    energy_fraction: float
    energy: float
    x0: float
    probes: list[tuple[float, float, float]]  # (energy fraction, x0, cv)

    def as_dict(self) -> dict:
        return {"energy_fraction": self.energy_fraction, "energy": self.energy, "x0": self.x0,
                "probes": [list(p) for p in self.probes]}


def cv_threshold(spec: PotentialSpec, params: SimParams, n_traj: int = 10_000, seed: int = 0,
                 *, lo: float = 0.1, hi: float | None = None, tol: float = 0.05,
                 threads=None, backend=None) -> CvThreshold:
    """Energy fraction V(x0)/E0 on the left branch where the reset-free CV crosses 1.

    Bisects on the energy fraction, each probe a fresh ensemble started at rest.
    """
    lm = landmarks(spec)
    e0 = lm.barrier_height
    if hi is None:
        hi = float(evaluate(spec, params.x0)) / e0 if params.x0 < 0 else 0.95
    probes: list[tuple[float, float, float]] = []

    def cv_at(frac):
        x0 = left_position_at_energy(spec, frac * e0)
        st = _ensemble_stats(spec, replace(params, x0=x0), NoReset(), None, n_traj,
                             derive_seed(seed, _CV, len(probes)), threads, backend)
        probes.append((frac, x0, st.cv))
        return st.cv

    if cv_at(lo) >= 1.0 or cv_at(hi) <= 1.0:
        raise ValueError(f"CV does not cross 1 between energy fractions {lo} and {hi}: {probes}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cv_at(mid) > 1.0:
            hi = mid
        else:
            lo = mid
    frac = 0.5 * (lo + hi)
    return CvThreshold(frac, frac * e0, left_position_at_energy(spec, frac * e0), probes)


def parse_grid(text: str) -> list[float]:
    """``start:step:stop`` (endpoints inclusive within 1e-9) or a comma list."""
    if ":" not in text:
        return [float(v) for v in text.split(",") if v.strip()]
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid {text!r} is not start:step:stop")
    start, step, stop = (float(p) for p in parts)
    if not step > 0 or stop < start:
        raise ValueError(f"grid {text!r} needs a positive step and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    vals = [start + i * step for i in range(n)]
    # clean binary noise so 1:0.2:8 yields 1.2, not 1.2000000000000002
    return [round(v, 12) for v in vals]
