"""First-passage runs: single trajectories, ensembles, no-comeback validation."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from . import _backend
from .dynamics import NumericalBlowupError, SimParams, State, step
from .potential import PotentialSpec
from .resetting import (
    NoReset,
    ResetPoint,
    ResetSchedule,
    apply_reset,
    next_reset_time,
    parse_schedule,
    schedule_code,
)
from .rng import RngStream

CSV_COLUMNS = ("traj_index", "fpt", "n_resets", "censored", "max_x_reached")


class CensoredSamplesError(ValueError):
    """An estimator that needs complete samples got censored trajectories."""


class TrajectoryOutcome(NamedTuple):
    fpt: float | None
    n_resets: int
    censored: bool
    max_x_reached: float


def _step_index(epoch: float, dt: float, k: int) -> int:
    # first step boundary at or after the epoch, never the current one
    return max(k + 1, math.ceil(epoch / dt - 1e-9))


def run_trajectory(
    spec: PotentialSpec,
    params: SimParams,
    sched: ResetSchedule,
    reset_point: ResetPoint | None,
    rng: RngStream,
) -> TrajectoryOutcome:
    """Integrate one trajectory to first passage with the scalar ``step``.

    This is the reference path; ensembles go through the kernels, which
    reproduce it exactly for the same stream.
    """
    p = params.check(spec)
    if not p.x0 < p.absorb_x:
        raise ValueError("x0 must start below the absorbing point")
    rp = reset_point or ResetPoint(p.x0)
    dt = p.dt
    n_max = math.floor(p.t_max / dt + 1e-9)
    s = State(p.x0, p.v0, 0.0)
    mx = s.x
    k = 0
    n_res = 0

    def schedule(now):
        epoch = next_reset_time(sched, now, rng)
        return None if epoch is None else _step_index(epoch, dt, k)

    next_rs = schedule(0.0)
    while k < n_max:
        dW = rng.gaussian_increment(dt)
        new = step(spec, p, s, dW)
        k += 1
        new = State(new.x, new.v, k * dt)
        mx = max(mx, new.x)
        if new.x >= p.absorb_x:
            fpt = (k - 1) * dt + dt * (p.absorb_x - s.x) / (new.x - s.x)
            return TrajectoryOutcome(fpt, n_res, False, mx)
        s = new
        if next_rs is not None and k >= next_rs:
            s = apply_reset(s, rp)
            n_res += 1
            if isinstance(sched, NoReset):
                next_rs = None
            elif sched.kind == "det":
                next_rs = schedule(n_res * sched.t_r)
            else:
                next_rs = schedule(k * dt)
    return TrajectoryOutcome(None, n_res, True, mx)


@dataclass
class FptSamples:
    """Ensemble outcomes ordered by trajectory index, plus provenance."""

    fpt: np.ndarray  # nan where censored
    n_resets: np.ndarray
    censored: np.ndarray
    max_x: np.ndarray
    params: SimParams
    schedule: ResetSchedule
    reset_point: ResetPoint
    master_seed: int
    spec: PotentialSpec = field(default_factory=PotentialSpec)
    start_index: int = 0

    def __len__(self) -> int:
        return len(self.fpt)

    def __getitem__(self, i: int) -> TrajectoryOutcome:
        c = bool(self.censored[i])
        return TrajectoryOutcome(
            None if c else float(self.fpt[i]), int(self.n_resets[i]), c, float(self.max_x[i])
        )

    @property
    def outcomes(self) -> list[TrajectoryOutcome]:
        return [self[i] for i in range(len(self))]

    @property
    def n_censored(self) -> int:
        return int(np.count_nonzero(self.censored))

    @property
    def n_escaped(self) -> int:
        return len(self) - self.n_censored

    def escaped_times(self) -> np.ndarray:
        return self.fpt[~self.censored]

    def complete_times(self) -> np.ndarray:
        """FPT array; raises when any trajectory was censored."""
        if len(self) == 0:
            raise ValueError("empty sample set")
        if self.n_censored:
            raise CensoredSamplesError(
                f"{self.n_censored} of {len(self)} trajectories censored at t_max={self.params.t_max}"
            )
        return self.fpt

    @classmethod
    def from_times(cls, fpt, params: SimParams | None = None, schedule: ResetSchedule | None = None,
                   master_seed: int = 0) -> "FptSamples":
        """Wrap plain first-passage times (no censoring) for use with the estimators."""
        fpt = np.asarray(fpt, dtype=float)
        params = params or SimParams()
        return cls(
            fpt=fpt,
            n_resets=np.zeros(len(fpt), dtype=np.int64),
            censored=np.isnan(fpt),
            max_x=np.where(np.isnan(fpt), np.nan, params.absorb_x or 6.0),
            params=params,
            schedule=schedule or NoReset(),
            reset_point=ResetPoint(params.x0),
            master_seed=master_seed,
        )

    # -- serialization -----------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for i in range(len(self)):
            c = bool(self.censored[i])
            w.writerow([
                self.start_index + i,
                "" if c else repr(float(self.fpt[i])),
                int(self.n_resets[i]),
                int(c),
                repr(float(self.max_x[i])),
            ])
        return buf.getvalue()

    def provenance(self) -> dict:
        return {
            "potential": asdict(self.spec),
            "params": asdict(self.params),
            "schedule": self.schedule.literal,
            "reset_point": asdict(self.reset_point),
            "master_seed": self.master_seed,
            "start_index": self.start_index,
            "n_traj": len(self),
        }

    def to_json(self, include_samples: bool = True) -> str:
        from .stats import summarize

        doc = self.provenance()
        doc["n_censored"] = self.n_censored
        doc["summary"] = summarize(self).as_dict() if self.n_censored == 0 and len(self) else None
        if include_samples:
            doc["fpt"] = [None if c else float(t) for t, c in zip(self.fpt, self.censored)]
            doc["n_resets"] = [int(n) for n in self.n_resets]
            doc["max_x_reached"] = [float(m) for m in self.max_x]
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_csv(cls, text: str, params: SimParams | None = None, schedule: ResetSchedule | None = None,
                 master_seed: int = 0, reset_point: ResetPoint | None = None,
                 spec: PotentialSpec | None = None) -> "FptSamples":
        rows = list(csv.DictReader(io.StringIO(text)))
        missing = set(CSV_COLUMNS) - set(rows[0].keys() if rows else CSV_COLUMNS)
        if missing:
            raise ValueError(f"samples CSV lacks columns {sorted(missing)}")
        censored = np.array([r["censored"].strip() in ("1", "true", "True") for r in rows], dtype=bool)
        fpt = np.array([math.nan if c else float(r["fpt"]) for r, c in zip(rows, censored)])
        params = params or SimParams()
        return cls(
            fpt=fpt,
            n_resets=np.array([int(r["n_resets"]) for r in rows], dtype=np.int64),
            censored=censored,
            max_x=np.array([float(r["max_x_reached"]) for r in rows]),
            params=params,
            schedule=schedule or NoReset(),
            reset_point=reset_point or ResetPoint(params.x0),
            master_seed=master_seed,
            spec=spec or PotentialSpec(),
            start_index=int(rows[0]["traj_index"]) if rows else 0,
        )

    @classmethod
    def from_json(cls, text: str) -> "FptSamples":
        doc = json.loads(text)
        if "fpt" not in doc:
            raise ValueError("JSON document carries no per-trajectory samples")
        params = SimParams(**doc["params"])
        fpt = np.array([math.nan if t is None else t for t in doc["fpt"]], dtype=float)
        return cls(
            fpt=fpt,
            n_resets=np.asarray(doc["n_resets"], dtype=np.int64),
            censored=np.isnan(fpt),
            max_x=np.asarray(doc["max_x_reached"], dtype=float),
            params=params,
            schedule=parse_schedule(doc["schedule"]),
            reset_point=ResetPoint(**doc["reset_point"]),
            master_seed=int(doc["master_seed"]),
            spec=PotentialSpec(**doc["potential"]),
            start_index=int(doc.get("start_index", 0)),
        )


def _kernel_args(spec: PotentialSpec, p: SimParams, sched: ResetSchedule, rp: ResetPoint):
    kind, value = schedule_code(sched)
    return (spec.alpha, spec.beta, p.eta, p.noise_amplitude, p.x0, p.v0, p.dt, p.t_max,
            p.absorb_x, p.validate_x, rp.x_r, kind, value)


def run_ensemble(
    spec: PotentialSpec,
    params: SimParams,
    sched: ResetSchedule | None = None,
    reset_point: ResetPoint | None = None,
    n_traj: int = 10_000,
    master_seed: int = 0,
    *,
    threads: int | None = None,
    backend: str | None = None,
    start_index: int = 0,
) -> FptSamples:
    """``n_traj`` independent trajectories, stream ``i`` keyed by (master_seed, i).

    The result does not depend on ``threads``.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    sched = sched or NoReset()
    p = params.check(spec)
    rp = reset_point or ResetPoint(p.x0)
    if not (p.x0 < p.absorb_x and rp.x_r < p.absorb_x):
        raise ValueError("initial and reset positions must lie below the absorbing point")
    kernel = _backend.get(backend)
    out = kernel.run_ensemble(*_kernel_args(spec, p, sched, rp), int(master_seed) & ((1 << 64) - 1),
                              int(start_index), int(n_traj), _backend.resolve_threads(threads), False)
    status = np.asarray(out["status"])
    blown = np.flatnonzero(status == 2)
    if len(blown):
        raise NumericalBlowupError(
            f"{len(blown)} trajectories blew up (indices {(blown + start_index).tolist()[:20]})",
            indices=(blown + start_index).tolist(),
        )
    return FptSamples(
        fpt=np.asarray(out["fpt"], dtype=float),
        n_resets=np.asarray(out["n_resets"], dtype=np.int64),
        censored=status == 1,
        max_x=np.asarray(out["max_x"], dtype=float),
        params=p,
        schedule=sched,
        reset_point=rp,
        master_seed=int(master_seed),
        spec=spec,
        start_index=int(start_index),
    )


@dataclass
class ComebackReport:
    n_traj: int
    n_escaped: int
    n_validated: int  # reached validate_x without returning
    n_comebacks: int
    comeback_indices: list[int]
    n_unresolved: int  # ran out of time (or diverged) before validate_x
    absorb_x: float
    validate_x: float

    def as_dict(self) -> dict:
        return asdict(self)


def validate_no_comeback(
    spec: PotentialSpec,
    params: SimParams,
    master_seed: int = 0,
    n_traj: int = 1000,
    *,
    threads: int | None = None,
    backend: str | None = None,
) -> ComebackReport:
    """Follow escaped trajectories past the barrier and count re-entries.

    Each escape is integrated on until ``x > validate_x`` or ``t_max``; any
    return below ``absorb_x`` counts as a comeback. A nonzero count is a
    finding, not an error.
    """
    p = params.check(spec)
    kernel = _backend.get(backend)
    out = kernel.run_ensemble(*_kernel_args(spec, p, NoReset(), ResetPoint(p.x0)),
                              int(master_seed) & ((1 << 64) - 1), 0, int(n_traj),
                              _backend.resolve_threads(threads), True)
    status = np.asarray(out["status"])
    code = np.asarray(out["comeback"])
    escaped = status == 0
    comebacks = np.flatnonzero(escaped & (code == 1))
    return ComebackReport(
        n_traj=int(n_traj),
        n_escaped=int(np.count_nonzero(escaped)),
        n_validated=int(np.count_nonzero(escaped & (code == 2))),
        n_comebacks=len(comebacks),
        comeback_indices=comebacks.tolist(),
        n_unresolved=int(np.count_nonzero(escaped & ((code == 0) | (code == 3)))),
        absorb_x=p.absorb_x,
        validate_x=p.validate_x,
    )
