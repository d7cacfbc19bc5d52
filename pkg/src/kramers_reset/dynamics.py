"""Underdamped Langevin dynamics  x'' + eta x' + V'(x) = xi(t), unit mass.

The SDE is integrated as the pair

    dx = v dt
    dv = (-eta v - V'(x)) dt + sigma dW

with a fixed-step stochastic Heun scheme (strong order 1 for additive noise).
``sigma`` is ``eps`` under the default ``noise="amplitude"`` convention and
``sqrt(eps)`` under ``noise="intensity"``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .potential import PotentialSpec, gradient, landmarks
from .rng import RngStream

NOISE_CONVENTIONS = ("amplitude", "intensity")


class NumericalBlowupError(FloatingPointError):
    """A step produced a non-finite state."""

    def __init__(self, message: str, state: "State | None" = None, indices=None):
        super().__init__(message)
        self.state = state
        self.indices = list(indices) if indices is not None else []


class LightDampingWarning(UserWarning):
    pass


class State(NamedTuple):
    x: float
    v: float
    t: float


@dataclass(frozen=True)
class SimParams:
    eta: float = 0.1
    eps: float = 1.8
    x0: float = -2.899
    v0: float = 0.0
    dt: float = 1e-3
    t_max: float = 1e5
    absorb_x: float | None = None
    validate_x: float = 100.0
    noise: str = "amplitude"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_max > 0:
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if self.eps < 0 or self.eta < 0:
            raise ValueError("eps and eta must be non-negative")
        if self.noise not in NOISE_CONVENTIONS:
            raise ValueError(f"noise must be one of {NOISE_CONVENTIONS}, got {self.noise!r}")
        if self.absorb_x is not None and not self.validate_x > self.absorb_x:
            raise ValueError("validate_x must lie beyond absorb_x")
        for name in ("eta", "eps", "x0", "v0"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def noise_amplitude(self) -> float:
        """Coefficient of dW in the velocity equation."""
        return self.eps if self.noise == "amplitude" else math.sqrt(self.eps)

    @property
    def diffusion(self) -> float:
        """D such that <xi(t) xi(t')> = 2 D delta(t - t')."""
        return 0.5 * self.noise_amplitude**2

    @property
    def thermal_energy(self) -> float:
        """k_B T from the fluctuation-dissipation relation 2 D = 2 eta k_B T."""
        if self.eta == 0:
            return math.inf
        return self.diffusion / self.eta

    def light_damping(self, spec: PotentialSpec) -> bool:
        # omega_0^2 = V''(0) = alpha
        return self.eta**2 < spec.alpha

    def resolved(self, spec: PotentialSpec) -> "SimParams":
        """Copy with ``absorb_x`` filled in from the barrier top."""
        if self.absorb_x is not None:
            return self
        return replace(self, absorb_x=landmarks(spec).x_plus)

    def check(self, spec: PotentialSpec) -> "SimParams":
        p = self.resolved(spec)
        if not p.validate_x > p.absorb_x:
            raise ValueError("validate_x must lie beyond absorb_x")
        if not p.light_damping(spec):
            warnings.warn(
                f"eta^2={p.eta**2:g} >= omega_0^2={spec.alpha:g}: outside the light-damping range",
                LightDampingWarning,
                stacklevel=2,
            )
        return p


def drift(spec: PotentialSpec, params: SimParams, s: State) -> tuple[float, float]:
    return s.v, -params.eta * s.v - gradient(spec, s.x)


def step(spec: PotentialSpec, params: SimParams, s: State, dW: float) -> State:
    """Advance one stochastic Heun step; ``dW`` ~ Normal(0, dt)."""
    dt = params.dt
    noise = params.noise_amplitude * dW
    ax, av = s.v, -params.eta * s.v - gradient(spec, s.x)
    xp = s.x + dt * ax
    vp = s.v + dt * av + noise
    bx, bv = vp, -params.eta * vp - gradient(spec, xp)
    x = s.x + 0.5 * dt * (ax + bx)
    v = s.v + 0.5 * dt * (av + bv) + noise
    out = State(x, v, s.t + dt)
    if not (math.isfinite(x) and math.isfinite(v)):
        raise NumericalBlowupError(f"non-finite state after step from {s}", state=out)
    return out


def gaussian_increment(rng: RngStream, dt: float) -> float:
    return rng.gaussian_increment(dt)


def simulate_path(spec: PotentialSpec, params: SimParams, n_steps: int, rng: RngStream | None = None,
                  state: State | None = None, stop_above: float | None = None):
    """Record (t, x, v) along ``n_steps`` Heun steps; noiseless when ``rng`` is None.

    Stops early once ``x`` exceeds ``stop_above``.
    """
    s = state or State(params.x0, params.v0, 0.0)
    ts, xs, vs = [s.t], [s.x], [s.v]
    for _ in range(n_steps):
        dW = rng.gaussian_increment(params.dt) if rng is not None else 0.0
        s = step(spec, params, s, dW)
        ts.append(s.t)
        xs.append(s.x)
        vs.append(s.v)
        if stop_above is not None and s.x > stop_above:
            break
    return np.array(ts), np.array(xs), np.array(vs)
