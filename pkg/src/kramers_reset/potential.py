"""Cubic single-well potential V(x) = alpha x^2/2 - beta x^3/3."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class InvalidSpecError(ValueError):
    """Raised when the potential coefficients do not describe a well with a barrier."""


class Landmarks(NamedTuple):
    x_minus: float
    x_plus: float
    barrier_height: float


@dataclass(frozen=True)
class PotentialSpec:
    alpha: float = 6.0
    beta: float = 1.0

    def validate(self) -> "PotentialSpec":
        if not (self.alpha > 0 and self.beta > 0):
            raise InvalidSpecError(
                f"alpha and beta must be positive, got alpha={self.alpha!r} beta={self.beta!r}"
            )
        return self


def evaluate(spec: PotentialSpec, x):
    """Potential energy at ``x`` (scalar or array)."""
    return spec.alpha * x * x / 2.0 - spec.beta * x * x * x / 3.0


def gradient(spec: PotentialSpec, x):
    return spec.alpha * x - spec.beta * x * x


def landmarks(spec: PotentialSpec) -> Landmarks:
    """Left turning point, barrier top and barrier height of the well.

    Both turning points sit at the barrier energy ``alpha**3 / (6 beta**2)``.
    """
    spec.validate()
    a, b = spec.alpha, spec.beta
    return Landmarks(-a / (2.0 * b), a / b, a**3 / (6.0 * b * b))


def total_energy(spec: PotentialSpec, x, v):
    """Kinetic plus potential energy for a unit-mass particle."""
    return 0.5 * v * v + evaluate(spec, x)


def left_position_at_energy(spec: PotentialSpec, energy: float) -> float:
    """Position on the left branch ``x_minus <= x <= 0`` where ``V(x) == energy``.

    Used to map an energy level to a resting initial condition.
    """
    lm = landmarks(spec)
    if not 0.0 <= energy <= lm.barrier_height:
        raise ValueError(f"energy {energy} outside [0, {lm.barrier_height}]")
    # V is strictly decreasing on [x_minus, 0]; pick the real root in that interval
    roots = np.roots([-spec.beta / 3.0, spec.alpha / 2.0, 0.0, -energy])
    real = sorted(r.real for r in roots if abs(r.imag) < 1e-9)
    cands = [r for r in real if lm.x_minus - 1e-9 <= r <= 1e-12]
    if not cands:
        raise ValueError(f"no left-branch root for energy {energy}")
    # polish with a few Newton steps
    x = min(max(cands[0], lm.x_minus), 0.0)
    for _ in range(3):
        g = gradient(spec, x)
        if g == 0.0:
            break
        x -= (evaluate(spec, x) - energy) / g
    return float(min(max(x, lm.x_minus), 0.0))
