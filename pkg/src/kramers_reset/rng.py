"""Counter-based random streams keyed by (master_seed, trajectory_index).

Every draw is a pure function of (key, counter), so a trajectory's noise does
not depend on which worker runs it or in what order. The compiled core
implements the same hash; scalar draws here go through ``math`` (the platform
libm), which is what the compiled core links against.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TWO_PI = 2.0 * math.pi
_INV53 = 1.0 / 9007199254740992.0

NOISE_SUBSTREAM = 0
RESET_SUBSTREAM = 1


def _fmix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def splitmix64(x: int) -> int:
    return _fmix((x + GOLDEN) & MASK64)


def stream_key(master_seed: int, index: int, substream: int) -> int:
    k = splitmix64(master_seed & MASK64)
    k = splitmix64(k ^ (index & MASK64))
    return splitmix64((k + substream) & MASK64)


def derive_seed(master_seed: int, *path: int) -> int:
    """Child seed for sweep points and bootstrap streams."""
    k = splitmix64(master_seed & MASK64)
    for p in path:
        k = splitmix64(k ^ (p & MASK64))
    return k


def raw64(key: int, counter: int) -> int:
    return _fmix((key + (counter + 1) * GOLDEN) & MASK64)


def uniform_open0(key: int, counter: int) -> float:
    """Uniform on (0, 1]."""
    return ((raw64(key, counter) >> 11) + 1) * _INV53


def uniform(key: int, counter: int) -> float:
    """Uniform on [0, 1)."""
    return (raw64(key, counter) >> 11) * _INV53


def normal(key: int, counter: int) -> float:
    """Standard normal number ``counter`` of the stream (Box-Muller pairs)."""
    pair = counter >> 1
    u1 = uniform_open0(key, 2 * pair)
    u2 = uniform(key, 2 * pair + 1)
    r = math.sqrt(-2.0 * math.log(u1))
    if counter & 1:
        return r * math.sin(_TWO_PI * u2)
    return r * math.cos(_TWO_PI * u2)


def exponential(key: int, counter: int, rate: float) -> float:
    return -math.log(uniform_open0(key, counter)) / rate


# -- vectorized twins used by the numpy fallback kernel ----------------------

_G64 = np.uint64(GOLDEN)
_M1_64 = np.uint64(_M1)
_M2_64 = np.uint64(_M2)


def _fmix_vec(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1_64
    z = (z ^ (z >> np.uint64(27))) * _M2_64
    return z ^ (z >> np.uint64(31))


def raw64_vec(keys: np.ndarray, counters) -> np.ndarray:
    c = np.asarray(counters, dtype=np.uint64) + np.uint64(1)
    with np.errstate(over="ignore"):
        return _fmix_vec(keys + c * _G64)


def normal_pair_vec(keys: np.ndarray, pair) -> tuple[np.ndarray, np.ndarray]:
    pair = np.asarray(pair, dtype=np.uint64)
    h1 = raw64_vec(keys, np.uint64(2) * pair)
    h2 = raw64_vec(keys, np.uint64(2) * pair + np.uint64(1))
    u1 = ((h1 >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _INV53
    u2 = (h2 >> np.uint64(11)).astype(np.float64) * _INV53
    r = np.sqrt(-2.0 * np.log(u1))
    th = _TWO_PI * u2
    return r * np.cos(th), r * np.sin(th)


def exponential_vec(keys: np.ndarray, counters, rate: float) -> np.ndarray:
    h = raw64_vec(keys, counters)
    u = ((h >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _INV53
    return -np.log(u) / rate


def stream_keys_vec(master_seed: int, indices, substream: int) -> np.ndarray:
    return np.array([stream_key(master_seed, int(i), substream) for i in indices], dtype=np.uint64)


class RngStream:
    """Deterministic per-trajectory generator.

    Holds two independent substreams: Gaussian noise increments and reset
    epoch draws, so switching the reset protocol never perturbs the noise.
    """

    __slots__ = ("master_seed", "index", "noise_key", "reset_key", "noise_counter", "reset_counter")

    def __init__(self, master_seed: int, index: int = 0):
        self.master_seed = int(master_seed)
        self.index = int(index)
        self.noise_key = stream_key(self.master_seed, self.index, NOISE_SUBSTREAM)
        self.reset_key = stream_key(self.master_seed, self.index, RESET_SUBSTREAM)
        self.noise_counter = 0
        self.reset_counter = 0

    def standard_normal(self) -> float:
        z = normal(self.noise_key, self.noise_counter)
        self.noise_counter += 1
        return z

    def gaussian_increment(self, dt: float) -> float:
        """One Wiener increment, Normal(0, dt)."""
        if not dt > 0:
            raise ValueError("dt must be positive")
        return math.sqrt(dt) * self.standard_normal()

    def exponential(self, rate: float) -> float:
        e = exponential(self.reset_key, self.reset_counter, rate)
        self.reset_counter += 1
        return e

    def __repr__(self) -> str:
        return (
            f"RngStream(master_seed={self.master_seed}, index={self.index}, "
            f"noise_counter={self.noise_counter}, reset_counter={self.reset_counter})"
        )
