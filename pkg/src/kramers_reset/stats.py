"""Estimators over first-passage samples.

Monte Carlo summary (population standard deviation, 95% interval of two
standard errors), escape fractions, histograms with peak detection and an
exponential envelope fit, and renewal predictions of resetting MFPTs from
reset-free samples.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .engine import CensoredSamplesError, FptSamples
from .rng import derive_seed


class InsufficientPeaksError(ValueError):
    pass


class NonPositiveFrequencyError(ValueError):
    pass


class NoSuccessfulAttemptError(ValueError):
    """No reset-free sample escapes before the reset period."""


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    std_dev: float
    cv: float
    ci95_half_width: float

    @property
    def std_error(self) -> float:
        return self.std_dev / math.sqrt(self.n)

    def as_dict(self) -> dict:
        return asdict(self)


def summarize_times(fpt) -> SummaryStats:
    x = np.asarray(fpt, dtype=float)
    n = len(x)
    if n == 0:
        raise ValueError("cannot summarize an empty sample")
    if np.isnan(x).any():
        raise CensoredSamplesError("censored (NaN) times present")
    mean = float(x.mean())
    std = float(np.sqrt(np.mean((x - mean) ** 2)))  # 1/N normalization
    cv = std / mean if mean > 0 else math.nan
    return SummaryStats(n, mean, std, cv, 2.0 * std / math.sqrt(n))


def summarize(samples: FptSamples) -> SummaryStats:
    """Mean, population standard deviation, CV and 95% half-width of the FPTs."""
    return summarize_times(samples.complete_times())


def fraction_escaped_by(samples: FptSamples, t: float) -> float:
    if t < 0:
        raise ValueError("t must be non-negative")
    if len(samples) == 0:
        raise ValueError("empty sample set")
    escaped = ~samples.censored & (np.nan_to_num(samples.fpt, nan=math.inf) <= t)
    return float(np.count_nonzero(escaped)) / len(samples)


@dataclass
class Histogram:
    bin_width: float
    rf: np.ndarray  # relative frequency per bin
    origin: float = 0.0

    @property
    def left_edges(self) -> np.ndarray:
        return self.origin + self.bin_width * np.arange(len(self.rf))

    @property
    def centers(self) -> np.ndarray:
        return self.left_edges + 0.5 * self.bin_width

    @property
    def bins(self) -> list[tuple[float, float]]:
        return list(zip(self.left_edges.tolist(), self.rf.tolist()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["left_edge", "right_edge", "relative_frequency"])
        for left, f in zip(self.left_edges, self.rf):
            w.writerow([repr(float(left)), repr(float(left + self.bin_width)), repr(float(f))])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"bin_width": self.bin_width, "origin": self.origin,
               "left_edges": self.left_edges.tolist(), "relative_frequency": self.rf.tolist()}
        return json.dumps(doc, indent=2, sort_keys=True)


def build_histogram(samples: FptSamples, bin_width: float = 0.25) -> Histogram:
    """Relative-frequency histogram on uniform bins ``[k w, (k+1) w)`` from 0 to max(fpt)."""
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    t = samples.complete_times()
    idx = np.floor(t / bin_width).astype(np.int64)
    counts = np.bincount(idx, minlength=int(idx.max()) + 1)
    return Histogram(bin_width, counts / len(t))


def detect_peaks(hist: Histogram, window: int = 2) -> list[tuple[float, float]]:
    """Bins at least as tall as every neighbor within ``window`` bins.

    A peak must also rise strictly from the bin just before it, so a flat
    top resolves to its earliest bin. Times are bin centers.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    rf = hist.rf
    centers = hist.centers
    n = len(rf)
    peaks = []
    for i in range(n):
        if rf[i] <= 0:
            continue
        left = rf[max(0, i - window):i]
        right = rf[i + 1:i + 1 + window]
        if i > 0 and rf[i - 1] >= rf[i]:
            continue
        if (left <= rf[i]).all() and (right <= rf[i]).all():
            peaks.append((float(centers[i]), float(rf[i])))
    return peaks


def strongest_per_period(peaks, period: float, origin: float = 0.0) -> list[tuple[float, float]]:
    """Keep the tallest peak within each ``[origin + j period, origin + (j+1) period)`` window."""
    best: dict[int, tuple[float, float]] = {}
    for t, f in peaks:
        j = int(math.floor((t - origin) / period))
        if j not in best or f > best[j][1]:
            best[j] = (t, f)
    return [best[j] for j in sorted(best)]


@dataclass(frozen=True)
class DecayFit:
    a: float
    b: float
    r_squared: float
    n_points: int

    def predict(self, t):
        return self.a * np.exp(-self.b * np.asarray(t))

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        return "a,b,r_squared,n_points\n" + f"{self.a!r},{self.b!r},{self.r_squared!r},{self.n_points}\n"


def fit_exponential_decay(peaks, weighted: bool = True) -> DecayFit:
    """Log-linear least squares for ``rf = a exp(-b t)``; R^2 in the original scale.

    With ``weighted`` each log-frequency is weighted by its frequency, the
    inverse variance of a log count; otherwise sparse tail peaks dominate.
    """
    if len(peaks) < 3:
        raise InsufficientPeaksError(f"need at least 3 peaks, got {len(peaks)}")
    t = np.array([p[0] for p in peaks], dtype=float)
    f = np.array([p[1] for p in peaks], dtype=float)
    if (f <= 0).any():
        raise NonPositiveFrequencyError("relative frequencies must be positive")
    # polyfit weights multiply residuals, so sqrt(f) gives variance weights f
    w = np.sqrt(f) if weighted else None
    slope, intercept = np.polyfit(t, np.log(f), 1, w=w)
    a, b = math.exp(intercept), -float(slope)
    pred = a * np.exp(-b * t)
    ss_res = float(np.sum((f - pred) ** 2))
    ss_tot = float(np.sum((f - f.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(a, b, min(1.0, max(0.0, r2)), len(t))


# -- renewal identities --------------------------------------------------------


def deterministic_mfpt_from_times(t: np.ndarray, t_r: float) -> float:
    p = np.count_nonzero(t < t_r) / len(t)
    if p == 0:
        raise NoSuccessfulAttemptError(f"no reset-free sample escapes before t_r={t_r}")
    return float(np.minimum(t, t_r).mean() / p)


def poisson_mfpt_from_times(t: np.ndarray, r: float) -> float:
    lap = float(np.exp(-r * t).mean())
    # (1 - L) / (r L), with expm1 for the small-r limit
    return float(-np.expm1(-r * t).mean() / (r * lap))


def renewal_mfpt_deterministic(no_reset: FptSamples, t_r: float) -> float:
    """MFPT under period-``t_r`` restarts: E[min(T, t_r)] / P(T < t_r)."""
    if not t_r > 0:
        raise ValueError("t_r must be positive")
    return deterministic_mfpt_from_times(no_reset.complete_times(), t_r)


def renewal_mfpt_poisson(no_reset: FptSamples, r: float) -> float:
    """MFPT under rate-``r`` Poisson restarts: (1 - L(r)) / (r L(r)), L(r) = E[exp(-r T)]."""
    if not r > 0:
        raise ValueError("r must be positive")
    return poisson_mfpt_from_times(no_reset.complete_times(), r)


@dataclass(frozen=True)
class RenewalPrediction:
    control: float
    mfpt: float
    std_error: float
    n_boot: int


def bootstrap_renewal(no_reset: FptSamples, kind: str, value: float, n_boot: int = 200,
                      seed: int = 0) -> RenewalPrediction:
    """Renewal prediction with a bootstrap standard error over the reset-free samples."""
    t = no_reset.complete_times()
    fn = {"det": deterministic_mfpt_from_times, "poisson": poisson_mfpt_from_times}[kind]
    point = fn(t, value)
    gen = np.random.default_rng(derive_seed(seed, 0xB007, int(value * 1e6)))
    reps = []
    for _ in range(n_boot):
        res = t[gen.integers(0, len(t), len(t))]
        try:
            reps.append(fn(res, value))
        except NoSuccessfulAttemptError:
            reps.append(math.inf)
    reps = np.asarray(reps)
    se = float(np.std(reps, ddof=1)) if np.isfinite(reps).all() else math.inf
    return RenewalPrediction(value, point, se, n_boot)


def z_score(direct: SummaryStats, pred: RenewalPrediction) -> float:
    se = math.sqrt(direct.std_error**2 + pred.std_error**2)
    return (direct.mean - pred.mfpt) / se if se > 0 else math.copysign(math.inf, direct.mean - pred.mfpt)
