"""Span segmentation and forecast quality metrics (NMSE, valid time)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpanLayout",
    "ForecastResult",
    "MetricRecord",
    "segment",
    "nmse_series",
    "mean_nmse",
    "valid_time",
    "failure_metrics",
    "space_time_separation",
]


@dataclass(frozen=True)
class SpanLayout:
    """Step counts dividing one long record into training and test material.

    Defaults reproduce the full-scale layout: 1000 training steps, a 1000
    step gap, then 20 disjoint (100 warm-up + 2500 test) segments separated
    by 400 step gaps, for 62000 steps at dt = 0.1 s.
    """

    training: int = 1000
    train_test_gap: int = 1000
    warmup: int = 100
    test: int = 2500
    test_test_gap: int = 400
    n_tests: int = 20
    dt: float = 0.1

    def __post_init__(self):
        for name in ("training", "train_test_gap", "warmup", "test", "test_test_gap", "n_tests"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def total_steps(self) -> int:
        return (self.training + self.train_test_gap
                + self.n_tests * (self.warmup + self.test + self.test_test_gap))


@dataclass(frozen=True)
class ForecastResult:
    """Predicted and ground-truth component trajectories over one test span."""

    prediction: np.ndarray  # D_u x H
    truth: np.ndarray       # D_u x H
    dt: float

    def __post_init__(self):
        if self.prediction.shape != self.truth.shape:
            raise ValueError("prediction and truth must have equal shapes")
        if self.prediction.ndim != 2 or self.prediction.shape[1] < 1:
            raise ValueError("need at least one forecast step")


@dataclass(frozen=True)
class MetricRecord:
    """One (model, instantiation, span) evaluation row as written to CSV."""

    task: str
    regime: str
    model: str  # "standard" | "hybrid" | "ode"
    param_name: str
    param_value: float
    instantiation: int
    span: int
    mean_nmse: float
    valid_time: float  # seconds


def segment(record: np.ndarray, layout: SpanLayout):
    """Split a long record into the training span and (warm-up, test) pairs.

    The training span carries one extra trailing sample so it yields exactly
    `layout.training` next-step transitions.  Warm-up k starts at step
    training + train_test_gap + k*(warmup + test + test_test_gap).
    """
    needed = layout.total_steps - layout.test_test_gap
    if record.ndim != 2 or record.shape[1] < needed:
        raise ValueError(
            f"record has {record.shape[1]} samples; layout requires at least {needed}"
        )
    training = record[:, : layout.training + 1]
    spans = []
    stride = layout.warmup + layout.test + layout.test_test_gap
    start0 = layout.training + layout.train_test_gap
    for k in range(layout.n_tests):
        s = start0 + k * stride
        spans.append((record[:, s : s + layout.warmup],
                      record[:, s + layout.warmup : s + layout.warmup + layout.test]))
    return training, spans


def nmse_series(fr: ForecastResult) -> np.ndarray:
    """NMSE(t) = ||u(t) - u*(t)|| / rms_tau ||u(tau)||, per forecast step.

    The denominator is the root-mean-square norm of the test span's ground
    truth (sqrt(N) exactly for unit-circle states).
    """
    denom = np.sqrt(np.mean(np.sum(fr.truth ** 2, axis=0)))
    if denom == 0.0:
        raise ValueError("NMSE undefined: ground truth is identically zero")
    return np.linalg.norm(fr.truth - fr.prediction, axis=0) / denom


def mean_nmse(fr: ForecastResult) -> float:
    """Arithmetic mean of the NMSE series over the whole forecast."""
    return float(np.mean(nmse_series(fr)))


def valid_time(fr: ForecastResult, epsilon: float = 0.4) -> float:
    """Duration (s) of the longest prefix with NMSE <= epsilon throughout.

    The first prediction carries timestamp dt; a forecast whose very first
    sample exceeds epsilon scores 0, and one that never does scores H*dt.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    series = nmse_series(fr)
    bad = np.flatnonzero(series > epsilon)
    n_ok = series.size if bad.size == 0 else int(bad[0])
    return n_ok * fr.dt


def failure_metrics(partial: np.ndarray, truth: np.ndarray, dt: float,
                    epsilon: float = 0.4):
    """Score an aborted forecast: worst-case padding, never a dropped record.

    The NMSE series of the surviving prefix is padded with 2.0 (the
    antipodal-forecast level) out to the full horizon for the mean; valid
    time comes from the prefix alone.
    """
    horizon = truth.shape[1]
    k = partial.shape[1]
    if k == 0:
        return 2.0, 0.0
    fr = ForecastResult(prediction=partial, truth=truth[:, :k], dt=dt)
    series = np.concatenate([nmse_series(fr), np.full(horizon - k, 2.0)])
    bad = np.flatnonzero(series > epsilon)
    n_ok = series.size if bad.size == 0 else int(bad[0])
    return float(np.mean(series)), n_ok * dt


def space_time_separation(record: np.ndarray, dt: float, max_lag: int, stride: int = 1):
    """Pairwise Euclidean separations of samples at every lag up to max_lag.

    Returns (lags_seconds, distances) where distances[k] is the array of
    separations at lag k*stride steps, subsampled by `stride` along the
    record for tractability.
    """
    if record.ndim != 2:
        raise ValueError("record must be a 2-d matrix")
    n = record.shape[1]
    if max_lag >= n:
        raise ValueError("max_lag must be smaller than the record length")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    lags = np.arange(0, max_lag + 1, stride)
    distances = []
    for lag in lags:
        a = record[:, : n - lag : stride]
        b = record[:, lag :: stride][:, : a.shape[1]]
        distances.append(np.linalg.norm(a - b, axis=0))
    return lags * dt, distances
