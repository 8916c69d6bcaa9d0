"""Accelerometer windows, per-location load ranking and k-means clustering.

Features use only the acceleration magnitude, so sensor orientation inside
clothing does not matter.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInput, InputError, KTooLarge, NonFiniteValue, UnorderedStream
from .numerics import SplitMix64

MAX_MAGNITUDE_G = 16.0
MAX_LLOYD_ITER = 300


@dataclass(frozen=True)
class AccelSample:
    subject_id: str
    sensor_id: str
    body_location: str
    t: float
    ax: float
    ay: float
    az: float

    def __post_init__(self):
        comps = (self.t, self.ax, self.ay, self.az)
        if not all(math.isfinite(c) for c in comps):
            raise NonFiniteValue(what="accelerometer field")
        if math.sqrt(self.ax ** 2 + self.ay ** 2 + self.az ** 2) > MAX_MAGNITUDE_G:
            raise InputError(
                f"sensor {self.sensor_id!r} at t={self.t}: |a| exceeds {MAX_MAGNITUDE_G} g")

    @property
    def magnitude(self) -> float:
        return math.sqrt(self.ax * self.ax + self.ay * self.ay + self.az * self.az)


@dataclass(frozen=True)
class ActivityFeatures:
    subject_id: str
    sensor_id: str
    body_location: str
    window_start_t: float
    window_end_t: float
    mean_magnitude: float
    variance: float
    rms_jerk: float
    n: int

    def vector(self) -> tuple[float, float, float]:
        return (self.mean_magnitude, self.variance, self.rms_jerk)


def _features(sample_group, start, end):
    t = np.array([s.t for s in sample_group])
    mag = np.array([s.magnitude for s in sample_group])
    mean = float(mag.mean())
    dev = mag - mean
    variance = float(dev @ dev) / mag.size
    jerk = np.diff(mag) / np.diff(t)
    rms_jerk = math.sqrt(float(jerk @ jerk) / jerk.size)
    first = sample_group[0]
    return ActivityFeatures(first.subject_id, first.sensor_id, first.body_location,
                            start, end, mean, variance, rms_jerk, len(sample_group))


def window_features(stream: Iterable[AccelSample], window: float) -> list[ActivityFeatures]:
    """Tumbling-window features per sensor.

    Windows are ``[t0 + k*window, t0 + (k+1)*window)`` with ``t0`` the first
    sample time of each sensor; windows holding fewer than two samples are
    dropped. Output is ordered by sensor id, then window start.
    """
    if not window > 0:
        raise InputError(f"window must be > 0, got {window!r}")
    by_sensor: dict[str, list[AccelSample]] = defaultdict(list)
    for s in stream:
        group = by_sensor[s.sensor_id]
        if group and not s.t > group[-1].t:
            raise UnorderedStream(s.sensor_id)
        group.append(s)

    out = []
    for sensor_id in sorted(by_sensor):
        samples = by_sensor[sensor_id]
        t0 = samples[0].t
        current, k = [], 0
        for s in samples:
            idx = int(math.floor((s.t - t0) / window))
            if idx != k:
                if len(current) >= 2:
                    out.append(_features(current, t0 + k * window, t0 + (k + 1) * window))
                current, k = [], idx
            current.append(s)
        if len(current) >= 2:
            out.append(_features(current, t0 + k * window, t0 + (k + 1) * window))
    return out


def load_score(f: ActivityFeatures) -> float:
    """Composite load of one window: variance + (rms_jerk * window length)**2."""
    w = f.window_end_t - f.window_start_t
    return f.variance + f.rms_jerk ** 2 * w ** 2


def load_distribution(features: Sequence[ActivityFeatures]) -> list[tuple[str, float]]:
    """Mean load score per body location, highest first; ties by label."""
    if not features:
        raise EmptyInput("feature list")
    scores: dict[str, list[float]] = defaultdict(list)
    for f in features:
        scores[f.body_location].append(load_score(f))
    ranked = [(loc, float(np.mean(v))) for loc, v in scores.items()]
    ranked.sort(key=lambda kv: (-kv[1], kv[0]))
    return ranked


@dataclass(frozen=True)
class KMeansResult:
    assignments: np.ndarray
    centroids: np.ndarray
    within_ss: float
    iterations: int
    history: tuple[float, ...]

    def __iter__(self):
        return iter((self.assignments, self.centroids, self.within_ss))


def _farthest_point_init(x, k, start):
    chosen = [start]
    d2 = ((x - x[start]) ** 2).sum(axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(d2))  # first index on ties
        chosen.append(nxt)
        d2 = np.minimum(d2, ((x - x[nxt]) ** 2).sum(axis=1))
    return x[chosen].copy()


def _assign(x, centroids):
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    return labels, float(d2[np.arange(x.shape[0]), labels].sum())


def _lloyd(x, centroids, max_iter):
    labels, wss = _assign(x, centroids)
    history = [wss]
    it = 0
    while it < max_iter:
        it += 1
        for j in range(centroids.shape[0]):
            members = x[labels == j]
            if members.shape[0]:
                centroids[j] = members.mean(axis=0)
        new_labels, wss = _assign(x, centroids)
        history.append(wss)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels, centroids, wss, it, history


def kmeans(points, k: int, seed: int = 0, n_starts: int = 10,
           exhaustive_limit: int = 512) -> KMeansResult:
    """Lloyd's k-means with deterministic multi-start initialization.

    Candidate starting centres, in order:

    1. ``n_starts`` greedy farthest-point initializations. The first centre
       of each is taken from a SplitMix64-driven shuffle of the point
       indices (seeded by ``seed``); the rest are the points farthest from
       the centres already chosen.
    2. When there are at most ``exhaustive_limit`` of them, every k-subset
       of the points. Small problems then reach the global optimum in
       practice, where a single farthest-point start often stalls in a
       poor fixed point.

    Each candidate is refined by Lloyd iterations until assignments are
    stable or 300 iterations pass. The lowest ``within_ss`` wins, earliest
    candidate on ties. ``history`` is the objective after every assignment
    step of the winning run.
    """
    x = np.asarray(points, dtype=float)
    if x.size == 0:
        raise EmptyInput("point set")
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise InputError("points must be a sequence of equal-length vectors")
    if not k >= 1:
        raise InputError(f"k must be >= 1, got {k!r}")
    distinct = np.unique(x, axis=0).shape[0]
    if k > distinct:
        raise KTooLarge(k, distinct)
    n = x.shape[0]

    rng = SplitMix64(seed)
    order = list(range(n))
    for i in range(n - 1, 0, -1):  # Fisher-Yates
        j = rng.below(i + 1)
        order[i], order[j] = order[j], order[i]
    candidates = [_farthest_point_init(x, k, start) for start in order[:max(1, min(n_starts, n))]]
    if math.comb(n, k) <= exhaustive_limit:
        candidates.extend(x[list(subset)].copy() for subset in combinations(range(n), k))

    best = None
    for centroids in candidates:
        labels, centroids, wss, it, history = _lloyd(x, centroids, MAX_LLOYD_ITER)
        if best is None or wss < best.within_ss:
            best = KMeansResult(labels, centroids, wss, it, tuple(history))
    return best
