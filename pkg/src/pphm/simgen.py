"""Deterministic synthetic data.

All randomness comes from :class:`~pphm.numerics.SplitMix64`: uniforms are
reproducible bit-for-bit, Gaussians through ``normal_quantile`` to within
its approximation error. Draws are consumed in the order documented on each
generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .activity import MAX_MAGNITUDE_G, AccelSample
from .errors import InvalidParams
from .model import BiomarkerSample, BiomarkerSeries, validate_series
from .numerics import SplitMix64
from .predictor import FactorMatrix

KINDS = ("recovery", "drift", "panel", "accel")


def _check(cond, message, param=None):
    if not cond:
        raise InvalidParams(message, param)


def _finite(**kw):
    for name, v in kw.items():
        _check(isinstance(v, (int, float)) and math.isfinite(v),
               f"{name} must be a finite number, got {v!r}", name)


def gen_recovery(a: float, d: float, theta: float, noise_sigma: float, n: int,
                 dt: float, seed: int, subject_id: str = "S1",
                 channel: str = "heart_rate", unit: str = "bpm") -> BiomarkerSeries:
    """Recovery curve sampled at ``t = i*dt`` plus one Gaussian draw per sample."""
    _finite(a=a, d=d, theta=theta, noise_sigma=noise_sigma, dt=dt)
    _check(a < d, "a must be below d", "a")
    _check(theta > 0, "theta must be > 0", "theta")
    _check(noise_sigma >= 0, "sigma must be >= 0", "sigma")
    _check(dt > 0, "dt must be > 0", "dt")
    _check(n >= 1, "n must be >= 1", "n")
    rng = SplitMix64(seed)
    samples = []
    for i in range(n):
        t = i * dt
        v = a + (d - a) * math.exp(-theta * t)
        if noise_sigma > 0:
            v += noise_sigma * rng.gauss()
        samples.append(BiomarkerSample(subject_id, channel, t, v, unit))
    return validate_series(samples)


def gen_drift(start_value: float, slope: float, noise_sigma: float, n: int, dt: float,
              seed: int, subject_id: str = "S1", channel: str = "glucose",
              unit: str = "mg/dL") -> BiomarkerSeries:
    """Linear drift ``start + slope*t`` plus Gaussian noise."""
    _finite(start_value=start_value, slope=slope, noise_sigma=noise_sigma, dt=dt)
    _check(noise_sigma >= 0, "sigma must be >= 0", "sigma")
    _check(dt > 0, "dt must be > 0", "dt")
    _check(n >= 1, "n must be >= 1", "n")
    rng = SplitMix64(seed)
    samples = []
    for i in range(n):
        t = i * dt
        v = start_value + slope * t
        if noise_sigma > 0:
            v += noise_sigma * rng.gauss()
        samples.append(BiomarkerSample(subject_id, channel, t, v, unit))
    return validate_series(samples)


def gen_panel(true_coefficients, m: int, noise_sigma: float, seed: int,
              intercept: float = 0.0) -> FactorMatrix:
    """Factors with a planted linear effect on the target.

    Factor draws fill the matrix row by row, then one noise draw per row.
    Each factor column is z-scored (ddof=1) before the target is formed, so
    the planted coefficients are exactly the standardized coefficients a
    fit should recover.
    """
    coefs = np.asarray(true_coefficients, dtype=float)
    _check(coefs.ndim == 1 and coefs.size >= 1, "need at least one coefficient", "coef")
    _check(bool(np.all(np.isfinite(coefs))), "coefficients must be finite", "coef")
    _finite(noise_sigma=noise_sigma, intercept=intercept)
    _check(noise_sigma >= 0, "sigma must be >= 0", "sigma")
    n = coefs.size
    _check(m >= n + 2, f"m must be >= {n + 2} for {n} factors, got {m}", "m")
    rng = SplitMix64(seed)
    raw = np.array([[rng.gauss() for _ in range(n)] for _ in range(m)])
    noise = np.array([rng.gauss() for _ in range(m)]) * noise_sigma
    z = raw - raw.mean(axis=0)
    z /= np.sqrt((z * z).sum(axis=0) / (m - 1))
    target = intercept + z @ coefs + noise
    names = tuple(f"f{j + 1}" for j in range(n))
    return FactorMatrix(names, z, target)


@dataclass(frozen=True)
class LocationProfile:
    """Magnitude ``1 + amplitude*sin(2*pi*frequency*t) + noise`` in g."""

    amplitude: float = 0.0
    frequency: float = 1.0
    noise_sigma: float = 0.0


def gen_accel(profiles: Mapping[str, LocationProfile], n: int, dt: float, seed: int,
              subject_id: str = "S1") -> list[AccelSample]:
    """One sensor per body location, ``n`` samples each.

    Locations are processed in sorted order. Per location the stream first
    draws two uniforms for a fixed sensor orientation, then one Gaussian per
    sample when ``noise_sigma > 0``. Output is ordered by time, then location.
    """
    _check(bool(profiles), "at least one location profile is required", "profile")
    _finite(dt=dt)
    _check(dt > 0, "dt must be > 0", "dt")
    _check(n >= 1, "n must be >= 1", "n")
    rng = SplitMix64(seed)
    per_loc = {}
    for loc in sorted(profiles):
        p = profiles[loc]
        _finite(amplitude=p.amplitude, frequency=p.frequency, noise_sigma=p.noise_sigma)
        _check(p.noise_sigma >= 0, "noise must be >= 0", "profile")
        cos_polar = 2.0 * rng.uniform() - 1.0
        azim = 2.0 * math.pi * rng.uniform()
        sin_polar = math.sqrt(1.0 - cos_polar * cos_polar)
        ux, uy, uz = sin_polar * math.cos(azim), sin_polar * math.sin(azim), cos_polar
        rows = []
        for i in range(n):
            t = i * dt
            mag = 1.0 + p.amplitude * math.sin(2.0 * math.pi * p.frequency * t)
            if p.noise_sigma > 0:
                mag += p.noise_sigma * rng.gauss()
            _check(abs(mag) <= MAX_MAGNITUDE_G,
                   f"profile for {loc!r} exceeds {MAX_MAGNITUDE_G} g", "profile")
            rows.append(AccelSample(subject_id, f"{loc}-0", loc, t,
                                    mag * ux, mag * uy, mag * uz))
        per_loc[loc] = rows
    return [per_loc[loc][i] for i in range(n) for loc in sorted(per_loc)]


@dataclass(frozen=True)
class SimSpec:
    kind: str
    parameters: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0
    n: int = 100

    def __post_init__(self):
        _check(self.kind in KINDS, f"kind must be one of {KINDS}, got {self.kind!r}", "kind")
        _check(self.n >= 1, "n must be >= 1", "n")


def simulate(spec: SimSpec):
    """Dispatch a :class:`SimSpec` to the matching generator."""
    p = dict(spec.parameters)
    if spec.kind == "recovery":
        return gen_recovery(p.pop("a"), p.pop("d"), p.pop("theta"), p.pop("sigma", 0.0),
                            spec.n, p.pop("dt", 1.0), spec.seed, **p)
    if spec.kind == "drift":
        return gen_drift(p.pop("start"), p.pop("slope"), p.pop("sigma", 0.0),
                         spec.n, p.pop("dt", 1.0), spec.seed, **p)
    if spec.kind == "panel":
        return gen_panel(p.pop("coef"), spec.n, p.pop("sigma", 0.0), spec.seed, **p)
    return gen_accel(p.pop("profiles"), spec.n, p.pop("dt", 0.1), spec.seed, **p)
