"""Heart-rate recovery curve.

The recovery after exercise is modelled as

    f(t) = a + (d - a) * exp(-theta * t) + noise

with ``a`` the resting rate, ``d`` the rate at the end of the exercise and
``theta`` the recovery rate. Given ``theta`` the model is linear in
``(a, d)``, so the fit eliminates them and optimizes ``theta`` alone
(variable projection) with a Levenberg-damped Gauss-Newton iteration.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateElevation,
    ImplausibleFit,
    InputError,
    InvalidFraction,
    NegativeTime,
    TooFewPoints,
)
from .model import BiomarkerSeries

THETA_MIN = 1e-4
THETA_MAX = 1.0
DEFAULT_HRRT_FRACTION = 0.05


class NoConvergenceWarning(RuntimeWarning):
    """The fit hit ``max_iter`` and returned its best point so far."""


@dataclass(frozen=True)
class RecoveryModel:
    a: float
    d: float
    theta: float

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.a, self.d, self.theta)):
            raise ImplausibleFit("recovery parameters must be finite")
        if self.theta <= 0:
            raise ImplausibleFit(f"theta must be > 0, got {self.theta!r}")
        if self.d <= self.a:
            raise ImplausibleFit(f"d ({self.d!r}) must exceed a ({self.a!r})")
        if not 30.0 <= self.a <= 240.0:
            raise ImplausibleFit(f"resting rate a={self.a!r} outside [30, 240] bpm")


@dataclass(frozen=True)
class FitConfig:
    tol: float = 1e-8
    max_iter: int = 200
    hrrt_fraction: float = DEFAULT_HRRT_FRACTION

    def __post_init__(self):
        if not self.tol > 0:
            raise InputError(f"tol must be > 0, got {self.tol!r}")
        if self.max_iter < 1:
            raise InputError(f"max_iter must be >= 1, got {self.max_iter!r}")
        if not 0 < self.hrrt_fraction < 1:
            raise InvalidFraction(self.hrrt_fraction)


@dataclass(frozen=True)
class FitResult:
    model: RecoveryModel
    rss: float
    residual_std: float
    iterations: int
    converged: bool


def eval_recovery(model: RecoveryModel, t):
    """Deterministic part of the recovery curve at time(s) ``t`` (seconds)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise NegativeTime(float(t_arr.min()))
    out = model.a + (model.d - model.a) * np.exp(-model.theta * t_arr)
    return float(out) if out.ndim == 0 else out


def recovery_time(model_or_theta, p: float = DEFAULT_HRRT_FRACTION) -> float:
    """Time for the elevation above rest to decay to fraction ``p``.

    Accepts a :class:`RecoveryModel` or a bare rate coefficient.
    """
    theta = getattr(model_or_theta, "theta", model_or_theta)
    if not 0 < p < 1:
        raise InvalidFraction(p)
    return math.log(1.0 / p) / theta


def _linear_part(e, y):
    # least squares of y on [1, e]; centered form avoids the 2x2 normal matrix
    em = e.mean()
    ym = y.mean()
    ec = e - em
    see = float(ec @ ec)
    if see == 0.0:
        return ym, 0.0
    c1 = float(ec @ (y - ym)) / see
    return ym - c1 * em, c1


def _residual(theta, t, y):
    e = np.exp(-theta * t)
    c0, c1 = _linear_part(e, y)
    r = y - c0 - c1 * e
    return r, e, c0, c1


def _jacobian(t, e, c1, r):
    # derivative of the projected residual with respect to theta
    # (Golub-Pereyra, both terms kept)
    n = t.size
    de = -t * e
    v = c1 * de
    p0, p1 = _linear_part(e, v)
    term1 = v - p0 - p1 * e
    # Phi (Phi^T Phi)^{-1} Phi'^T r, with Phi = [1, e], Phi' = [0, de]
    s_e = float(e.sum())
    s_ee = float(e @ e)
    det = n * s_ee - s_e * s_e
    if det == 0.0:
        return -term1
    g = float(de @ r)
    # (Phi^T Phi)^{-1} [0, g]
    w0 = -s_e * g / det
    w1 = n * g / det
    term2 = w0 + w1 * e
    return -(term1 + term2)


def _initial_theta(t, y):
    a0 = float(y.min())
    half = max(2, t.size // 2)
    tt = t[:half]
    ly = np.log(y[:half] - a0 + 0.5)
    tc = tt - tt.mean()
    stt = float(tc @ tc)
    slope = float(tc @ (ly - ly.mean())) / stt if stt > 0 else 0.0
    return min(max(-slope, THETA_MIN), THETA_MAX)


def fit_recovery(series: BiomarkerSeries, config: FitConfig | None = None) -> FitResult:
    """Least-squares fit of the recovery curve to ``series``.

    Times are used as given; the series is assumed to start at recovery
    onset. When ``max_iter`` is exhausted the best point found is returned
    with ``converged=False`` and a :class:`NoConvergenceWarning` is issued.

    Raises
    ------
    TooFewPoints
        fewer than 4 samples.
    DegenerateElevation
        the fitted elevation ``d - a`` is below 1 bpm.
    """
    config = config or FitConfig()
    n = len(series)
    if n < 4:
        raise TooFewPoints(n)
    t = series.t
    y = series.values

    theta = _initial_theta(t, y)
    r, e, c0, c1 = _residual(theta, t, y)
    rss = float(r @ r)
    lam = 1e-3
    converged = False
    iterations = 0
    while iterations < config.max_iter and not converged:
        iterations += 1
        jac = _jacobian(t, e, c1, r)
        grad = float(jac @ r)
        hess = float(jac @ jac)
        if hess == 0.0 or grad == 0.0:
            converged = True
            break
        if abs(grad / hess) <= config.tol * theta:
            # undamped Gauss-Newton step is below tolerance
            converged = True
            break
        while True:
            step = -grad / (hess * (1.0 + lam))
            trial = theta + step
            if trial > 0:
                r_t, e_t, c0_t, c1_t = _residual(trial, t, y)
                rss_t = float(r_t @ r_t)
                if rss_t <= rss:
                    theta, r, e, c0, c1, rss = trial, r_t, e_t, c0_t, c1_t, rss_t
                    lam = max(lam / 10.0, 1e-12)
                    break
            lam *= 10.0
            if lam > 1e16:
                # no descent possible at machine precision
                converged = True
                break

    if not converged:
        warnings.warn(
            f"recovery fit did not converge in {config.max_iter} iterations",
            NoConvergenceWarning, stacklevel=2)

    a = c0
    d = c0 + c1
    if not d - a >= 1.0:
        raise DegenerateElevation(d - a)
    model = RecoveryModel(a=a, d=d, theta=theta)
    dof = n - 3
    residual_std = math.sqrt(rss / dof) if dof > 0 else 0.0
    return FitResult(model=model, rss=rss, residual_std=residual_std,
                     iterations=max(iterations, 1), converged=converged)
