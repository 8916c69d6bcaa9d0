"""Zone classification, trend extrapolation and alert generation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import InputError, PastTime, TooFewPointsInWindow
from .model import BiomarkerSeries
from .numerics import two_sided_z


class Zone(str, Enum):
    NORMAL = "Normal"
    ABNORMAL = "Abnormal"
    RISK = "Risk"


class AlertKind(str, Enum):
    ENTERED_ABNORMAL = "EnteredAbnormal"
    ENTERED_RISK = "EnteredRisk"
    PREDICTED_CROSSING = "PredictedCrossing"


LIMIT_NAMES = ("lower_normal", "upper_normal", "lower_risk", "upper_risk")


@dataclass(frozen=True)
class ThresholdBand:
    """Normal (discriminatory) limits plus more extreme risk limits.

    Any limit may be omitted; an omitted normal limit leaves that side
    unbounded. ``confidence`` sets the coverage of forecast intervals.
    """

    channel: str
    lower_normal: Optional[float] = None
    upper_normal: Optional[float] = None
    lower_risk: Optional[float] = None
    upper_risk: Optional[float] = None
    confidence: float = 0.95

    def __post_init__(self):
        present = self.limits()
        if not present:
            raise InputError(f"band for {self.channel!r} defines no limits")
        for name, v in present.items():
            if not math.isfinite(v):
                raise InputError(f"band {self.channel!r}: {name} is not finite")
        if not 0.0 < self.confidence < 1.0:
            raise InputError(f"band {self.channel!r}: confidence must lie in (0, 1)")
        if self.lower_normal is not None and self.upper_normal is not None \
                and self.lower_normal > self.upper_normal:
            raise InputError(f"band {self.channel!r}: lower_normal > upper_normal")
        if self.lower_risk is not None and self.lower_normal is not None \
                and not self.lower_risk < self.lower_normal:
            raise InputError(f"band {self.channel!r}: lower_risk must be below lower_normal")
        if self.upper_risk is not None and self.upper_normal is not None \
                and not self.upper_risk > self.upper_normal:
            raise InputError(f"band {self.channel!r}: upper_risk must be above upper_normal")

    def limits(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in LIMIT_NAMES
                if getattr(self, name) is not None}

    def shifted(self, c: float) -> "ThresholdBand":
        kw = {name: (v + c if v is not None else None)
              for name, v in ((n, getattr(self, n)) for n in LIMIT_NAMES)}
        return ThresholdBand(self.channel, confidence=self.confidence, **kw)


@dataclass(frozen=True)
class TrendModel:
    slope: float
    intercept: float
    residual_std: float
    n: int
    window_start_t: float
    window_end_t: float
    # needed by the prediction interval
    t_mean: float = 0.0
    sxx: float = 0.0


@dataclass(frozen=True)
class Crossing:
    t_cross: float
    limit: str
    value: float
    direction: str  # "rising" or "falling"


@dataclass(frozen=True)
class Alert:
    subject_id: str
    channel: str
    kind: AlertKind
    t_issued: float
    t_predicted: Optional[float] = None
    detail: str = ""
    limit: Optional[str] = None

    def __post_init__(self):
        if self.kind is AlertKind.PREDICTED_CROSSING:
            if self.t_predicted is None or self.t_predicted < self.t_issued:
                raise ValueError("PredictedCrossing needs t_predicted >= t_issued")

    def to_dict(self) -> dict:
        return {
            "subject_id": self.subject_id,
            "channel": self.channel,
            "kind": self.kind.value,
            "t_issued": self.t_issued,
            "t_predicted": self.t_predicted,
            "limit": self.limit,
            "detail": self.detail,
        }


def classify(value: float, band: ThresholdBand) -> Zone:
    """Zone of ``value``: closed normal interval, strict risk limits."""
    if band.upper_risk is not None and value > band.upper_risk:
        return Zone.RISK
    if band.lower_risk is not None and value < band.lower_risk:
        return Zone.RISK
    lo_ok = band.lower_normal is None or value >= band.lower_normal
    hi_ok = band.upper_normal is None or value <= band.upper_normal
    return Zone.NORMAL if lo_ok and hi_ok else Zone.ABNORMAL


def fit_trend(series: BiomarkerSeries, window: float) -> TrendModel:
    """OLS line over the samples within ``window`` seconds of the last one.

    ``intercept`` is the fitted value at the first sample inside the window.
    """
    t = series.t
    y = series.values
    mask = t >= t[-1] - window
    tw = t[mask]
    yw = y[mask]
    n = int(tw.size)
    if n < 2:
        raise TooFewPointsInWindow(n, window)
    t0 = float(tw[0])
    x = tw - t0
    xm = float(x.mean())
    xc = x - xm
    sxx = float(xc @ xc)
    ym = float(yw.mean())
    slope = float(xc @ (yw - ym)) / sxx
    intercept = ym - slope * xm
    resid = yw - (intercept + slope * x)
    rss = float(resid @ resid)
    residual_std = math.sqrt(rss / (n - 2)) if n > 2 else 0.0
    return TrendModel(slope=slope, intercept=intercept, residual_std=residual_std,
                      n=n, window_start_t=t0, window_end_t=float(tw[-1]),
                      t_mean=t0 + xm, sxx=sxx)


def forecast_value(trend: TrendModel, t_future: float,
                   confidence: float = 0.95) -> tuple[float, float]:
    """Point forecast at ``t_future`` and the half-width of its prediction interval."""
    if t_future < trend.window_end_t:
        raise PastTime(t_future, trend.window_end_t)
    point = trend.intercept + trend.slope * (t_future - trend.window_start_t)
    if trend.residual_std == 0.0:
        return point, 0.0
    z = two_sided_z(confidence)
    lever = (t_future - trend.t_mean) ** 2 / trend.sxx
    half = z * trend.residual_std * math.sqrt(1.0 + 1.0 / trend.n + lever)
    return point, half


def _crossings(trend: TrendModel, band: ThresholdBand, horizon: float) -> list[Crossing]:
    if trend.slope == 0.0:
        return []
    out = []
    lo = trend.window_end_t
    hi = trend.window_end_t + horizon
    direction = "rising" if trend.slope > 0 else "falling"
    for name, limit in band.limits().items():
        t_cross = trend.window_start_t + (limit - trend.intercept) / trend.slope
        if lo < t_cross <= hi:
            out.append(Crossing(t_cross, name, limit, direction))
    out.sort(key=lambda c: (c.t_cross, LIMIT_NAMES.index(c.limit)))
    return out


def forecast_crossing(series: BiomarkerSeries, band: ThresholdBand, window: float,
                      horizon: float) -> Optional[Crossing]:
    """Earliest time in ``(window_end, window_end + horizon]`` at which the
    fitted trend meets any band limit, or ``None``."""
    trend = fit_trend(series, window)
    found = _crossings(trend, band, horizon)
    return found[0] if found else None


_ZONE_ALERT = {Zone.ABNORMAL: AlertKind.ENTERED_ABNORMAL, Zone.RISK: AlertKind.ENTERED_RISK}


def evaluate_alerts(previous: Zone, series: BiomarkerSeries, band: ThresholdBand,
                    window: float, horizon: float) -> list[Alert]:
    latest = series[-1]
    zone = classify(latest.value, band)
    alerts = []
    if zone is not previous and zone in _ZONE_ALERT:
        alerts.append(Alert(series.subject_id, series.channel, _ZONE_ALERT[zone],
                            latest.t, None,
                            f"{series.channel} {latest.value:g} moved from "
                            f"{previous.value} to {zone.value}"))
    try:
        crossing = forecast_crossing(series, band, window, horizon)
    except TooFewPointsInWindow:
        crossing = None
    if crossing is not None:
        alerts.append(Alert(
            series.subject_id, series.channel, AlertKind.PREDICTED_CROSSING,
            latest.t, crossing.t_cross,
            f"{series.channel} trend {crossing.direction} toward {crossing.limit} "
            f"{crossing.value:g} at t={crossing.t_cross:.6g} s",
            crossing.limit))
    return alerts


@dataclass
class AlertTracker:
    """Per-series alert state for replaying a stream sample by sample.

    Transition alerts are passed through as produced. A predicted crossing of
    a given limit is reported once and re-armed only after a step in which no
    crossing of that limit was predicted.
    """

    zone: Zone = Zone.NORMAL
    armed_limit: Optional[str] = None

    def step(self, series: BiomarkerSeries, band: ThresholdBand, window: float,
             horizon: float) -> list[Alert]:
        raw = evaluate_alerts(self.zone, series, band, window, horizon)
        self.zone = classify(series[-1].value, band)
        out = []
        predicted = None
        for alert in raw:
            if alert.kind is AlertKind.PREDICTED_CROSSING:
                predicted = alert.limit
                if alert.limit == self.armed_limit:
                    continue
            out.append(alert)
        self.armed_limit = predicted
        return out


def describe(series: BiomarkerSeries, band: ThresholdBand, window: float,
             horizon: float) -> dict:
    """Plain-language status of one series."""
    latest = series[-1]
    zone = classify(latest.value, band)
    try:
        trend = fit_trend(series, window)
        crossing = _crossings(trend, band, horizon)
        slope = trend.slope
    except TooFewPointsInWindow:
        trend, crossing, slope = None, [], None
    nxt = crossing[0] if crossing else None
    words = {Zone.NORMAL: "within the normal range",
             Zone.ABNORMAL: "outside the normal range",
             Zone.RISK: "beyond a risk threshold"}[zone]
    text = f"Latest {series.channel} reading {latest.value:g} {latest.unit} is {words}."
    if slope is not None:
        if slope == 0.0:
            text += " The recent trend is flat."
        else:
            text += f" The recent trend is {'rising' if slope > 0 else 'falling'}."
    if nxt is not None:
        text += (f" If it continues, it reaches the {nxt.limit.replace('_', ' ')} "
                 f"limit ({nxt.value:g}) in about {nxt.t_cross - latest.t:.0f} s.")
    return {
        "subject_id": series.subject_id,
        "channel": series.channel,
        "t_latest": latest.t,
        "value_latest": latest.value,
        "zone": zone.value,
        "trend_slope": slope,
        "predicted_crossing": None if nxt is None else {
            "t_cross": nxt.t_cross, "limit": nxt.limit, "direction": nxt.direction},
        "summary": text,
    }
