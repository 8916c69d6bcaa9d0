"""Run configuration file.

INI syntax, read with :mod:`configparser`::

    [fit]
    tol = 1e-8
    max_iter = 200
    hrrt_fraction = 0.05

    [monitor]
    window = 60
    horizon = 300
    confidence = 0.95

    [predictor]
    min_abs = 0.1
    alpha = 0.05
    interactions = false

    [band glucose]
    lower_normal = 75
    upper_normal = 200
    upper_risk = 250

One ``[band <channel>]`` section per channel; any limit may be left out.
A band without its own ``confidence`` inherits ``monitor.confidence``.
Command-line flags override file values.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import InputError
from .monitor import LIMIT_NAMES, ThresholdBand
from .recovery import FitConfig


@dataclass(frozen=True)
class MonitorOptions:
    window: float = 60.0
    horizon: float = 300.0
    confidence: float = 0.95

    def __post_init__(self):
        if not self.window > 0:
            raise InputError(f"window must be > 0, got {self.window!r}")
        if not self.horizon > 0:
            raise InputError(f"horizon must be > 0, got {self.horizon!r}")
        if not 0 < self.confidence < 1:
            raise InputError(f"confidence must lie in (0, 1), got {self.confidence!r}")


@dataclass(frozen=True)
class PredictorOptions:
    min_abs: float = 0.1
    alpha: float = 0.05
    interactions: bool = False

    def __post_init__(self):
        if not self.min_abs >= 0:
            raise InputError(f"min_abs must be >= 0, got {self.min_abs!r}")
        if not 0 < self.alpha < 1:
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha!r}")


@dataclass(frozen=True)
class RunConfig:
    bands: dict = field(default_factory=dict)
    fit: FitConfig = field(default_factory=FitConfig)
    monitor: MonitorOptions = field(default_factory=MonitorOptions)
    predictor: PredictorOptions = field(default_factory=PredictorOptions)


def _section(parser, name, casts):
    if not parser.has_section(name):
        return {}
    out = {}
    for key, raw in parser.items(name):
        if key not in casts:
            raise InputError(f"[{name}]: unknown key {key!r}")
        try:
            out[key] = casts[key](parser, name, key)
        except ValueError:
            raise InputError(f"[{name}] {key}: cannot parse {raw!r}") from None
    return out


_F = lambda p, s, k: p.getfloat(s, k)  # noqa: E731
_I = lambda p, s, k: p.getint(s, k)  # noqa: E731
_B = lambda p, s, k: p.getboolean(s, k)  # noqa: E731


def load_config(path) -> RunConfig:
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise InputError(f"bad config {path}: {exc}") from None

    known = {"fit", "monitor", "predictor"}
    for sec in parser.sections():
        if sec not in known and not sec.startswith("band "):
            raise InputError(f"unknown config section [{sec}]")

    fit = FitConfig(**_section(parser, "fit", {"tol": _F, "max_iter": _I, "hrrt_fraction": _F}))
    monitor = MonitorOptions(**_section(
        parser, "monitor", {"window": _F, "horizon": _F, "confidence": _F}))
    predictor = PredictorOptions(**_section(
        parser, "predictor", {"min_abs": _F, "alpha": _F, "interactions": _B}))

    bands = {}
    casts = {name: _F for name in LIMIT_NAMES + ("confidence",)}
    for sec in parser.sections():
        if sec.startswith("band "):
            channel = sec[len("band "):].strip()
            values = _section(parser, sec, casts)
            values.setdefault("confidence", monitor.confidence)
            bands[channel] = ThresholdBand(channel, **values)
    return RunConfig(bands=bands, fit=fit, monitor=monitor, predictor=predictor)


def with_confidence(bands: dict, confidence: float) -> dict:
    return {ch: replace(b, confidence=confidence) for ch, b in bands.items()}


def parse_band(text: str) -> ThresholdBand:
    """Parse a ``channel:key=value,key=value`` band given on the command line."""
    try:
        channel, body = text.split(":", 1)
        values = {}
        for item in filter(None, body.split(",")):
            key, raw = item.split("=", 1)
            key = key.strip()
            if key not in LIMIT_NAMES + ("confidence",):
                raise InputError(f"--band: unknown key {key!r}")
            values[key] = float(raw)
    except ValueError:
        raise InputError(
            f"--band: expected channel:key=value[,key=value...], got {text!r}") from None
    return ThresholdBand(channel.strip(), **values)
