"""Domain types shared across the toolkit.

Times are relative seconds measured from the series origin, never wall-clock.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateTimestamp,
    EmptySeries,
    InputError,
    MixedChannel,
    NegativeTime,
    NonFiniteValue,
)


class BiomarkerRole(str, Enum):
    """Descriptive tag for what a biomarker is used for."""

    PREVENTIVE = "preventive"
    VERIFICATORY = "verificatory"
    EXPLORATIVE = "explorative"
    STATE = "state"
    PROGNOSTIC = "prognostic"
    PHARMACODYNAMIC = "pharmacodynamic"


@dataclass(frozen=True)
class BiomarkerSample:
    subject_id: str
    channel: str
    t: float
    value: float
    unit: str = ""

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise NonFiniteValue(what="time")
        if self.t < 0:
            raise NegativeTime(self.t)
        if not math.isfinite(self.value):
            raise NonFiniteValue()


@dataclass(frozen=True)
class BiomarkerSeries:
    """Time-ordered samples of one channel for one subject.

    Build through :func:`validate_series`; the constructor assumes its input
    already satisfies the ordering invariants.
    """

    subject_id: str
    channel: str
    samples: tuple[BiomarkerSample, ...]

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    @property
    def unit(self) -> str:
        return self.samples[0].unit

    @property
    def t(self) -> np.ndarray:
        return np.array([s.t for s in self.samples], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.samples], dtype=float)

    def head(self, n: int) -> "BiomarkerSeries":
        """The first ``n`` samples as a new series."""
        if n < 1:
            raise EmptySeries()
        return BiomarkerSeries(self.subject_id, self.channel, self.samples[:n])


@dataclass(frozen=True)
class SubjectProfile:
    subject_id: str
    covariates: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name, v in self.covariates.items():
            if not math.isfinite(v):
                raise NonFiniteValue(what=f"covariate {name!r}")


def validate_series(raw: Iterable[BiomarkerSample]) -> BiomarkerSeries:
    """Check, sort and freeze raw samples into a :class:`BiomarkerSeries`.

    All samples must share subject, channel and unit. Duplicate timestamps
    are rejected rather than merged.
    """
    samples: Sequence[BiomarkerSample] = list(raw)
    if not samples:
        raise EmptySeries()
    first = samples[0]
    for i, s in enumerate(samples):
        if not (math.isfinite(s.value) and math.isfinite(s.t)):
            raise NonFiniteValue(i)
        if s.channel != first.channel:
            raise MixedChannel(first.channel, s.channel)
        if s.subject_id != first.subject_id:
            raise MixedChannel(first.subject_id, s.subject_id)
        if s.unit != first.unit:
            raise InputError(
                f"mixed units in channel {first.channel!r}: {first.unit!r} vs {s.unit!r}")
    ordered = sorted(samples, key=lambda s: s.t)
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.t == prev.t:
            raise DuplicateTimestamp(cur.t)
    return BiomarkerSeries(first.subject_id, first.channel, tuple(ordered))


def series_from_arrays(t, values, subject_id="S1", channel="heart_rate",
                       unit="bpm") -> BiomarkerSeries:
    """Convenience constructor from parallel arrays."""
    return validate_series(
        BiomarkerSample(subject_id, channel, float(ti), float(vi), unit)
        for ti, vi in zip(t, values))
