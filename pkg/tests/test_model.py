import math

import pytest
from hypothesis import given, strategies as st

from pphm.errors import DuplicateTimestamp, EmptySeries, MixedChannel, NegativeTime, NonFiniteValue
from pphm.model import BiomarkerRole, BiomarkerSample, SubjectProfile, validate_series


def s(t, v, channel="heart_rate", subject="S1"):
    return BiomarkerSample(subject, channel, t, v, "bpm")


def test_valid_series_kept():
    series = validate_series([s(0, 100), s(1, 98)])
    assert len(series) == 2
    assert list(series.t) == [0.0, 1.0]
    assert list(series.values) == [100.0, 98.0]


def test_unordered_input_is_sorted():
    series = validate_series([s(1, 98), s(0, 100)])
    assert list(series.t) == [0.0, 1.0]
    assert series[0].value == 100


def test_duplicate_timestamp_rejected():
    with pytest.raises(DuplicateTimestamp) as exc:
        validate_series([s(0, 100), s(0, 99)])
    assert exc.value.t == 0


def test_empty_rejected():
    with pytest.raises(EmptySeries):
        validate_series([])


def test_mixed_channel_rejected():
    with pytest.raises(MixedChannel) as exc:
        validate_series([s(0, 100), s(1, 5, channel="glucose")])
    assert (exc.value.expected, exc.value.found) == ("heart_rate", "glucose")


def test_sample_invariants():
    with pytest.raises(NegativeTime):
        s(-1, 100)
    with pytest.raises(NonFiniteValue):
        s(0, math.nan)
    with pytest.raises(NonFiniteValue):
        s(math.inf, 1)


def test_profile_and_roles():
    SubjectProfile("S1", {"age": 34.0})
    with pytest.raises(NonFiniteValue):
        SubjectProfile("S1", {"age": math.inf})
    assert BiomarkerRole("prognostic") is BiomarkerRole.PROGNOSTIC
    assert len(BiomarkerRole) == 6


times = st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=40, unique=True)


@given(times)
def test_validate_idempotent_and_strictly_increasing(ts):
    series = validate_series([s(t, 60 + i) for i, t in enumerate(ts)])
    assert all(b > a for a, b in zip(series.t, series.t[1:]))
    assert validate_series(series.samples) == series
