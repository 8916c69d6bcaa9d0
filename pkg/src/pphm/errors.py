"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line frontend:
2 for bad input or configuration, 3 for computation failures.
"""


class PPHMError(Exception):
    exit_code = 3


class InputError(PPHMError, ValueError):
    exit_code = 2


class ComputationError(PPHMError, ArithmeticError):
    exit_code = 3


# -- series / sample validation ---------------------------------------------

class EmptySeries(InputError):
    def __init__(self):
        super().__init__("series contains no samples")


class DuplicateTimestamp(InputError):
    def __init__(self, t):
        self.t = t
        super().__init__(f"duplicate timestamp t={t!r}")


class MixedChannel(InputError):
    def __init__(self, expected, found):
        self.expected = expected
        self.found = found
        super().__init__(f"mixed series: expected {expected!r}, found {found!r}")


class NonFiniteValue(InputError):
    def __init__(self, index=None, what="value"):
        self.index = index
        where = "" if index is None else f" at index {index}"
        super().__init__(f"non-finite {what}{where}")


class NegativeTime(InputError):
    def __init__(self, t):
        self.t = t
        super().__init__(f"time must be >= 0, got {t!r}")


# -- recovery -----------------------------------------------------------------

class TooFewPoints(ComputationError):
    def __init__(self, n, needed=4):
        self.n = n
        super().__init__(f"need at least {needed} points, got {n}")


class DegenerateElevation(ComputationError):
    def __init__(self, elevation):
        self.elevation = elevation
        super().__init__(
            f"fitted elevation d - a = {elevation:.6g} bpm is below 1 bpm; "
            "no recovery signal")


class ImplausibleFit(ComputationError):
    pass


class InvalidFraction(InputError):
    def __init__(self, p):
        self.p = p
        super().__init__(f"fraction must lie in (0, 1), got {p!r}")


# -- monitor ------------------------------------------------------------------

class TooFewPointsInWindow(ComputationError):
    def __init__(self, n, window):
        self.n = n
        self.window = window
        super().__init__(f"{n} sample(s) inside trailing window of {window} s; need 2")


class PastTime(InputError):
    def __init__(self, t_future, window_end_t):
        super().__init__(
            f"forecast time {t_future!r} precedes window end {window_end_t!r}")


class MissingBand(InputError):
    def __init__(self, channel):
        self.channel = channel
        super().__init__(f"no threshold band configured for channel {channel!r}")


# -- predictor ----------------------------------------------------------------

class ZeroVarianceFactor(InputError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"factor {name!r} has zero variance")


class RankDeficientDesign(InputError):
    pass


class TooFewObservations(InputError):
    def __init__(self, m, needed):
        self.m = m
        super().__init__(f"need at least {needed} observations, got {m}")


class NonPositiveVariance(InputError):
    def __init__(self, v):
        super().__init__(f"variance must be > 0, got {v!r}")


# -- activity -----------------------------------------------------------------

class UnorderedStream(InputError):
    def __init__(self, sensor_id):
        self.sensor_id = sensor_id
        super().__init__(f"samples for sensor {sensor_id!r} are not strictly time-ordered")


class KTooLarge(InputError):
    def __init__(self, k, distinct):
        super().__init__(f"k={k} exceeds number of distinct points ({distinct})")


class EmptyInput(InputError):
    def __init__(self, what="input"):
        super().__init__(f"empty {what}")


# -- simulation ---------------------------------------------------------------

class InvalidParams(InputError):
    def __init__(self, message, param=None):
        self.param = param
        super().__init__(message)
