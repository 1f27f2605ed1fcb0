"""Exception types raised across the codec and simulator."""


class CuebarError(Exception):
    pass


class AuthError(CuebarError):
    """MAC verification failed: tampered payload or wrong key."""


class RejectError(CuebarError):
    """ECC refused to decode (too many errors for the reject policy)."""

    def __init__(self, message, block=None, corrected=None):
        super().__init__(message)
        self.block = block
        self.corrected = corrected


class DecodeError(CuebarError, ValueError):
    pass


class LengthError(CuebarError, ValueError):
    pass


class FormatError(CuebarError, ValueError):
    pass


class CapacityError(CuebarError, ValueError):
    pass


class FitError(CuebarError, ValueError):
    pass


class RangeError(CuebarError, IndexError):
    pass


class BoundsError(CuebarError, IndexError):
    pass


class TooFewPointsError(CuebarError):
    pass


class DegenerateError(CuebarError):
    pass


class CardinalityError(CuebarError, ValueError):
    pass


class ConfigError(CuebarError, ValueError):
    pass


class ChannelError(CuebarError):
    """A party tried to send over an edge that does not exist."""
