"""Exception types shared across the link toolkit."""


class TvwsLinkError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(TvwsLinkError, ValueError):
    """A parameter is outside its documented range."""


class PayloadLengthError(TvwsLinkError, ValueError):
    """Payload does not fit the frame format."""


class MalformedFrameError(TvwsLinkError, ValueError):
    """Frame bytes are too short to even carry a CRC trailer."""


class FrameDropError(TvwsLinkError):
    """The frame cannot be recovered and must be counted as lost."""


class TruncatedFrameError(FrameDropError):
    """Declared frame length runs past the end of the bit stream."""


class HeaderMismatchError(FrameDropError):
    """The two length-field copies disagree."""


class NoLockError(TvwsLinkError):
    """The timing loop never locked during the burst."""


class EqualizerDivergedError(TvwsLinkError):
    """CMA output power blew up relative to its input."""


class BelowNoiseError(TvwsLinkError):
    """Measured signal power does not exceed the noise floor."""


class ZeroPowerError(TvwsLinkError, ValueError):
    """An operation that scales by signal power received a silent input."""


class AccountingError(TvwsLinkError, ValueError):
    """Link counters are inconsistent with the declared packet totals."""


class LedgerError(TvwsLinkError, ValueError):
    """A duty-cycle interval overlaps an existing one."""


class CalibrationRangeError(TvwsLinkError, ValueError):
    """Requested power is outside the calibration table."""


class CoverageError(TvwsLinkError, ValueError):
    """The spectrum does not span the bands a check needs."""
