"""Exception hierarchy shared across the package."""


class StegSiriError(Exception):
    """Base class for every error raised by this package."""


class PayloadTooLong(StegSiriError, ValueError):
    pass


class FramingError(StegSiriError):
    """Raised when a bit stream cannot be turned back into a payload."""

    status = "FramingError"


class NoPreamble(FramingError):
    status = "NoPreamble"


class TruncatedFrame(FramingError):
    status = "TruncatedFrame"


class FrameLengthMismatch(TruncatedFrame):
    """The length field points somewhere other than the end of the stream."""


class ChecksumMismatch(FramingError):
    status = "ChecksumMismatch"


class EmptyTrace(StegSiriError, ValueError):
    status = "NoSignal"


class EmptyLexicon(StegSiriError, ValueError):
    pass


class EmptyCorpus(StegSiriError, ValueError):
    pass


class EmptyInput(StegSiriError, ValueError):
    pass


class ZeroDuration(StegSiriError, ValueError):
    pass
