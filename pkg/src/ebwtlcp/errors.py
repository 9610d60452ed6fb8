"""Exception hierarchy shared by every stage of the pipeline."""


class EbwtLcpError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInput(EbwtLcpError):
    pass


class EmptyCollection(EbwtLcpError):
    pass


class AlphabetTooLarge(EbwtLcpError):
    pass


class EndMarkerCollision(EbwtLcpError):
    pass


class UnknownSymbol(EbwtLcpError):
    pass


class MalformedRecord(EbwtLcpError):
    pass


class OutOfRange(EbwtLcpError, IndexError):
    pass


class MissingGeneration(EbwtLcpError):
    pass


class InconsistentTracker(EbwtLcpError):
    pass


class TrackerSegmentOverrun(EbwtLcpError):
    pass


class MalformedEbwt(EbwtLcpError):
    pass


class MissingMetadata(EbwtLcpError):
    pass


class OracleCapExceeded(EbwtLcpError):
    pass
