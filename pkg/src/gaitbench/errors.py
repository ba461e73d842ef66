"""Exception hierarchy. Everything raised on purpose derives from GaitBenchError."""


class GaitBenchError(Exception):
    pass


class UnknownCorruption(GaitBenchError, KeyError):
    pass


class InvalidSeverity(GaitBenchError, ValueError):
    pass


class InvalidSequence(GaitBenchError, ValueError):
    pass


class FrameTooSmall(GaitBenchError, ValueError):
    pass


class SequenceTooShort(GaitBenchError, ValueError):
    pass


class PackTooSmall(GaitBenchError, ValueError):
    pass


class MaskPackError(GaitBenchError, ValueError):
    pass


class DimMismatch(GaitBenchError, ValueError):
    pass


class EmptyGallery(GaitBenchError, ValueError):
    pass


class InvalidBaseline(GaitBenchError, ValueError):
    pass


class EmptySplit(GaitBenchError, ValueError):
    pass


class InvalidConfig(GaitBenchError, ValueError):
    pass


class MissingCounterpart(GaitBenchError, KeyError):
    pass


class BatchTooSmall(GaitBenchError, ValueError):
    pass


class InvalidLabel(GaitBenchError, ValueError):
    pass


class NoValidTriplet(GaitBenchError, ValueError):
    pass


class InvalidLoss(GaitBenchError, ValueError):
    pass


class EmptySequence(GaitBenchError, ValueError):
    pass


class SequenceIOError(GaitBenchError, OSError):
    pass


class ReportMergeError(GaitBenchError, ValueError):
    """Reports with conflicting protocol metadata cannot be merged."""
