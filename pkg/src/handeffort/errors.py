"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures to distinct process exit statuses without a lookup table.
"""


class HandEffortError(Exception):
    exit_code = 1

    def __init__(self, message, *, source=None, line=None):
        self.source = source
        self.line = line
        super().__init__(message)

    def __str__(self):
        msg = super().__str__()
        where = []
        if self.source is not None:
            where.append(str(self.source))
        if self.line is not None:
            where.append(f"line {self.line}")
        return f"{':'.join(where)}: {msg}" if where else msg


# -- input data ------------------------------------------------------------

class DataError(HandEffortError, ValueError):
    exit_code = 4


class MalformedRow(DataError):
    pass


class IncompleteFrame(DataError):
    pass


class NonMonotonicFrames(DataError):
    pass


class EmptySet(DataError):
    pass


class MalformedLandmarks(DataError):
    pass


class UnknownLexicalClass(DataError):
    pass


# -- geometry / effort -----------------------------------------------------

class DegenerateBone(HandEffortError, ValueError):
    exit_code = 5


class EmptyRestingSet(HandEffortError, ValueError):
    exit_code = 5


# -- segmentation ----------------------------------------------------------

class SegmentationError(HandEffortError, ValueError):
    exit_code = 5


class TooFewFrames(SegmentationError):
    pass


class NotEnoughMinima(SegmentationError):
    pass


class NonMonotonicAfterCorrection(SegmentationError):
    pass


class PositionOutOfRange(SegmentationError, IndexError):
    pass


class FrameNotInSequence(SegmentationError):
    pass


# -- usage statistics / correlation ----------------------------------------

class NoPairMass(HandEffortError, ValueError):
    exit_code = 5


class StatsError(HandEffortError, ValueError):
    exit_code = 5


class ZeroVariance(StatsError):
    pass


class TooFewPoints(StatsError):
    pass


class DegenerateControl(StatsError):
    pass


class MissingLetter(StatsError, KeyError):
    # KeyError.__str__ would quote the message
    __str__ = HandEffortError.__str__


# -- configuration ---------------------------------------------------------

class ConfigError(HandEffortError):
    exit_code = 3
