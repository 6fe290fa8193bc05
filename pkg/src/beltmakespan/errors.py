"""Exception hierarchy shared by all modules."""


class BeltError(Exception):
    """Base class for every error raised by this package."""


class InvalidInstance(BeltError, ValueError):
    pass


class InvalidSequence(BeltError, ValueError):
    pass


class MissingType(InvalidSequence):
    """A type of the instance never occurs in the sequence; decoding would not terminate."""


class CapacityExceeded(InvalidSequence):
    pass


class IncompleteAssignment(BeltError, ValueError):
    pass


class NotNormalForm(BeltError, ValueError):
    pass


class DecodeGuardError(BeltError, RuntimeError):
    """Internal safety net: decoding ran past the provable step limit."""


class TooLarge(BeltError, ValueError):
    pass


class InvalidSlots(BeltError, ValueError):
    pass


class EmptyLog(BeltError, ValueError):
    pass


class DegenerateInput(BeltError, ValueError):
    pass


class CorpusError(BeltError):
    pass


class UnknownStrategy(BeltError, ValueError):
    pass
