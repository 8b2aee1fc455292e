"""Exception types raised across the package."""


class FluxPipeError(Exception):
    """Base class for all errors raised by fluxpipe."""


class InvalidPatch(FluxPipeError, ValueError):
    pass


class OutOfPatch(FluxPipeError, KeyError):
    pass


class MisalignedAnchor(FluxPipeError, ValueError):
    pass


class DegenerateLadder(FluxPipeError, ValueError):
    pass


class UnassignedQubit(FluxPipeError, KeyError):
    pass


class UnsupportedSchedule(FluxPipeError, ValueError):
    pass


class LadderMismatch(FluxPipeError, ValueError):
    pass


class InvalidTarget(FluxPipeError, ValueError):
    pass


class OrderViolation(FluxPipeError, ValueError):
    pass


class OutOfRange(FluxPipeError, IndexError):
    pass


class InjectionOutOfRange(FluxPipeError, ValueError):
    pass


class TooLarge(FluxPipeError, ValueError):
    pass
