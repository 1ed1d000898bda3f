"""Exception hierarchy shared by every module of the package."""


class ICBError(Exception):
    """Base class for all errors raised by :mod:`icb`."""


class InvalidNetwork(ICBError, ValueError):
    pass


class DisconnectedGraph(InvalidNetwork):
    pass


class DuplicateEdge(InvalidNetwork):
    pass


class SelfLoop(InvalidNetwork):
    pass


class InvalidTypeSpace(ICBError, ValueError):
    pass


class GenerationFailed(ICBError, RuntimeError):
    pass


class InstanceTooLarge(ICBError, ValueError):
    pass


class NotARouter(ICBError, ValueError):
    pass


class NotBiconnected(ICBError, ValueError):
    pass


class DeliveryFailure(ICBError, RuntimeError):
    pass


class NoRouters(ICBError, ValueError):
    pass


class NoPayers(ICBError, ValueError):
    pass


class ConfigInvalid(ICBError, ValueError):
    pass


class EmptyInput(ICBError, ValueError):
    pass


class SchemaError(ICBError, ValueError):
    pass


class LengthMismatch(ICBError, ValueError):
    pass


class UnknownCheck(ICBError, ValueError):
    pass
