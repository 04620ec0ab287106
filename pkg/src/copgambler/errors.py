"""Exception types raised across the package."""


class CopGamblerError(Exception):
    pass


class DisconnectedGraph(CopGamblerError, ValueError):
    pass


class InvalidEdge(CopGamblerError, ValueError):
    pass


class InvalidSize(CopGamblerError, ValueError):
    pass


class InvalidX(CopGamblerError, ValueError):
    pass


class EmptySupport(CopGamblerError, ValueError):
    pass


class EmptySamples(CopGamblerError, ValueError):
    pass


class InvalidParameters(CopGamblerError, ValueError):
    pass


class InvalidP(CopGamblerError, ValueError):
    pass


class InvalidQ(CopGamblerError, ValueError):
    pass


class AllZeroValues(CopGamblerError, ValueError):
    pass


class IllegalMove(CopGamblerError, RuntimeError):
    """A strategy proposed a move to a vertex that is neither current nor adjacent."""


class IncompatibleStrategy(CopGamblerError, ValueError):
    pass


class NotAPath(IncompatibleStrategy):
    pass


class NotACycle(IncompatibleStrategy):
    pass


class NotAStar(IncompatibleStrategy):
    pass


class NotComplete(IncompatibleStrategy):
    pass


class TooFewTrials(CopGamblerError, ValueError):
    pass


class ConfigError(CopGamblerError, ValueError):
    """Malformed experiment spec; the message carries the file/line/field."""
