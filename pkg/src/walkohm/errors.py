"""Exception hierarchy.

Every domain error derives from :class:`WalkOhmError`; the CLI prints the
class name so scripts can match on it.
"""


class WalkOhmError(Exception):
    """Base class for all domain errors."""


class NonPositiveConductance(WalkOhmError, ValueError):
    pass


class EmptyEdgeList(WalkOhmError, ValueError):
    pass


class Disconnected(WalkOhmError):
    pass


class NotReversible(WalkOhmError):
    pass


class InvalidBoundary(WalkOhmError, ValueError):
    pass


class SingularSystem(WalkOhmError):
    pass


class MaxSweepsExceeded(WalkOhmError):
    pass


class NoAbsorbingState(WalkOhmError, ValueError):
    pass


class UnreachableAbsorption(WalkOhmError):
    pass


class SingularIminusQ(WalkOhmError):
    pass


class SameVertex(WalkOhmError, ValueError):
    pass


class UnknownVertex(WalkOhmError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class UnknownEdge(WalkOhmError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class FlowEdgeMismatch(WalkOhmError, ValueError):
    pass


class NotUnitFlow(WalkOhmError, ValueError):
    pass


class BridgeTouchesTerminal(WalkOhmError, ValueError):
    pass


class NoInverse(WalkOhmError):
    pass


class RadiusTooLargeForDeskScale(WalkOhmError, ValueError):
    pass
