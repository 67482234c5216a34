"""Exception hierarchy shared by every module."""


class PSWError(Exception):
    """Base class for all errors raised by this package."""


class MalformedEdge(PSWError):
    pass


class EmptySubset(PSWError):
    pass


class HeightTooLarge(PSWError):
    pass


class BudgetExceeded(PSWError):
    pass


class NotUnrelated(PSWError):
    pass


class NotAPartition(PSWError):
    pass


class CellTooLarge(PSWError):
    def __init__(self, x: int, y: int, size: int, c: int):
        super().__init__(f"cell (x={x}, y={y}) has {size} vertices > c={c}")
        self.x, self.y, self.size, self.c = x, y, size, c


class InvalidEmbedding(PSWError):
    pass


class InvalidLayering(PSWError):
    pass


class HostMismatch(PSWError):
    pass


class Disconnected(PSWError):
    pass


class PreconditionFailed(PSWError):
    pass


class NoEscape(PreconditionFailed):
    pass


class RootHasNoParent(PSWError):
    pass


class NotBalancedSeparator(PSWError):
    pass


class SNotSubdivisionOnly(PSWError):
    pass


class TooManyRemoved(PSWError):
    pass


class WidthTooLarge(PSWError):
    pass


class FormatError(PSWError):
    """Input file does not follow the expected interchange format."""
