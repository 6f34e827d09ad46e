class PlumbKnotError(Exception):
    """Base class for library errors."""


class DomainError(PlumbKnotError, ValueError):
    """An argument lies outside the domain of an operation."""


class CapacityError(PlumbKnotError):
    """A build would exceed the configured cell budget."""

    def __init__(self, what: str, count: int, limit: int):
        super().__init__(f"{what}: {count} cells exceeds the limit of {limit}")
        self.count = count
        self.limit = limit


class NonGenericProjection(PlumbKnotError):
    """The projection direction is degenerate for the given curve."""


class CycleCheckError(PlumbKnotError):
    """A chain expected to be a cycle has a nonzero boundary."""

    def __init__(self, message: str, face=None, coefficient=None):
        super().__init__(message)
        self.face = face
        self.coefficient = coefficient


class InvariantError(PlumbKnotError):
    """An invariant could not be evaluated on a required cell."""

    def __init__(self, message: str, cell=None):
        super().__init__(message)
        self.cell = cell
