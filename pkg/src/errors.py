"""Exception hierarchy mapped onto CLI exit codes"""

from typing import Any, Optional, Sequence


class TowerForgeError(Exception):
    """Base class for every domain error raised by towerforge"""

    exit_code: int = 2

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        """Machine-readable form written to stderr by the CLI"""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            "details": {k: str(v) for k, v in sorted(self.details.items())},
        }


# Precondition violations (exit 2)
class PreconditionError(TowerForgeError, ValueError):
    """An operation was called outside its contract"""

    exit_code = 2


class NegativeEndpoint(PreconditionError):
    pass


class AlphabetMismatch(PreconditionError):
    pass


class NotFinitePartition(PreconditionError):
    pass


class HeightMismatch(PreconditionError):
    pass


class NotRepresentable(PreconditionError):
    pass


class EmptyAnchor(PreconditionError):
    pass


class WindowOutOfRange(PreconditionError):
    pass


class WordTooLong(PreconditionError):
    pass


class UnknownSymbol(PreconditionError):
    pass


class MissingNames(PreconditionError):
    pass


class DegeneratePartition(PreconditionError):
    pass


class NotRefining(PreconditionError):
    pass


class NoReturnWithinBudget(PreconditionError):
    pass


class TowerNotRefinedByK(PreconditionError):
    pass


class BoundedOrbitDetected(PreconditionError):
    pass


class InconsistentTower(PreconditionError):
    pass


class MaximalPath(PreconditionError):
    pass


class UnknownPreset(PreconditionError):
    pass


class MalformedInput(PreconditionError):
    pass


class LanguageTooLarge(PreconditionError):
    pass


# Depth budget exhaustion (exit 3)
class DepthBudgetError(TowerForgeError):
    """The requested object is not resolvable within the depth budget"""

    exit_code = 3


class NeedsDeeperStage(DepthBudgetError):
    """Raised when an orbit leaves the stage column in use"""

    def __init__(self, message: str, index: Optional[int] = None, **details: Any):
        if index is not None:
            details["index"] = index
        super().__init__(message, **details)
        self.index = index


class DepthExceeded(DepthBudgetError):
    pass


class UnresolvedMass(DepthBudgetError):
    pass


class BudgetExhausted(DepthBudgetError):
    """A run stopped before meeting its budget; `logs` holds the steps that finished"""

    def __init__(self, message: str, logs: Sequence[Any] = (), depth_limited: bool = False, **details: Any):
        super().__init__(message, **details)
        self.logs = list(logs)
        self.depth_limited = depth_limited
