"""Exception hierarchy shared by the library, the workflows and the CLI."""


# ================================== Exceptions =============================== #
class MallowsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MallowsError, ValueError):
    """An argument violates a documented precondition.

    The message always names the violated precondition so that the CLI can
    surface it verbatim.
    """


class ConstraintViolation(DomainError):
    """The nine-term dilogarithm constraint (1-a)(1-b) = (1-u)(1-v) fails."""


class OracleLimitError(DomainError):
    """Brute-force enumeration was requested beyond its size limit."""


class ConvergenceError(MallowsError, ArithmeticError):
    """A series or infinite product diverges or needs too many terms."""


class AcceptanceFailure(MallowsError):
    """A verification report did not meet its configured thresholds."""

    def __init__(self, message: str, failed_checks: list[str] | None = None) -> None:
        super().__init__(message)
        self.failed_checks = failed_checks or []
