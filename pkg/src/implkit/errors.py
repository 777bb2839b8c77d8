"""Exception hierarchy shared by every module."""


class ImplkitError(Exception):
    """Base class for all errors raised by the toolkit."""


class ParseError(ImplkitError):
    """Malformed input file or field."""

    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{location}: {message}")
        self.location = location


class ValidationError(ImplkitError):
    """An environment or choice rule violates a model invariant."""

    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{location}: {message}")
        self.location = location


class AgentCountTooSmall(ValidationError):
    pass


class TrivialScf(ValidationError):
    pass


class EmptySccValue(ValidationError):
    pass


class MissingUtility(ValidationError):
    pass


class EmptySet(ImplkitError):
    """An operation received an empty outcome set where a nonempty one is required."""


class EmptyPolytope(ImplkitError):
    pass


class NotInteriorLottery(ImplkitError):
    pass


class NotSubsetOfZstar(ImplkitError):
    pass


class ThetaSetTooLarge(ImplkitError):
    def __init__(self, message, agent=None, state=None):
        super().__init__(message)
        self.agent = agent
        self.state = state


class InternalMismatch(ImplkitError):
    """Two independent computations of the same object disagree."""


class VerificationFailed(ImplkitError):
    pass


class TruncationTooSmall(ImplkitError):
    pass


class MechanismTooLarge(ImplkitError):
    pass


class ExtremeOutcome(ImplkitError):
    pass
