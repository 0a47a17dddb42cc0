"""Exception hierarchy.

Everything raised for bad input derives from :class:`MatchingError`, which is a
``ValueError`` so callers that only care about "bad input" can catch that.
"""


class MatchingError(ValueError):
    pass


class InstanceError(MatchingError):
    pass


class QuotaDeficit(InstanceError):
    pass


class NegativeWeight(InstanceError):
    pass


class AsymmetricInput(InstanceError):
    pass


class InvalidStudent(MatchingError):
    pass


class InvalidMatching(MatchingError):
    pass


class SameHouse(MatchingError):
    pass


class OwnHouse(MatchingError):
    pass


class HousesActive(MatchingError):
    """One-sided analysis requested on an instance whose houses have utilities."""


class TooLarge(MatchingError):
    pass


class EmptyNetwork(MatchingError):
    pass


class HypothesisViolated(MatchingError):
    """A bound or check precondition does not hold.

    ``hypothesis`` names the failed condition, e.g. ``"unit-weights"``.
    """

    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        self.detail = detail
        msg = hypothesis if not detail else f"{hypothesis}: {detail}"
        super().__init__(msg)


class DegenerateDelta(MatchingError):
    pass


class SelfCheckFailed(MatchingError):
    pass


class ParseError(MatchingError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")
