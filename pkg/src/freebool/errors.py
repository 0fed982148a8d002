"""Exception hierarchy and the three-valued verdict used by bounded searches."""

from __future__ import annotations

import enum


class FreeboolError(Exception):
    """Base class for all library errors."""


class ValidationError(FreeboolError, ValueError):
    """Input violates a documented precondition."""


class SearchExhausted(FreeboolError):
    """A bounded search ran out of budget without finding a witness."""

    def __init__(self, message: str, bound: int | None = None):
        super().__init__(message)
        self.bound = bound


class VerificationFailure(FreeboolError):
    """An exhaustive check found a counterexample."""

    def __init__(self, message: str, counterexample=None):
        super().__init__(message)
        self.counterexample = counterexample


class Undecided(FreeboolError):
    """The finite description does not determine the answer."""


class Verdict(str, enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    def __bool__(self) -> bool:
        return self is Verdict.YES
