"""Exception hierarchy.

Two families matter to callers: :class:`CheckFailure` means the input was
read fine but some mathematical check did not hold (CLI exit code 1), while
:class:`FormatError` means the input could not be parsed (exit code 2).
"""

from __future__ import annotations


class FormatError(ValueError):
    """Malformed input data (bad JSON shape, bad rational literal, ...)."""


class CheckFailure(Exception):
    """A mathematical check failed.  ``check`` names the violated check."""

    check = "check"

    def __init__(self, message: str, *, locations=None, check: str | None = None):
        super().__init__(message)
        if check is not None:
            self.check = check
        self.locations = list(locations or [])


class InsufficientTruncation(CheckFailure):
    check = "truncation"

    def __init__(self, message: str = "insufficient truncation", **kw):
        super().__init__(message, **kw)


class InvalidQuartet(CheckFailure):
    check = "validate"


class RelationFailure(CheckFailure):
    check = "heisenberg-relations"


class RankDefect(CheckFailure):
    check = "free-module-basis"


class NotMacdonaldFamily(CheckFailure):
    check = "macdonald-inverse"


class InconsistentSeries(CheckFailure):
    check = "genus-tail"


class NotBpsRational(CheckFailure):
    check = "bps-consistency"


class IntegralityViolation(CheckFailure):
    check = "bps-integrality"


class SymmetryFailure(CheckFailure):
    check = "q-symmetry"
