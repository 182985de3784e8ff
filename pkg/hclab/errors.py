"""Exception hierarchy for hclab.

Every error derives from :class:`HCLabError` and from the builtin exception a
caller would naturally catch, so ``except ValueError`` keeps working for
parameter and data problems.
"""

from __future__ import annotations


class HCLabError(Exception):
    """Base class for all hclab errors.

    ``stage`` is filled in by the experiment pipeline when the error is raised
    inside one of its stages.
    """

    stage: str | None = None


class ParameterError(HCLabError, ValueError):
    """A parameter is outside its admissible range."""


class InsufficientGrowthError(HCLabError, ValueError):
    """No stored term exceeds the requested gap."""


class TailTooThinError(HCLabError, ValueError):
    """A reciprocal tail sum never reaches its threshold within the stored prefix."""


class InsufficientDataError(HCLabError, ValueError):
    """Not enough blocks or terms to compute the requested quantity."""


class DomainError(HCLabError, ValueError):
    """A point lies outside the domain of the operation (off the arc, outside L)."""


class PreconditionError(HCLabError, ValueError):
    """An operation was called before its prerequisites were established."""


class ConstructionViolationError(HCLabError, RuntimeError):
    """A constructed object breaks one of its structural invariants."""


class InternalInconsistencyError(HCLabError, RuntimeError):
    """A proven inequality failed numerically; indicates corrupted parameters."""


def tag_stage(exc: HCLabError, stage: str) -> HCLabError:
    """Attach *stage* to *exc* (first tag wins) and return it for re-raising."""
    if exc.stage is None:
        exc.stage = stage
        exc.add_note(f"stage: {stage}")
    return exc
