"""Exception hierarchy shared by every module."""

from __future__ import annotations


class MoyalGravError(Exception):
    """Base class for engine errors."""


class SpecMismatch(MoyalGravError, ValueError):
    """Two series with different truncation specs were combined."""


class NotAugmentationZero(MoyalGravError, ValueError):
    """Exponential requested of a series with a nonzero weight-zero part."""


class NotUnit(MoyalGravError, ValueError):
    """Logarithm, power or inverse substitution of a non-unit."""


class NotInvertible(MoyalGravError, ZeroDivisionError):
    """Inverse requested of a series whose leading part is not a monomial."""


class TruncationTooSmall(MoyalGravError, ValueError):
    """The truncation leaves no degree at which a check is meaningful."""


class AnsatzError(MoyalGravError, ValueError):
    """A (G'/G) ansatz with inconsistent degree balancing."""
