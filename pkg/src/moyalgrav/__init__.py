"""Exact truncated-series verification of one-dimensional topological gravity,
its two-matrix star-product deformation and the associated integrable flows."""

from __future__ import annotations

from .errors import (AnsatzError, MoyalGravError, NotAugmentationZero, NotInvertible,
                     NotUnit, SpecMismatch, TruncationTooSmall)
from .report import VerificationReport, Window
from .series import Series, TruncationSpec, Var

__all__ = ["AnsatzError", "MoyalGravError", "NotAugmentationZero", "NotInvertible", "NotUnit",
           "SpecMismatch", "TruncationTooSmall", "VerificationReport", "Window", "Series",
           "TruncationSpec", "Var"]
__version__ = "0.1.0"
