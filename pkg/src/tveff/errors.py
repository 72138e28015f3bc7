"""Exception hierarchy shared across the package.

Two failure families matter to callers: problems with the supplied data
(bad files, invariant violations, degenerate inputs) and numerical
breakdowns inside otherwise valid computations (singular systems,
failed factorizations).  The CLI maps them to distinct exit codes.
"""

from __future__ import annotations


class DataError(ValueError):
    """Invalid or degenerate input data."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed (singular system, non-PD matrix, ...)."""
