"""Copyright (C) 2021-2025 Katelynn Cadwallader.

This file is part of Spectral Transfer.

Spectral Transfer is free software; you can redistribute it and/or modify
it under the terms of the GNU General Public License as published by
the Free Software Foundation; either version 3, or (at your option)
any later version.

Spectral Transfer is distributed in the hope that it will be useful, but WITHOUT
ANY WARRANTY; without even the implied warranty of MERCHANTABILITY
or FITNESS FOR A PARTICULAR PURPOSE.  See the GNU General Public
License for more details.

You should have received a copy of the GNU General Public License
along with Spectral Transfer; see the file COPYING.  If not, write to the Free
Software Foundation, 51 Franklin Street - Fifth Floor, Boston, MA
02110-1301, USA.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence

__all__ = (
    "AnalyticExtensionError",
    "BoundModelError",
    "BranchInverseError",
    "CatalogLookupError",
    "CertificationError",
    "ConfigurationError",
    "ConvergenceError",
    "IntervalError",
    "MapInputError",
    "MapSemanticError",
    "MapSyntaxError",
    "NonExpandingError",
    "ReflectorBreakdownError",
    "SingularOperatorError",
    "SpectralNumericalError",
)

LOGGER = logging.getLogger("spectral.errors")


def _render(args: tuple[object, ...]) -> str:
    """Fill the logging template held in `args[0]` with the remaining arguments."""
    if not args:
        return ""
    template, *values = args
    if not values:
        return str(template)
    try:
        return str(template) % tuple(values)
    except (TypeError, ValueError):
        return " | ".join(str(arg) for arg in args)


class MapInputError(Exception):
    """Base class for user input problems; the CLI exits with status 2."""

    def __str__(self) -> str:
        return _render(self.args)


class SpectralNumericalError(Exception):
    """Base class for numerical failures; the CLI exits with status 3."""

    def __str__(self) -> str:
        return _render(self.args)


class MapSyntaxError(MapInputError):  # noqa: D101
    def __init__(self, line: int, column: int, expected: Sequence[str]) -> None:  # noqa: D107
        message = "Map definition syntax error at line %s, column %s | Expected one of: %s"
        self.line = line
        self.column = column
        self.expected = sorted(expected)
        super().__init__(message, line, column, ", ".join(self.expected))
        LOGGER.error(message, line, column, ", ".join(self.expected))


class MapSemanticError(MapInputError):  # noqa: D101
    def __init__(self, reason: str, *values: object) -> None:  # noqa: D107
        message = "Invalid map definition | " + reason
        self.reason = reason % values if values else reason
        super().__init__(message, *values)
        LOGGER.error(message, *values)

    def __str__(self) -> str:
        return self.reason


class CatalogLookupError(MapInputError):  # noqa: D101
    def __init__(self, query: str, suggestions: Sequence[str]) -> None:  # noqa: D107
        message = "We failed to find the catalog map %r | Did you mean: %s"
        self.query = query
        self.suggestions = list(suggestions)
        super().__init__(message, query, ", ".join(self.suggestions) or "nothing similar")
        LOGGER.error(message, query, ", ".join(self.suggestions) or "nothing similar")


class ConfigurationError(MapInputError):  # noqa: D101
    def __init__(self, option: str, reason: str) -> None:  # noqa: D107
        message = "Invalid configuration for %s | %s"
        self.option = option
        self.reason = reason
        super().__init__(message, option, reason)
        LOGGER.error(message, option, reason)

    def __str__(self) -> str:
        return f"{self.option}: {self.reason}"


class BranchInverseError(SpectralNumericalError):  # noqa: D101
    def __init__(self, branch: int, iterations: int, residual: float) -> None:  # noqa: D107
        message = "Branch %s inverse did not converge after %s iterations | Residual: %s"
        self.branch = branch
        super().__init__(message, branch, iterations, residual)
        LOGGER.error(message, branch, iterations, residual)


class NonExpandingError(SpectralNumericalError):  # noqa: D101
    def __init__(self, quantity: str, value: float) -> None:  # noqa: D107
        message = "The map is not expanding | %s: %s"
        self.quantity = quantity
        self.value = value
        super().__init__(message, quantity, value)
        LOGGER.error(message, quantity, value)


class SingularOperatorError(SpectralNumericalError):  # noqa: D101
    def __init__(self, order: int, pivot: float) -> None:  # noqa: D107
        message = "The solution operator matrix is singular to working precision | Order: %s | Smallest pivot: %s"
        super().__init__(message, order, pivot)
        LOGGER.error(message, order, pivot)


class ConvergenceError(SpectralNumericalError):  # noqa: D101
    def __init__(self, what: str, limit: int, tolerance: float) -> None:  # noqa: D107
        message = "%s failed to converge within %s | Tolerance: %s"
        self.what = what
        self.limit = limit
        super().__init__(message, what, limit, tolerance)
        LOGGER.error(message, what, limit, tolerance)


class ReflectorBreakdownError(SpectralNumericalError):  # noqa: D101
    def __init__(self, column: int) -> None:  # noqa: D107
        message = "Householder reflector breakdown at column %s | The operator column is rank deficient."
        self.column = column
        super().__init__(message, column)
        LOGGER.error(message, column)


class IntervalError(SpectralNumericalError):  # noqa: D101
    def __init__(self, operation: str, reason: str) -> None:  # noqa: D107
        message = "Interval %s failed | %s"
        self.operation = operation
        super().__init__(message, operation, reason)
        LOGGER.error(message, operation, reason)


class CertificationError(SpectralNumericalError):  # noqa: D101
    def __init__(self, reason: str, *values: object) -> None:  # noqa: D107
        message = "Certification failed | " + reason
        super().__init__(message, *values)
        LOGGER.error(message, *values)


class BoundModelError(SpectralNumericalError):  # noqa: D101
    def __init__(self, reason: str, *values: object) -> None:  # noqa: D107
        message = "Invalid entry bound model | " + reason
        super().__init__(message, *values)
        LOGGER.error(message, *values)


class AnalyticExtensionError(SpectralNumericalError):  # noqa: D101
    def __init__(self, function: str) -> None:  # noqa: D107
        message = "The function %s has no complex extension; analytic strip constants are unavailable."
        self.function = function
        super().__init__(message, function)
        LOGGER.error(message, function)
