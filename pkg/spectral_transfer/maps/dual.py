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
from dataclasses import dataclass
from functools import singledispatch
from typing import TYPE_CHECKING, Any

import numpy as np

from spectral_transfer.errors import AnalyticExtensionError

if TYPE_CHECKING:
    from collections.abc import Callable

__all__ = (
    "Dual",
    "absolute",
    "arccos",
    "arcsin",
    "cos",
    "derivative",
    "derivatives",
    "exp",
    "lift",
    "log",
    "primal",
    "sign",
    "sin",
    "sqrt",
    "tan",
    "tangent",
)

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class Dual:
    """A forward-mode dual number ``real + dual·ε`` with ``ε² = 0``.

    Both parts may themselves be :class:`Dual` values, which gives higher derivatives by nesting.
    Parts may also be numpy arrays or complex numbers; every operation is written against the
    generic elementary functions of this module so the same expression tree evaluates on all of them.
    """

    real: Any
    dual: Any

    # numpy must defer to our reflected operators instead of building object arrays.
    __array_ufunc__ = None

    def __add__(self, other: Any) -> Dual:
        if isinstance(other, Dual):
            return Dual(self.real + other.real, self.dual + other.dual)
        return Dual(self.real + other, self.dual)

    def __radd__(self, other: Any) -> Dual:
        return Dual(other + self.real, self.dual)

    def __sub__(self, other: Any) -> Dual:
        if isinstance(other, Dual):
            return Dual(self.real - other.real, self.dual - other.dual)
        return Dual(self.real - other, self.dual)

    def __rsub__(self, other: Any) -> Dual:
        return Dual(other - self.real, -self.dual)

    def __mul__(self, other: Any) -> Dual:
        if isinstance(other, Dual):
            return Dual(self.real * other.real, self.real * other.dual + self.dual * other.real)
        return Dual(self.real * other, self.dual * other)

    def __rmul__(self, other: Any) -> Dual:
        return Dual(other * self.real, other * self.dual)

    def __truediv__(self, other: Any) -> Dual:
        if isinstance(other, Dual):
            quotient = self.real / other.real
            return Dual(quotient, (self.dual - quotient * other.dual) / other.real)
        return Dual(self.real / other, self.dual / other)

    def __rtruediv__(self, other: Any) -> Dual:
        quotient = other / self.real
        return Dual(quotient, -quotient * self.dual / self.real)

    def __neg__(self) -> Dual:
        return Dual(-self.real, -self.dual)

    def __pos__(self) -> Dual:
        return self

    def __pow__(self, other: Any) -> Dual:
        if isinstance(other, Dual):
            return exp(other * log(self))
        if other == 0:
            return Dual(self.real**0, self.dual * 0)
        return Dual(self.real**other, other * self.real ** (other - 1) * self.dual)

    def __rpow__(self, other: Any) -> Dual:
        value = other**self.real
        return Dual(value, value * log(other) * self.dual)


def primal(value: Any) -> Any:
    """The innermost real part of a (possibly nested) dual number."""
    while isinstance(value, Dual):
        value = value.real
    return value


def tangent(value: Any) -> Any:
    """The ε-part of `value`; constants have a zero tangent."""
    if isinstance(value, Dual):
        return value.dual
    return value * 0


def lift(x: Any, depth: int) -> Any:
    """Seed `x` with `depth` independent infinitesimals ``x + ε₁ + … + ε_depth``."""
    if depth == 0:
        return x
    return Dual(lift(x, depth - 1), 1.0)


def derivative(func: Callable[[Any], Any]) -> Callable[[Any], Any]:
    """Return the derivative of `func` by one level of forward-mode differentiation.

    The argument may already be a :class:`Dual`, in which case the result carries the
    inner perturbation, which is how second derivatives are obtained.
    """

    def wrapped(x: Any) -> Any:
        return tangent(func(Dual(x, 1.0)))

    return wrapped


def derivatives(func: Callable[[Any], Any], x: Any, order: int) -> list[Any]:
    """Return ``[f(x), f'(x), …, f^(order)(x)]`` using `order` nested dual levels.

    Parameters
    ----------
    func: :class:`Callable`
        A function written against the generic elementary functions.
    x: :class:`Any`
        A float, complex or numpy array argument.
    order: :class:`int`
        Highest derivative requested.

    Returns
    -------
    :class:`list[Any]`
        The derivatives in increasing order.

    """
    result = func(lift(x, order))
    out: list[Any] = []
    for k in range(order + 1):
        value = result
        for _ in range(k):
            value = tangent(value)
        for _ in range(order - k):
            value = value.real if isinstance(value, Dual) else value
        out.append(primal(value) + x * 0)
    return out


# Generic elementary functions: numpy for floats, complex numbers and arrays,
# with dual numbers (and interval arrays, registered in `spectral_transfer.validated`) dispatching on type.


@singledispatch
def sin(x: Any) -> Any:  # noqa: D103
    return np.sin(x)


@singledispatch
def cos(x: Any) -> Any:  # noqa: D103
    return np.cos(x)


@singledispatch
def tan(x: Any) -> Any:  # noqa: D103
    return np.tan(x)


@singledispatch
def exp(x: Any) -> Any:  # noqa: D103
    return np.exp(x)


@singledispatch
def log(x: Any) -> Any:  # noqa: D103
    return np.log(x)


@singledispatch
def sqrt(x: Any) -> Any:  # noqa: D103
    return np.sqrt(x)


@singledispatch
def absolute(x: Any) -> Any:  # noqa: D103
    if np.iscomplexobj(x):
        raise AnalyticExtensionError("abs")
    return np.abs(x)


@singledispatch
def sign(x: Any) -> Any:  # noqa: D103
    return np.sign(x)


@singledispatch
def arccos(x: Any) -> Any:  # noqa: D103
    return np.arccos(x)


@singledispatch
def arcsin(x: Any) -> Any:  # noqa: D103
    return np.arcsin(x)


@sin.register
def _(x: Dual) -> Dual:
    return Dual(sin(x.real), cos(x.real) * x.dual)


@cos.register
def _(x: Dual) -> Dual:
    return Dual(cos(x.real), -sin(x.real) * x.dual)


@tan.register
def _(x: Dual) -> Dual:
    value = tan(x.real)
    return Dual(value, (1 + value * value) * x.dual)


@exp.register
def _(x: Dual) -> Dual:
    value = exp(x.real)
    return Dual(value, value * x.dual)


@log.register
def _(x: Dual) -> Dual:
    return Dual(log(x.real), x.dual / x.real)


@sqrt.register
def _(x: Dual) -> Dual:
    value = sqrt(x.real)
    return Dual(value, x.dual / (2 * value))


@absolute.register
def _(x: Dual) -> Dual:
    return Dual(absolute(x.real), sign(primal(x.real)) * x.dual)


@arccos.register
def _(x: Dual) -> Dual:
    return Dual(arccos(x.real), -x.dual / sqrt(1 - x.real * x.real))


@arcsin.register
def _(x: Dual) -> Dual:
    return Dual(arcsin(x.real), x.dual / sqrt(1 - x.real * x.real))
