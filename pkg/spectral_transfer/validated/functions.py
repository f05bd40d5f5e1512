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
from typing import TYPE_CHECKING, Any

import numpy as np

from spectral_transfer._enums import BasisKind
from spectral_transfer.maps import dual
from spectral_transfer.maps.dual import Dual
from spectral_transfer.spectral import fourier_modes

from .interval import EPS, PI, IntervalArray, IntervalScalar, as_interval, interval_matmul, where

if TYPE_CHECKING:
    from collections.abc import Callable

    from numpy.typing import NDArray

    from spectral_transfer.spectral import SpectralFunction

__all__ = (
    "QuadratureEnclosure",
    "derivative_bounds",
    "enclose_integral",
    "gauss_enclosure",
    "interval_basis",
    "interval_evaluate",
    "interval_integral",
    "interval_integral_row",
    "interval_product",
    "spectral_jet",
)

LOGGER = logging.getLogger(__name__)

TINY = float(np.finfo(np.float64).tiny)
# Two-point Gauss-Legendre on [a, b] errs by (b - a)^5/4320 · g''''(ξ).
REMAINDER_ORDER = 4
REMAINDER_DENOMINATOR = 4320.0
INITIAL_BOXES = 64
MAX_BOXES = 8192
QUADRATURE_TOLERANCE = 1e-14
NODE_CHUNK = 1024


def interval_basis(basis: BasisKind, points: IntervalArray, slots: NDArray[np.int64]) -> IntervalArray:
    """``b_k`` on every interval of `points` (a vector) for every slot, shape ``(points, slots)``."""
    column = points.reshape(-1, 1)
    if basis is BasisKind.chebyshev:
        return (column.arccos() * slots[None, :].astype(np.float64)).cos()
    modes = ((slots + 1) // 2)[None, :].astype(np.float64)
    phase = column * modes
    shape = (points.size, slots.size)
    ones = IntervalArray.point(np.ones(shape))
    trig = where(np.broadcast_to(slots[None, :] % 2 == 1, shape), phase.cos(), phase.sin())
    return where(np.broadcast_to(slots[None, :] == 0, shape), ones, trig)


def interval_evaluate(fn: SpectralFunction, points: IntervalArray) -> IntervalArray:
    """Enclose ``fn`` on each interval of `points` (a vector), a block of rows at a time."""
    slots = np.arange(len(fn))
    parts = [
        interval_matmul(interval_basis(fn.basis, points[start : start + NODE_CHUNK], slots), fn.coeffs)
        for start in range(0, points.size, NODE_CHUNK)
    ]
    return IntervalArray(np.concatenate([part.lo for part in parts]), np.concatenate([part.hi for part in parts]))


def interval_integral_row(basis: BasisKind, order: int) -> IntervalArray:
    """``𝒮 b_k`` for the first `order` slots: ``2π`` for the constant, ``2/(1 - k²)`` for even ``T_k``."""
    if basis is BasisKind.fourier:
        total = 2.0 * PI
        lo = np.zeros(order)
        hi = np.zeros(order)
        lo[0] = total.lo
        hi[0] = total.hi
        return IntervalArray(lo, hi)
    k = np.arange(order, dtype=np.float64)
    even = np.arange(order) % 2 == 0
    denominator = np.where(even, 1.0 - k * k, 1.0)
    moments = IntervalArray.point(2.0) / IntervalArray.point(denominator)
    return where(even, moments, IntervalArray.point(np.zeros(order)))


def interval_integral(coeffs: IntervalArray, basis: BasisKind) -> IntervalScalar:
    """Enclose ``𝒮f`` for every function whose coefficients lie in `coeffs`."""
    total = (interval_integral_row(basis, coeffs.size) * coeffs).sum()
    assert isinstance(total, IntervalScalar)
    return total


def _cosine_slot(mode: NDArray[np.int64]) -> NDArray[np.int64]:
    return np.where(mode == 0, 0, 2 * mode - 1)


def _product_targets(
    basis: BasisKind,
    left: NDArray[np.int64],
    right: NDArray[np.int64],
) -> list[tuple[NDArray[np.int64], NDArray[np.float64]]]:
    """Where the product of slot `left` and slot `right` lands, as two ``(slot, factor)`` terms.

    Chebyshev: ``T_iT_k = (T_{i+k} + T_{|i-k|})/2``. Fourier products of cosines and sines split
    into the sum and difference frequencies, with ``sin(-x) = -sin x`` folded into the factor.
    """
    if basis is BasisKind.chebyshev:
        half = np.full(left.shape, 0.5)
        return [(left + right, half), (np.abs(left - right), half)]
    p = (left + 1) // 2
    q = (right + 1) // 2
    left_cos = (left == 0) | (left % 2 == 1)
    right_cos = (right == 0) | (right % 2 == 1)
    total = p + q
    gap = np.abs(p - q)
    sign = np.sign(p - q).astype(np.float64)
    both_cos = left_cos & right_cos
    both_sin = ~left_cos & ~right_cos
    first_slot = np.where(both_cos | both_sin, _cosine_slot(total), 2 * total)
    first_factor = np.where(both_sin, -0.5, 0.5)
    second_slot = np.where(both_cos | both_sin, _cosine_slot(gap), 2 * gap)
    second_factor = np.where(both_cos | both_sin, 0.5, np.where(left_cos, -0.5, 0.5) * sign)
    return [(first_slot, first_factor), (second_slot, second_factor)]


def _product_size(basis: BasisKind, left: int, right: int) -> int:
    if basis is BasisKind.chebyshev:
        return left + right - 1
    return 2 * int(fourier_modes(left)[-1] + fourier_modes(right)[-1]) + 1


def interval_product(f: IntervalArray, g: IntervalArray, basis: BasisKind) -> IntervalArray:
    """Enclose the coefficients of the pointwise product ``fg``, computed in coefficient space.

    Every pair of slots contributes two scaled terms; each output slot sums its terms in
    floating point and is widened by ``1.01·n·ε`` times the sum of their magnitudes, the usual
    bound for ``n`` additions.
    """
    left, right = np.meshgrid(np.arange(f.size), np.arange(g.size), indexing="ij")
    terms = f.reshape(-1, 1) * g.reshape(1, -1)
    size = _product_size(basis, f.size, g.size)
    lo = np.zeros(size)
    hi = np.zeros(size)
    magnitude = np.zeros(size)
    count = np.zeros(size)
    for slots, factors in _product_targets(basis, left, right):
        part = terms * factors
        target = slots.reshape(-1)
        np.add.at(lo, target, part.lo.reshape(-1))
        np.add.at(hi, target, part.hi.reshape(-1))
        np.add.at(magnitude, target, part.mag.reshape(-1))
        np.add.at(count, target, 1.0)
    error = 1.01 * count * EPS * magnitude + count * TINY
    return IntervalArray(np.nextafter(lo - error, -np.inf), np.nextafter(hi + error, np.inf))


def derivative_bounds(fn: SpectralFunction, highest: int) -> list[float]:
    """Upper bounds ``R_j ≥ sup|fn^(j)|`` over the canonical domain for ``j = 0..highest``.

    Chebyshev uses Markov's ``max|T_k^(j)| = T_k^(j)(1) = Π_{i<j} (k² - i²)/(2i + 1)``;
    Fourier uses ``m^j`` per slot of frequency ``m``.
    """
    magnitude = IntervalArray.point(np.abs(fn.coeffs))
    factor = IntervalArray.point(np.ones(len(fn)))
    bounds: list[float] = []
    if fn.basis is BasisKind.fourier:
        modes = fourier_modes(len(fn)).astype(np.float64)
        for _ in range(highest + 1):
            bounds.append(float((magnitude * factor).sum().hi))
            factor = factor * modes
        return bounds
    squares = np.arange(len(fn), dtype=np.float64) ** 2
    for j in range(highest + 1):
        bounds.append(float((magnitude * factor).sum().hi))
        factor = factor * IntervalArray.point(np.abs(squares - j * j)) / float(2 * j + 1)
    return bounds


def spectral_jet(fn: SpectralFunction, bounds: list[float]) -> Callable[[Any], Any]:
    """``fn`` as a function of nested dual numbers whose innermost parts are intervals.

    The primal value is enclosed on its interval; the ``j``-th derivative level is replaced by
    ``[-R_j, R_j]`` from `bounds`, which holds everywhere on the canonical domain.
    """

    def evaluate(x: Any, level: int = 0) -> Any:
        if isinstance(x, Dual):
            return Dual(evaluate(x.real, level), evaluate(x.real, level + 1) * x.dual)
        points = x if isinstance(x, IntervalArray) else as_interval(x, np.shape(x))
        if level == 0:
            values = interval_evaluate(fn, points.reshape(-1))
            return values.reshape(*points.shape) if points.ndim else values[0]
        if level >= len(bounds):
            raise ValueError(f"no derivative bound of order {level}")
        return IntervalArray(np.full(points.shape, -bounds[level]), np.full(points.shape, bounds[level]))

    return evaluate


@dataclass(frozen=True, slots=True)
class QuadratureEnclosure:
    """An enclosure of ``∫g`` together with the pieces it was built from."""

    value: IntervalScalar
    rule: IntervalScalar
    remainder: float
    boxes: int


def _fourth_derivative(value: Any) -> NDArray[np.float64]:
    for _ in range(REMAINDER_ORDER):
        value = dual.tangent(value)
    value = dual.primal(value)
    if isinstance(value, IntervalArray):
        return value.mag
    return np.abs(np.asarray(value, dtype=np.float64))


def gauss_enclosure(integrand: Callable[[Any], Any], lower: Any, upper: Any, boxes: int) -> QuadratureEnclosure:
    """Enclose ``∫_lower^upper g`` by the composite two-point Gauss-Legendre rule on `boxes` equal boxes.

    The rule is evaluated at enclosures of the exact nodes ``c ± h/(2√3)``. On each box the error is
    ``h⁵/4320·g''''(ξ)``, and ``g''''`` is enclosed over the whole box by evaluating `integrand`
    on four nested dual levels over the box interval.

    Parameters
    ----------
    integrand: :class:`Callable`
        ``g``, written against :mod:`spectral_transfer.maps.dual` so it runs on intervals and duals.
    lower: :class:`Any`
        Lower limit, a float or an :class:`IntervalScalar` enclosing it.
    upper: :class:`Any`
        Upper limit, likewise.
    boxes: :class:`int`
        Number of equal boxes.

    Returns
    -------
    :class:`QuadratureEnclosure`
        The rule, the remainder bound and their sum as an interval.

    """
    a = as_interval(lower, ())
    h = (as_interval(upper, ()) - a) / float(boxes)
    edges = a + IntervalArray.point(np.arange(boxes + 1, dtype=np.float64)) * h
    cells = IntervalArray(edges.lo[:-1], edges.hi[1:])
    half = h / 2.0
    centres = a + IntervalArray.point(np.arange(boxes, dtype=np.float64) + 0.5) * h
    offset = half / IntervalArray.point(3.0).sqrt()
    values = as_interval(integrand(centres - offset), (boxes,)) + as_interval(integrand(centres + offset), (boxes,))
    rule = (half * values).sum()
    assert isinstance(rule, IntervalScalar)
    fourth = np.broadcast_to(_fourth_derivative(integrand(dual.lift(cells, REMAINDER_ORDER))), (boxes,))
    remainder = float((IntervalArray.point(fourth) * (h**5 / REMAINDER_DENOMINATOR)).sum().hi)
    value = rule + IntervalArray(-remainder, remainder)
    assert isinstance(value, IntervalScalar)
    return QuadratureEnclosure(value, rule, remainder, boxes)


def enclose_integral(
    integrand: Callable[[Any], Any],
    lower: Any,
    upper: Any,
    *,
    tolerance: float = QUADRATURE_TOLERANCE,
    max_boxes: int = MAX_BOXES,
) -> QuadratureEnclosure:
    """Run :func:`gauss_enclosure`, doubling the boxes until the remainder is below `tolerance`.

    The result is an enclosure at every box count; `tolerance` only decides how tight it is.
    """
    boxes = INITIAL_BOXES
    result = gauss_enclosure(integrand, lower, upper, boxes)
    while result.remainder > tolerance and boxes < max_boxes:
        boxes *= 2
        result = gauss_enclosure(integrand, lower, upper, boxes)
    if result.remainder > tolerance:
        LOGGER.warning(
            "<%s> | Quadrature remainder above tolerance | boxes: %s | remainder: %s | tolerance: %s",
            "enclose_integral",
            boxes,
            result.remainder,
            tolerance,
        )
    LOGGER.debug("<%s> | Enclosed integral | boxes: %s | remainder: %s", "enclose_integral", boxes, result.remainder)
    return result
