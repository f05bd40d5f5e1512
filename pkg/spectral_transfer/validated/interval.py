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
import math
from typing import TYPE_CHECKING, Any, ClassVar

import numpy as np

from spectral_transfer.errors import IntervalError
from spectral_transfer.maps import dual
from spectral_transfer.maps.dual import Dual

if TYPE_CHECKING:
    from collections.abc import Callable

    from numpy.typing import ArrayLike, NDArray

__all__ = (
    "PI",
    "IntervalArray",
    "IntervalScalar",
    "as_interval",
    "interval_matmul",
    "where",
)

LOGGER = logging.getLogger(__name__)

EPS = float(np.finfo(np.float64).eps)
TINY = float(np.finfo(np.float64).smallest_subnormal)
# Elementary functions from libm are trusted to within this many ulps.
ULPS = 4
# Phase tests for extrema and poles are widened by this many turns.
PHASE_MARGIN = 1e-9
TWO_PI = 2.0 * math.pi


def _down(x: Any) -> NDArray[np.float64]:
    return np.nextafter(x, -np.inf)


def _up(x: Any) -> NDArray[np.float64]:
    return np.nextafter(x, np.inf)


def _widened(lo: Any, hi: Any, ulps: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Push both endpoints outward by `ulps` relative units plus one subnormal."""
    with np.errstate(invalid="ignore", over="ignore"):
        low = _down(np.asarray(lo) - ulps * EPS * np.abs(lo) - TINY)
        high = _up(np.asarray(hi) + ulps * EPS * np.abs(hi) + TINY)
    return low, high


def _make(lo: Any, hi: Any) -> IntervalArray:
    if np.ndim(lo) == 0 and np.ndim(hi) == 0:
        return IntervalScalar(lo, hi)
    return IntervalArray(lo, hi)


def _coerce(value: Any) -> IntervalArray | None:
    if isinstance(value, IntervalArray):
        return value
    if isinstance(value, Dual):
        return None
    data = np.asarray(value)
    if data.dtype.kind not in "biuf":
        return None
    return _make(data.astype(np.float64), data.astype(np.float64))


def _contains_phase(lo: NDArray[np.float64], hi: NDArray[np.float64], offset: float, period: float) -> NDArray[np.bool_]:
    """Whether some ``offset + k·period`` may lie in ``[lo, hi]``; errs towards True."""
    first = np.ceil((lo - offset) / period - PHASE_MARGIN)
    return first * period + offset <= hi + PHASE_MARGIN * period


class IntervalArray:
    """An array of closed intervals ``[lo, hi]`` with outward rounding in binary64.

    Every operation returns an enclosure of the exact result for all points of its operands.
    Basic arithmetic is correctly rounded, so each result endpoint is moved one ulp outward;
    elementary functions are widened by a few ulps. Operations that have no bounded enclosure
    (division by an interval containing zero, ``log`` of a nonpositive interval, ``tan`` across
    a pole) raise :exc:`IntervalError` instead of returning infinite endpoints.

    Arrays broadcast like numpy arrays and mix freely with floats and float arrays, which are
    read as point intervals. Dual numbers win the operator dispatch, so an expression tree
    differentiates on interval arguments.
    """

    __slots__ = ("hi", "lo")

    lo: NDArray[np.float64]
    hi: NDArray[np.float64]

    __array_ufunc__ = None

    _repr_keys: ClassVar[list[str]] = ["shape", "max_width"]

    def __init__(self, lo: ArrayLike, hi: ArrayLike | None = None) -> None:
        low = np.asarray(lo, dtype=np.float64)
        high = low if hi is None else np.asarray(hi, dtype=np.float64)
        low, high = np.broadcast_arrays(low, high)
        if np.any(np.isnan(low)) or np.any(np.isnan(high)):
            raise IntervalError("construction", "an endpoint is NaN")
        if np.any(low > high):
            raise IntervalError("construction", "a lower endpoint exceeds its upper endpoint")
        self.lo = np.array(low)
        self.hi = np.array(high)

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__} " + " ".join(f"{key}={getattr(self, key)!r}" for key in self._repr_keys) + ">"

    @classmethod
    def point(cls, value: ArrayLike) -> IntervalArray:
        """Degenerate intervals at exactly representable values."""
        data = np.asarray(value, dtype=np.float64)
        return _make(data, data)

    @classmethod
    def enclose(cls, center: ArrayLike, radius: ArrayLike) -> IntervalArray:
        """``[center - radius, center + radius]`` rounded outward."""
        mid = np.asarray(center, dtype=np.float64)
        rad = np.abs(np.asarray(radius, dtype=np.float64))
        return _make(_down(mid - rad), _up(mid + rad))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.lo.shape

    @property
    def ndim(self) -> int:
        return self.lo.ndim

    @property
    def size(self) -> int:
        return int(self.lo.size)

    def __len__(self) -> int:
        return self.shape[0]

    @property
    def mid(self) -> NDArray[np.float64]:
        return 0.5 * self.lo + 0.5 * self.hi

    @property
    def rad(self) -> NDArray[np.float64]:
        """An upper bound on the distance from :attr:`mid` to either endpoint."""
        mid = self.mid
        return _up(np.maximum(_up(self.hi - mid), _up(mid - self.lo)))

    @property
    def width(self) -> NDArray[np.float64]:
        return _up(self.hi - self.lo)

    @property
    def max_width(self) -> float:
        return float(np.max(self.width, initial=0.0))

    @property
    def mag(self) -> NDArray[np.float64]:
        """``max |x|`` over each interval."""
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    @property
    def mig(self) -> NDArray[np.float64]:
        """``min |x|`` over each interval."""
        straddles = (self.lo <= 0) & (self.hi >= 0)
        return np.where(straddles, 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))

    @property
    def T(self) -> IntervalArray:  # noqa: N802
        return _make(self.lo.T, self.hi.T)

    def __getitem__(self, index: Any) -> IntervalArray:
        return _make(self.lo[index], self.hi[index])

    def reshape(self, *shape: int) -> IntervalArray:
        return _make(self.lo.reshape(*shape), self.hi.reshape(*shape))

    def contains(self, value: Any) -> Any:
        """Elementwise ``lo ≤ value ≤ hi``."""
        return (self.lo <= value) & (value <= self.hi)

    def contains_zero(self) -> NDArray[np.bool_]:
        return (self.lo <= 0) & (self.hi >= 0)

    def is_subset(self, other: IntervalArray) -> bool:
        return bool(np.all((other.lo <= self.lo) & (self.hi <= other.hi)))

    def is_interior(self, other: IntervalArray) -> NDArray[np.bool_]:
        """Elementwise strict containment in `other`, the contraction test of interval Newton."""
        return (other.lo < self.lo) & (self.hi < other.hi)

    def intersect(self, other: IntervalArray) -> IntervalArray:
        """The intersection; an empty one means the two enclosures contradict each other.

        Raises
        ------
        IntervalError
            Some pair of intervals is disjoint.

        """
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            raise IntervalError("intersection", f"{int(np.count_nonzero(lo > hi))} entries are empty")
        return _make(lo, hi)

    def hull(self, other: IntervalArray) -> IntervalArray:
        return _make(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def sum(self, axis: int | None = None) -> IntervalArray:
        """Sum along `axis` with the ``γ_n`` bound on the accumulated rounding error."""
        count = self.size if axis is None else self.shape[axis]
        gamma = 1.01 * count * EPS
        lo = np.sum(self.lo, axis=axis)
        hi = np.sum(self.hi, axis=axis)
        lo_error = gamma * np.sum(np.abs(self.lo), axis=axis) + count * TINY
        hi_error = gamma * np.sum(np.abs(self.hi), axis=axis) + count * TINY
        return _make(_down(lo - lo_error), _up(hi + hi_error))

    # Arithmetic

    def __neg__(self) -> IntervalArray:
        return _make(-self.hi, -self.lo)

    def __pos__(self) -> IntervalArray:
        return self

    def __abs__(self) -> IntervalArray:
        return _make(self.mig, self.mag)

    def __add__(self, other: Any) -> Any:
        rhs = _coerce(other)
        if rhs is None:
            return NotImplemented
        return _make(_down(self.lo + rhs.lo), _up(self.hi + rhs.hi))

    def __radd__(self, other: Any) -> Any:
        return self.__add__(other)

    def __sub__(self, other: Any) -> Any:
        rhs = _coerce(other)
        if rhs is None:
            return NotImplemented
        return _make(_down(self.lo - rhs.hi), _up(self.hi - rhs.lo))

    def __rsub__(self, other: Any) -> Any:
        lhs = _coerce(other)
        if lhs is None:
            return NotImplemented
        return lhs.__sub__(self)

    def __mul__(self, other: Any) -> Any:
        rhs = _coerce(other)
        if rhs is None:
            return NotImplemented
        with np.errstate(invalid="ignore"):
            products = np.stack(np.broadcast_arrays(self.lo * rhs.lo, self.lo * rhs.hi, self.hi * rhs.lo, self.hi * rhs.hi))
        products = np.nan_to_num(products, nan=0.0, posinf=np.inf, neginf=-np.inf)
        return _make(_down(products.min(axis=0)), _up(products.max(axis=0)))

    def __rmul__(self, other: Any) -> Any:
        return self.__mul__(other)

    def __truediv__(self, other: Any) -> Any:
        rhs = _coerce(other)
        if rhs is None:
            return NotImplemented
        if np.any(rhs.contains_zero()):
            raise IntervalError("division", "the divisor contains zero")
        quotients = np.stack(np.broadcast_arrays(self.lo / rhs.lo, self.lo / rhs.hi, self.hi / rhs.lo, self.hi / rhs.hi))
        return _make(_down(quotients.min(axis=0)), _up(quotients.max(axis=0)))

    def __rtruediv__(self, other: Any) -> Any:
        lhs = _coerce(other)
        if lhs is None:
            return NotImplemented
        return lhs.__truediv__(self)

    def __pow__(self, other: Any) -> Any:
        if isinstance(other, Dual):
            return NotImplemented
        if isinstance(other, IntervalArray) or float(other) != int(other):
            return exp(other * log(self))
        n = int(other)
        if n == 0:
            return _make(np.ones(self.shape), np.ones(self.shape))
        if n < 0:
            return 1.0 / (self**-n)
        with np.errstate(over="ignore"):
            if n % 2 == 0:
                lo, hi = self.mig**n, self.mag**n
            else:
                lo, hi = self.lo**n, self.hi**n
        low, high = _widened(lo, hi, n + 2)
        if n % 2 == 0:
            low = np.maximum(low, 0.0)
        return _make(low, high)

    def __rpow__(self, other: Any) -> Any:
        base = _coerce(other)
        if base is None:
            return NotImplemented
        return exp(self * log(base))

    def __matmul__(self, other: Any) -> IntervalArray:
        return interval_matmul(self, other)

    def __rmatmul__(self, other: Any) -> IntervalArray:
        return interval_matmul(other, self)

    # Elementary functions

    def _monotone(self, func: Callable[[Any], Any], *, increasing: bool = True, ulps: int = ULPS) -> IntervalArray:
        first, second = func(self.lo), func(self.hi)
        lo, hi = (first, second) if increasing else (second, first)
        return _make(*_widened(lo, hi, ulps))

    def _periodic(self, func: Callable[[Any], Any], peak: float, trough: float) -> IntervalArray:
        ends = np.stack((func(self.lo), func(self.hi)))
        lo, hi = _widened(ends.min(axis=0), ends.max(axis=0), ULPS)
        full_turn = self.hi - self.lo >= TWO_PI
        hi = np.where(full_turn | _contains_phase(self.lo, self.hi, peak, TWO_PI), 1.0, np.minimum(hi, 1.0))
        lo = np.where(full_turn | _contains_phase(self.lo, self.hi, trough, TWO_PI), -1.0, np.maximum(lo, -1.0))
        return _make(lo, hi)

    def sin(self) -> IntervalArray:
        return self._periodic(np.sin, 0.5 * math.pi, -0.5 * math.pi)

    def cos(self) -> IntervalArray:
        return self._periodic(np.cos, 0.0, math.pi)

    def tan(self) -> IntervalArray:
        if np.any(self.hi - self.lo >= math.pi) or np.any(_contains_phase(self.lo, self.hi, 0.5 * math.pi, math.pi)):
            raise IntervalError("tan", "the argument contains a pole")
        return self._monotone(np.tan)

    def exp(self) -> IntervalArray:
        result = self._monotone(np.exp)
        return _make(np.maximum(result.lo, 0.0), result.hi)

    def log(self) -> IntervalArray:
        if np.any(self.lo <= 0):
            raise IntervalError("log", "the argument is not positive")
        return self._monotone(np.log)

    def sqrt(self) -> IntervalArray:
        if np.any(self.hi < 0):
            raise IntervalError("sqrt", "the argument is negative")
        lo = np.sqrt(np.maximum(self.lo, 0.0))
        hi = np.sqrt(self.hi)
        return _make(np.maximum(_down(lo), 0.0), _up(hi))

    def _clipped_unit(self, name: str) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        if np.any((self.lo > 1.0) | (self.hi < -1.0)):
            raise IntervalError(name, "the argument lies outside [-1, 1]")
        return np.clip(self.lo, -1.0, 1.0), np.clip(self.hi, -1.0, 1.0)

    def arccos(self) -> IntervalArray:
        lo, hi = self._clipped_unit("arccos")
        low, high = _widened(np.arccos(hi), np.arccos(lo), ULPS)
        return _make(np.maximum(low, 0.0), np.minimum(high, PI_UPPER))

    def arcsin(self) -> IntervalArray:
        lo, hi = self._clipped_unit("arcsin")
        low, high = _widened(np.arcsin(lo), np.arcsin(hi), ULPS)
        return _make(np.maximum(low, -0.5 * PI_UPPER), np.minimum(high, 0.5 * PI_UPPER))

    def sign(self) -> IntervalArray:
        lo = np.where(self.lo > 0, 1.0, np.where(self.hi < 0, -1.0, np.where((self.lo == 0) & (self.hi == 0), 0.0, -1.0)))
        hi = np.where(self.hi < 0, -1.0, np.where(self.lo > 0, 1.0, np.where((self.lo == 0) & (self.hi == 0), 0.0, 1.0)))
        return _make(lo, hi)


class IntervalScalar(IntervalArray):
    """A single interval; endpoints are exposed as floats."""

    __slots__ = ()

    _repr_keys: ClassVar[list[str]] = ["lower", "upper"]

    @property
    def lower(self) -> float:
        return float(self.lo)

    @property
    def upper(self) -> float:
        return float(self.hi)

    def __float__(self) -> float:
        return float(self.mid)

    def __contains__(self, value: Any) -> bool:
        return self.lower <= value <= self.upper


PI_UPPER = float(np.nextafter(math.pi, np.inf))
# math.pi rounds π down, so the next double up closes the enclosure.
PI = IntervalScalar(math.pi, PI_UPPER)


def where(mask: NDArray[np.bool_], first: IntervalArray, second: IntervalArray) -> IntervalArray:
    """Elementwise choice between two enclosures, like :func:`numpy.where`."""
    return IntervalArray(np.where(mask, first.lo, second.lo), np.where(mask, first.hi, second.hi))


def as_interval(value: Any, shape: tuple[int, ...]) -> IntervalArray:
    """Broadcast an enclosure, or a float read as a point interval, to `shape`."""
    if isinstance(value, IntervalArray):
        return IntervalArray(np.broadcast_to(value.lo, shape), np.broadcast_to(value.hi, shape))
    return IntervalArray.point(np.broadcast_to(np.asarray(value, dtype=np.float64), shape))


def _mid_rad(value: Any) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    if isinstance(value, IntervalArray):
        return value.mid, value.rad
    data = np.asarray(value, dtype=np.float64)
    return data, np.zeros(data.shape)


def interval_matmul(a: Any, b: Any) -> IntervalArray:
    """Enclosure of ``a @ b`` for interval or float operands, in midpoint-radius form.

    The floating product of the midpoints is off by at most ``γ·|mA||mB|`` with ``γ = (n + 2)ε``;
    the radii add ``rA(|mB| + rB) + |mA|rB``. The radius is itself computed in round-to-nearest, so it is
    scaled by ``1 + γ`` and padded by the underflow threshold before rounding outward.
    """
    ma, ra = _mid_rad(a)
    mb, rb = _mid_rad(b)
    inner = ma.shape[-1]
    gamma = (inner + 2) * EPS
    mid = ma @ mb
    abs_a = np.abs(ma)
    abs_b = np.abs(mb)
    rad = gamma * (abs_a @ abs_b) + ra @ (abs_b + rb) + abs_a @ rb
    rad = rad * (1.0 + gamma) + (inner + 2) * float(np.finfo(np.float64).tiny)
    return _make(_down(mid - rad), _up(mid + rad))


@dual.sin.register
def _(x: IntervalArray) -> IntervalArray:
    return x.sin()


@dual.cos.register
def _(x: IntervalArray) -> IntervalArray:
    return x.cos()


@dual.tan.register
def _(x: IntervalArray) -> IntervalArray:
    return x.tan()


@dual.exp.register
def _(x: IntervalArray) -> IntervalArray:
    return x.exp()


@dual.log.register
def _(x: IntervalArray) -> IntervalArray:
    return x.log()


@dual.sqrt.register
def _(x: IntervalArray) -> IntervalArray:
    return x.sqrt()


@dual.absolute.register
def _(x: IntervalArray) -> IntervalArray:
    return abs(x)


@dual.arccos.register
def _(x: IntervalArray) -> IntervalArray:
    return x.arccos()


@dual.arcsin.register
def _(x: IntervalArray) -> IntervalArray:
    return x.arcsin()


@dual.sign.register
def _(x: IntervalArray) -> IntervalArray:
    return x.sign()


def exp(x: Any) -> Any:
    return dual.exp(x)


def log(x: Any) -> Any:
    return dual.log(x)
