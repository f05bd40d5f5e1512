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
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, ClassVar, Self, Unpack

import numpy as np
from numpy.polynomial import polynomial as npoly

from spectral_transfer._enums import BasisKind, Direction, DomainKind, Provenance
from spectral_transfer.errors import BranchInverseError, MapSemanticError, NonExpandingError

from .dual import Dual, derivative, primal
from .expression import Expression, MapDocument, parse_document

if TYPE_CHECKING:
    from collections.abc import Callable, Mapping, Sequence

    from numpy.typing import ArrayLike, NDArray

    from spectral_transfer._types import ConstantsData, EstimateParams

__all__ = (
    "Branch",
    "Domain",
    "ForwardBranch",
    "InverseBranch",
    "MapConstants",
    "MarkovMap",
    "branch_inverse",
    "branch_inverse_derivatives",
    "estimate_constants",
    "parse_map_definition",
)

LOGGER = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
NEWTON_MAX_ITERATIONS = 100
IMAGE_TOLERANCE = 1e-10
COVER_TOLERANCE = 1e-9
MONOTONE_SAMPLES = 257
EXTRAPOLATION_DISTANCES = (1e-4, 1e-5, 1e-6)


@dataclass(frozen=True, slots=True)
class Domain:
    """The phase space of a map together with the affine chart onto its canonical domain."""

    kind: DomainKind
    interval: tuple[float, float]

    def __post_init__(self) -> None:
        a, b = self.interval
        if not a < b:
            raise MapSemanticError("domain endpoints must satisfy a < b, got %s and %s", a, b)

    @property
    def canonical(self) -> tuple[float, float]:
        return (0.0, TWO_PI) if self.kind is DomainKind.periodic else (-1.0, 1.0)

    @property
    def length(self) -> float:
        """Length of the canonical domain, ``|Λ|``."""
        return TWO_PI if self.kind is DomainKind.periodic else 2.0

    @property
    def user_length(self) -> float:
        return self.interval[1] - self.interval[0]

    @property
    def scale(self) -> float:
        """Canonical units per user unit."""
        return self.length / self.user_length

    @property
    def basis(self) -> BasisKind:
        return BasisKind.fourier if self.kind is DomainKind.periodic else BasisKind.chebyshev

    def to_canonical(self, x: Any) -> Any:
        return self.canonical[0] + (x - self.interval[0]) * self.scale

    def to_user(self, t: Any) -> Any:
        return self.interval[0] + (t - self.canonical[0]) / self.scale


@dataclass(frozen=True, slots=True)
class MapConstants:
    """Expansion and distortion constants of a map, all in user units.

    ``c1`` bounds ``|v''/v'|`` in user units; :meth:`canonical_c1` converts it for the bound formulas,
    which are stated on the canonical domain. ``lam`` and ``lam_check`` are dimensionless.
    """

    lam: float
    lam_check: float | None
    c1: float
    xi: float
    provenance: Mapping[str, Provenance] = field(default_factory=dict)
    grid_size: int | None = None

    names: ClassVar[tuple[str, ...]] = ("lam", "lam_check", "c1", "xi")

    def canonical_c1(self, domain: Domain) -> float:
        return self.c1 / domain.scale

    def is_user_supplied(self, *names: str) -> bool:
        return all(self.provenance.get(name) is Provenance.user_supplied for name in names or self.names)

    def with_values(self, **values: float) -> MapConstants:
        """Return a copy with some constants replaced by user-supplied values."""
        provenance = dict(self.provenance)
        for name in values:
            provenance[name] = Provenance.user_supplied
        return replace(self, provenance=provenance, **values)

    def require_expanding(self, kind: DomainKind) -> None:
        """Raise :exc:`NonExpandingError` unless the constant the solvers rely on exceeds one."""
        if kind is DomainKind.periodic:
            if not self.lam > 1.0:
                raise NonExpandingError("lambda", self.lam)
        elif self.lam_check is None or not self.lam_check > 1.0:
            raise NonExpandingError("lambda_check", float("nan") if self.lam_check is None else self.lam_check)

    def to_dict(self) -> ConstantsData:
        data: ConstantsData = {
            "lam": self.lam,
            "lam_check": self.lam_check,
            "c1": self.c1,
            "xi": self.xi,
            "provenance": {name: self.provenance.get(name, Provenance.grid_estimated).value for name in self.names},
        }
        if self.grid_size is not None:
            data["grid_size"] = self.grid_size
        return data


def _nesting(value: Any) -> int:
    depth = 0
    while isinstance(value, Dual):
        depth += 1
        value = value.real
    return depth


def _safeguarded_newton(
    func: Callable[[Any], Any],
    dfunc: Callable[[Any], Any],
    target: NDArray[np.float64],
    lo: float,
    hi: float,
    *,
    branch: int,
) -> NDArray[np.float64]:
    """Solve ``func(x) = target`` for monotone `func` on ``[lo, hi]``, elementwise.

    Newton steps that leave the current bracket are replaced by bisection.
    """
    f_lo = float(func(lo))
    f_hi = float(func(hi))
    sign = 1.0 if f_hi >= f_lo else -1.0
    x_lo = np.full(target.shape, lo)
    x_hi = np.full(target.shape, hi)
    x = np.clip(lo + (hi - lo) * (target - f_lo) / (f_hi - f_lo), lo, hi)
    done = np.zeros(target.shape, dtype=bool)
    residual = np.zeros(target.shape)
    for iteration in range(NEWTON_MAX_ITERATIONS):
        residual = np.asarray(func(x) - target, dtype=np.float64)
        slope = np.asarray(dfunc(x), dtype=np.float64) * np.ones(target.shape)
        signed = sign * residual
        x_lo = np.where(signed < 0, x, x_lo)
        x_hi = np.where(signed > 0, x, x_hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(slope != 0, residual / slope, np.inf)
        candidate = x - step
        inside = (candidate > x_lo) & (candidate < x_hi) & np.isfinite(candidate)
        candidate = np.where(inside, candidate, 0.5 * (x_lo + x_hi))
        scale = np.maximum(1.0, np.abs(x))
        newly_done = (residual == 0) | (np.abs(candidate - x) <= 4 * np.finfo(float).eps * scale)
        x = np.where(done | (residual == 0), x, candidate)
        done |= newly_done
        if done.all():
            LOGGER.debug("<%s> | Newton converged | branch: %s | iterations: %s", "_safeguarded_newton", branch, iteration + 1)
            break
    residual = np.asarray(func(x) - target, dtype=np.float64)
    slope = np.abs(np.asarray(dfunc(x), dtype=np.float64))
    bad = np.abs(residual) > 1e-13 * np.maximum(1.0, slope)
    if not done.all() or bad.any():
        raise BranchInverseError(branch, NEWTON_MAX_ITERATIONS, float(np.max(np.abs(residual))))
    return x


def _polish(func: Callable[[Any], Any], dfunc: Callable[[Any], Any], target: Any, start: Any, steps: int) -> Any:
    x = start
    for _ in range(steps):
        x = x - (func(x) - target) / dfunc(x)
    return x


class Branch:
    """One inverse branch ``v_ι`` of a Markov map, in canonical coordinates.

    Subclasses decide whether the user expression describes the forward map (inverted by
    safeguarded Newton) or the inverse map itself.
    """

    __slots__ = ("domain", "index", "orientation")

    index: int
    domain: tuple[float, float]
    orientation: int

    _repr_keys: ClassVar[list[str]] = ["index", "domain", "orientation"]

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__} " + " ".join(f"{key}={getattr(self, key)!r}" for key in self._repr_keys) + ">"

    def _shift(self, y: Any) -> Any:
        return y

    def turns(self, y: ArrayLike) -> NDArray[np.int64]:
        """Whole turns ``m`` the inversion adds to `y`, so ``v_ι(y)`` solves ``f̂(v) = y + 2πm``."""
        points = np.asarray(y, dtype=np.float64)
        return np.rint((self._shift(points) - points) / TWO_PI).astype(np.int64)

    def inverse(self, y: ArrayLike) -> NDArray[np.float64]:
        raise NotImplementedError

    def inverse_derivatives(self, y: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
        raise NotImplementedError

    def inverse_generic(self, y: Any) -> Any:
        """Evaluate ``v_ι`` on dual numbers or complex arguments."""
        raise NotImplementedError


class ForwardBranch(Branch):
    """A branch given by its forward evaluator ``f|_{O_ι}``.

    For a periodic map the branch is one sheet of the inverse of the lift, reached by shifting
    the target into the lift's range and adding ``2πι``.
    """

    __slots__ = ("_derivative", "_forward", "_lift_range")

    def __init__(
        self,
        index: int,
        domain: tuple[float, float],
        forward: Callable[[Any], Any],
        forward_derivative: Callable[[Any], Any] | None = None,
        *,
        lift_range: float | None = None,
    ) -> None:
        self.index = index
        self.domain = domain
        self._forward = forward
        self._derivative = forward_derivative or derivative(forward)
        self._lift_range = lift_range
        lo, hi = domain
        self.orientation = 1 if float(forward(hi)) >= float(forward(lo)) else -1

    def forward(self, x: Any) -> Any:
        return self._forward(x)

    def forward_derivative(self, x: Any) -> Any:
        return self._derivative(x)

    def forward_second_derivative(self, x: Any) -> Any:
        return derivative(self._derivative)(x)

    def _shift(self, y: Any) -> Any:
        if self._lift_range is None:
            return y
        y0 = np.real(primal(y))
        base = self._lift_range + np.mod(y0 - self._lift_range, TWO_PI) + TWO_PI * self.index
        return y + (base - y0)

    def inverse(self, y: ArrayLike) -> NDArray[np.float64]:
        return self._real_inverse(np.asarray(self._shift(np.asarray(y, dtype=np.float64)), dtype=np.float64))

    def inverse_derivatives(self, y: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
        v = self.inverse(y)
        first = np.asarray(self._derivative(v), dtype=np.float64) * np.ones_like(v)
        second = np.asarray(self.forward_second_derivative(v), dtype=np.float64) * np.ones_like(v)
        if np.any(np.abs(first) < 1e-14):
            raise NonExpandingError("f'", float(np.min(np.abs(first))))
        return v, 1.0 / first, -second / first**3

    def inverse_generic(self, y: Any) -> Any:
        target = self._shift(y)
        start_target = primal(target)
        if np.iscomplexobj(start_target):
            start = self._complex_inverse(np.asarray(start_target))
        else:
            start = self._real_inverse(np.asarray(start_target, dtype=np.float64))
        return _polish(self._forward, self._derivative, target, start, _nesting(target) + 2)

    def _real_inverse(self, target: NDArray[np.float64]) -> NDArray[np.float64]:
        lo, hi = self.domain
        return _safeguarded_newton(self._forward, self._derivative, np.atleast_1d(target), lo, hi, branch=self.index).reshape(target.shape)

    def _complex_inverse(self, target: NDArray[np.complex128]) -> NDArray[np.complex128]:
        lo, hi = self.domain
        f_lo, f_hi = sorted((float(self._forward(lo)), float(self._forward(hi))))
        anchor = np.clip(target.real, f_lo, f_hi)
        x = self._real_inverse(anchor).astype(np.complex128)
        for s in np.linspace(0.0, 1.0, 17)[1:]:
            x = _polish(self._forward, self._derivative, anchor + s * (target - anchor), x, 6)
        residual = np.abs(self._forward(x) - target)
        limit = 1e-10 * max(1.0, float(np.max(np.abs(target), initial=0.0)))
        if not np.all(np.isfinite(residual)) or np.max(residual, initial=0.0) > limit:
            raise BranchInverseError(self.index, 16 * 6, float(np.max(residual, initial=np.inf)))
        return x


class InverseBranch(Branch):
    """A branch of a circle map specified through the lift ``V`` of its inverse.

    ``v_ι(y) = V((y mod 2π) + 2πι)``; no root finding is needed for inverse evaluation.
    """

    __slots__ = ("_derivative", "_inverse")

    def __init__(self, index: int, inverse_lift: Callable[[Any], Any], inverse_derivative: Callable[[Any], Any] | None = None) -> None:
        self.index = index
        self._inverse = inverse_lift
        self._derivative = inverse_derivative or derivative(inverse_lift)
        start = float(inverse_lift(TWO_PI * index))
        end = float(inverse_lift(TWO_PI * (index + 1)))
        self.domain = (min(start, end), max(start, end))
        self.orientation = 1 if end >= start else -1

    def _shift(self, y: Any) -> Any:
        y0 = np.real(primal(y))
        return y + (np.mod(y0, TWO_PI) + TWO_PI * self.index - y0)

    def inverse(self, y: ArrayLike) -> NDArray[np.float64]:
        return np.asarray(self._inverse(self._shift(np.asarray(y, dtype=np.float64))), dtype=np.float64)

    def inverse_derivatives(self, y: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
        s = self._shift(np.asarray(y, dtype=np.float64))
        v = np.asarray(self._inverse(s), dtype=np.float64)
        first = np.asarray(self._derivative(s), dtype=np.float64) * np.ones_like(v)
        second = np.asarray(derivative(self._derivative)(s), dtype=np.float64) * np.ones_like(v)
        return v, first, second

    def inverse_generic(self, y: Any) -> Any:
        return self._inverse(self._shift(y))

    def inverse_lift(self, s: Any) -> Any:
        return self._inverse(s)

    def inverse_lift_derivative(self, s: Any) -> Any:
        return self._derivative(s)


class MarkovMap:
    """A full-branch Markov map that expands uniformly, on an interval or on the circle.

    All evaluation happens in canonical coordinates ([0, 2π) for periodic maps, [-1, 1] otherwise).
    Instances are immutable once constructed and every evaluator is a pure function, so a map
    may be shared between threads.
    """

    __slots__ = ("beta", "branches", "catalog_key", "constants", "direction", "domain", "name")

    name: str
    domain: Domain
    branches: tuple[Branch, ...]
    beta: int
    direction: Direction
    constants: MapConstants
    catalog_key: str | None

    _repr_keys: ClassVar[list[str]] = ["name", "domain", "beta", "direction", "constants"]

    def __init__(
        self,
        name: str,
        domain: Domain,
        branches: Sequence[Branch],
        *,
        direction: Direction = Direction.forward,
        constants: MapConstants | None = None,
        catalog_key: str | None = None,
    ) -> None:
        self.name = name
        self.domain = domain
        self.branches = tuple(branches)
        self.beta = len(self.branches)
        self.direction = direction
        self.catalog_key = catalog_key
        self.constants = constants if constants is not None else estimate_constants(self)
        LOGGER.debug("<%s.%s> | Built map | name: %s | branches: %s", __class__.__name__, "__init__", name, self.beta)

    def __repr__(self) -> str:
        return f"\n\n__{self.__class__.__name__}__\n" + "\n".join(f"{key}: {getattr(self, key)}" for key in self._repr_keys)

    @property
    def is_periodic(self) -> bool:
        return self.domain.kind is DomainKind.periodic

    @property
    def basis(self) -> BasisKind:
        return self.domain.basis

    def with_constants(self, **values: float) -> Self:
        """Return the same map with some constants replaced by user-supplied values."""
        clone = object.__new__(type(self))
        for name in self.__slots__:
            object.__setattr__(clone, name, getattr(self, name))
        clone.constants = self.constants.with_values(**values)
        return clone

    def __call__(self, x: ArrayLike) -> NDArray[np.float64]:
        """Evaluate the map in canonical coordinates (reduced mod 2π for periodic maps)."""
        points = np.asarray(x, dtype=np.float64)
        if self.is_periodic:
            return np.mod(self._lift_forward(np.mod(points, TWO_PI)), TWO_PI)
        out = np.empty_like(points)
        edges = np.array([branch.domain[0] for branch in self.branches][1:])
        which = np.searchsorted(edges, points, side="right")
        for i, branch in enumerate(self.branches):
            mask = which == i
            if np.any(mask):
                assert isinstance(branch, ForwardBranch)
                out[mask] = branch.forward(points[mask])
        return out

    def _lift_forward(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        first = self.branches[0]
        if isinstance(first, ForwardBranch):
            return np.asarray(first.forward(x), dtype=np.float64)
        assert isinstance(first, InverseBranch)
        v_start = float(first.inverse_lift(0.0))
        v_end = float(first.inverse_lift(TWO_PI * self.beta))
        low = min(v_start, v_end)
        target = np.atleast_1d(low + np.mod(x - low, TWO_PI))
        root = _safeguarded_newton(first.inverse_lift, first.inverse_lift_derivative, target, 0.0, TWO_PI * self.beta, branch=-1)
        return root.reshape(x.shape)

    def preimages(self, y: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """All branch inverses at `y` and the absolute derivative weights, stacked as (branches, points)."""
        points = np.atleast_1d(np.asarray(y, dtype=np.float64))
        values = np.empty((self.beta, points.size))
        weights = np.empty((self.beta, points.size))
        for i, branch in enumerate(self.branches):
            v, dv, _ = branch.inverse_derivatives(points)
            values[i] = v
            weights[i] = np.abs(dv)
        return values, weights

    @classmethod
    def from_document(cls, document: MapDocument, *, name: str = "user", catalog_key: str | None = None) -> MarkovMap:
        """Compile a parsed document into a map, checking the Markov and covering conditions.

        Raises
        ------
        MapSemanticError
            Overlapping or non-covering branch domains, a branch image that does not cover
            the domain, a non-monotone branch or a non-integer lift degree.

        """
        a = document.bounds[0].constant_value("domain start")
        b = document.bounds[1].constant_value("domain end")
        domain = Domain(document.kind, (a, b))
        if document.kind is DomainKind.periodic:
            if document.lift is None:
                raise MapSemanticError("periodic maps are described by a single lift, not by branches")
            lift = document.lift
            branches, direction = _lift_branches(domain, lift.expr, lift.deriv, lift.direction, lift.beta)
        else:
            if document.lift is not None or not document.branches:
                raise MapSemanticError("interval maps are described by branch blocks")
            branches = _interval_branches(domain, document)
            direction = Direction.forward
        return cls(name, domain, branches, direction=direction, catalog_key=catalog_key)


def _canonical(domain: Domain, expr: Expression) -> Callable[[Any], Any]:
    def evaluate(t: Any) -> Any:
        return domain.to_canonical(expr(domain.to_user(t)))

    return evaluate


def _canonical_derivative(domain: Domain, expr: Expression | None) -> Callable[[Any], Any] | None:
    if expr is None:
        return None

    def evaluate(t: Any) -> Any:
        return expr(domain.to_user(t))

    return evaluate


def _check_monotone(func: Callable[[Any], Any], lo: float, hi: float, what: str) -> None:
    samples = np.asarray(func(np.linspace(lo, hi, MONOTONE_SAMPLES)), dtype=np.float64)
    steps = np.diff(samples)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise MapSemanticError("%s is not strictly monotone", what)


def _interval_branches(domain: Domain, document: MapDocument) -> list[Branch]:
    specs = sorted(
        (
            (
                domain.to_canonical(spec.lo.constant_value("branch start")),
                domain.to_canonical(spec.hi.constant_value("branch end")),
                i,
                spec,
            )
            for i, spec in enumerate(document.branches)
        ),
        key=lambda item: item[0],
    )
    branches: list[Branch] = []
    total = 0.0
    for position, (lo, hi, original, spec) in enumerate(specs):
        if not lo < hi:
            raise MapSemanticError("branch %s has an empty domain", original)
        if lo < -1.0 - COVER_TOLERANCE or hi > 1.0 + COVER_TOLERANCE:
            raise MapSemanticError("branch %s domain leaves the interval", original)
        if position > 0 and lo < specs[position - 1][1] - COVER_TOLERANCE:
            raise MapSemanticError("branch domains %s and %s overlap", specs[position - 1][2], original)
        forward = _canonical(domain, spec.expr)
        images = sorted((float(forward(lo)), float(forward(hi))))
        if abs(images[0] + 1.0) > IMAGE_TOLERANCE or abs(images[1] - 1.0) > IMAGE_TOLERANCE:
            raise MapSemanticError("branch %s image does not cover domain", original)
        _check_monotone(forward, lo, hi, f"branch {original}")
        total += hi - lo
        branches.append(ForwardBranch(position, (lo, hi), forward, _canonical_derivative(domain, spec.deriv)))
    if abs(total - domain.length) > COVER_TOLERANCE * domain.length:
        raise MapSemanticError("branch domains do not cover the interval (total length %s)", total / domain.scale)
    return branches


def _lift_branches(
    domain: Domain,
    expr: Expression,
    deriv: Expression | None,
    direction: Direction,
    declared_beta: int | None,
) -> tuple[list[Branch], Direction]:
    lift = _canonical(domain, expr)
    lift_derivative = _canonical_derivative(domain, deriv)
    if direction is Direction.inverse:
        beta = declared_beta or 0
        if beta < 2:
            raise MapSemanticError("invlift needs a covering degree of at least 2, got %s", beta)
        rise = float(lift(TWO_PI * beta)) - float(lift(0.0))
        if abs(abs(rise) - TWO_PI) > COVER_TOLERANCE * TWO_PI:
            raise MapSemanticError("inverse lift must advance by one turn over %s turns", beta)
        _check_monotone(lift, 0.0, TWO_PI * beta, "inverse lift")
        return [InverseBranch(i, lift, lift_derivative) for i in range(beta)], direction
    rise = float(lift(TWO_PI)) - float(lift(0.0))
    ratio = rise / TWO_PI
    beta = round(abs(ratio))
    if abs(abs(ratio) - beta) > COVER_TOLERANCE or beta < 2:
        raise MapSemanticError("lift degree %s is not an integer of at least 2", ratio)
    _check_monotone(lift, 0.0, TWO_PI, "lift")
    low = min(float(lift(0.0)), float(lift(TWO_PI)))
    lift_dx = lift_derivative or derivative(lift)
    branches: list[Branch] = []
    for i in range(beta):
        edges = _safeguarded_newton(lift, lift_dx, np.array([low + TWO_PI * i, low + TWO_PI * (i + 1)]), 0.0, TWO_PI, branch=i)
        branches.append(ForwardBranch(i, (float(edges.min()), float(edges.max())), lift, lift_derivative, lift_range=low))
    return branches, direction


def _sample_constants(markov_map: MarkovMap, size: int) -> tuple[float, float | None, float]:
    lo, hi = markov_map.domain.canonical
    if markov_map.is_periodic:
        grid = np.linspace(lo, hi, size, endpoint=False)
    else:
        grid = np.linspace(lo, hi, size)
    largest_slope = 0.0
    c1 = 0.0
    lam_check = math.inf if not markov_map.is_periodic else None
    for branch in markov_map.branches:
        v, dv, d2v = branch.inverse_derivatives(grid)
        largest_slope = max(largest_slope, float(np.max(np.abs(dv))))
        c1 = max(c1, float(np.max(np.abs(d2v / dv))))
        if lam_check is not None:
            lam_check = min(lam_check, _c_expansion(branch, grid))
    lam = 1.0 / largest_slope if largest_slope > 0 else math.inf
    return lam, lam_check, c1


def _c_expansion_ratio(branch: Branch, y: NDArray[np.float64]) -> NDArray[np.float64]:
    v, dv, _ = branch.inverse_derivatives(y)
    return np.sqrt((1.0 - v) * (1.0 + v)) / np.sqrt((1.0 - y) * (1.0 + y)) / np.abs(dv)


def _c_expansion(branch: Branch, grid: NDArray[np.float64]) -> float:
    interior = grid[(grid > -1.0) & (grid < 1.0)]
    best = float(np.min(_c_expansion_ratio(branch, interior))) if interior.size else math.inf
    distances = np.array(EXTRAPOLATION_DISTANCES)
    for end in (-1.0, 1.0):
        v_end = float(branch.inverse(np.array([end]))[0])
        if abs(abs(v_end) - 1.0) > COVER_TOLERANCE:
            # v(±1) is interior, so the ratio blows up at this endpoint and cannot be the minimum.
            continue
        samples = _c_expansion_ratio(branch, end - np.sign(end) * distances)
        coefficients = npoly.polyfit(distances, samples, 2)
        best = min(best, float(coefficients[0]))
    return best


def _spacing(markov_map: MarkovMap) -> float:
    if markov_map.is_periodic:
        return 0.0
    worst = 0.0
    for branch in markov_map.branches:
        lo, hi = branch.domain
        for end in (-1.0, 1.0):
            gap = min(abs(end - lo), abs(end - hi))
            if gap <= COVER_TOLERANCE:
                continue
            worst = max(worst, (hi - lo) / gap)
    return worst


def estimate_constants(markov_map: MarkovMap, grid_size: int = 257, **params: Unpack[EstimateParams]) -> MapConstants:
    """Estimate the expansion, C-expansion, distortion and spacing constants on a grid.

    The grid is refined by doubling (nested grids, so minima can only decrease) until every
    estimate changes by less than the relative tolerance.

    Parameters
    ----------
    markov_map: :class:`MarkovMap`
        The map to sample.
    grid_size: :class:`int`, optional
        The initial number of grid points, at least 65, by default 257.
    **params: :class:`EstimateParams`
        ``max_refinements`` (default 6) and ``relative_change`` (default 1e-6).

    Returns
    -------
    :class:`MapConstants`
        Grid-estimated constants in user units.

    """
    if grid_size < 65:
        raise MapSemanticError("constant estimation needs a grid of at least 65 points, got %s", grid_size)
    refinements = params.get("max_refinements", 6)
    tolerance = params.get("relative_change", 1e-6)
    size = grid_size
    current = _sample_constants(markov_map, size)
    for _ in range(refinements):
        finer_size = 2 * size if markov_map.is_periodic else 2 * size - 1
        finer = _sample_constants(markov_map, finer_size)
        size = finer_size
        pairs = [(new, old) for new, old in zip(finer, current, strict=True) if new is not None and old is not None]
        changes = [abs(new - old) / max(abs(old), 1e-300) for new, old in pairs]
        current = finer
        if all(change < tolerance for change in changes):
            break
    lam, lam_check, c1_canonical = current
    if (lam_check is not None and lam_check <= 1.0) or lam <= 1.0:
        LOGGER.warning(
            "<%s> | Grid estimate is not expanding | map: %s | lambda: %s | lambda_check: %s",
            "estimate_constants",
            markov_map.name,
            lam,
            lam_check,
        )
    constants = MapConstants(
        lam=lam,
        lam_check=lam_check,
        c1=c1_canonical * markov_map.domain.scale,
        xi=_spacing(markov_map),
        provenance=dict.fromkeys(MapConstants.names, Provenance.grid_estimated),
        grid_size=size,
    )
    LOGGER.debug("<%s> | Estimated constants | map: %s | constants: %s", "estimate_constants", markov_map.name, constants)
    return constants


def branch_inverse(markov_map: MarkovMap, index: int, y: ArrayLike) -> Any:
    """Evaluate the inverse branch ``v_ι`` at `y`, in user coordinates.

    Raises
    ------
    BranchInverseError
        The safeguarded Newton iteration did not converge in 100 iterations.

    """
    domain = markov_map.domain
    points = np.asarray(y, dtype=np.float64)
    result = domain.to_user(markov_map.branches[index].inverse(domain.to_canonical(points)))
    return float(result) if points.ndim == 0 else result


def branch_inverse_derivatives(markov_map: MarkovMap, index: int, y: ArrayLike) -> tuple[Any, Any, Any]:
    """Return ``(v_ι(y), v_ι'(y), v_ι''(y))`` in user coordinates.

    Raises
    ------
    NonExpandingError
        ``f'`` vanishes at the preimage.

    """
    domain = markov_map.domain
    points = np.asarray(y, dtype=np.float64)
    v, dv, d2v = markov_map.branches[index].inverse_derivatives(domain.to_canonical(points))
    values = (domain.to_user(v), dv, d2v * domain.scale)
    if points.ndim == 0:
        return tuple(float(np.asarray(value).reshape(-1)[0]) for value in values)  # type: ignore[return-value]
    return values


def parse_map_definition(text: str) -> MarkovMap:
    """Build a map from a definition document or a catalog name.

    Parameters
    ----------
    text: :class:`str`
        Either a document (it starts with ``domain`` or a comment, or spans several lines) or a
        one-line catalog name such as ``lanford``, ``tupling(4)`` or ``circle k=3 linear``.

    Returns
    -------
    :class:`MarkovMap`
        The compiled map.

    Raises
    ------
    MapSyntaxError
        The document does not follow the grammar.
    MapSemanticError
        The document is well formed but does not describe a full-branch Markov map.
    CatalogLookupError
        The catalog name is unknown.

    """
    stripped = text.strip()
    if stripped.startswith(("domain", "#")) or "\n" in stripped:
        return MarkovMap.from_document(parse_document(stripped))
    from .catalog import lookup  # noqa: PLC0415

    return lookup(stripped)
