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
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Unpack

import numpy as np
from scipy import linalg

from spectral_transfer._enums import BasisKind, BudgetDominance, QuantityKind
from spectral_transfer.errors import BoundModelError, CertificationError, ConfigurationError, IntervalError
from spectral_transfer.maps import ForwardBranch, InverseBranch, dual
from spectral_transfer.solver import a_priori_solution_norm
from spectral_transfer.spectral import NodeGrid, SpectralFunction, bv_norm_upper_function, integrate
from spectral_transfer.transfer import (
    AnalyticBound,
    DifferentiableBound,
    EntryBoundModel,
    aliasing_bound,
    default_entry_model,
    truncation_bound,
)

from .functions import (
    REMAINDER_ORDER,
    derivative_bounds,
    enclose_integral,
    interval_basis,
    interval_integral,
    interval_integral_row,
    interval_product,
    spectral_jet,
)
from .interval import EPS, PI, IntervalArray, IntervalScalar, as_interval, interval_matmul, where

if TYPE_CHECKING:
    from collections.abc import Callable

    from numpy.typing import NDArray

    from spectral_transfer._types import CertificateData, ValidateParams
    from spectral_transfer.maps import Branch, MarkovMap

__all__ = (
    "PI",
    "IntervalArray",
    "IntervalScalar",
    "ValidatedResult",
    "finite_section_error",
    "interval_assemble",
    "interval_matmul",
    "interval_nodes",
    "interval_solve",
    "validate",
    "validated_quantity",
)

LOGGER = logging.getLogger(__name__)

DEFAULT_PRECISION = 53
NEWTON_RADIUS = 1e-13
NEWTON_GROWTH = 1e3
NEWTON_ATTEMPTS = 3
BOUND_SLACK = 1e-12
SUP_BOXES = 256


def _concatenate(parts: list[IntervalArray], axis: int) -> IntervalArray:
    return IntervalArray(np.concatenate([part.lo for part in parts], axis=axis), np.concatenate([part.hi for part in parts], axis=axis))


def _bv_upper(vector: IntervalArray, basis: BasisKind) -> float:
    """BV upper norm of every function whose coefficients lie in `vector`."""
    bound = bv_norm_upper_function(SpectralFunction(basis, vector.mag))
    return float(np.nextafter(bound * (1.0 + 4.0 * vector.size * EPS), np.inf))


def finite_section_error(product: float) -> float:
    """``1/(1/(b^𝓔·b^𝓢) - 1)``, the finite-section part of the error budget.

    Raises
    ------
    CertificationError
        ``b^𝓔·b^𝓢 ≥ 1``, where the finite-section argument gives no bound.

    """
    if not 0.0 <= product < 1.0:
        raise CertificationError("b_E * b_S = %s is not below 1; increase the order or sharpen the bounds", product)
    if product == 0.0:
        return 0.0
    return 1.0 / (1.0 / product - 1.0)


def interval_nodes(basis: BasisKind, order: int) -> IntervalArray:
    """Enclosures of the interpolation nodes, in the order :class:`NodeGrid` lists them."""
    index = np.arange(order, dtype=np.float64)
    if basis is BasisKind.chebyshev:
        return ((PI * (2.0 * index + 1.0)) / (2.0 * order)).cos()
    return (PI * (2.0 * index)) / float(order)


def _transform_matrix(basis: BasisKind, order: int) -> IntervalArray:
    """The interpolation matrix taking node values to coefficients, entry by entry in intervals.

    Angles are reduced exactly in integer arithmetic before multiplying by π, so every entry
    is as tight as a single cosine.
    """
    rows = np.arange(order)[:, None]
    cols = np.arange(order)[None, :]
    if basis is BasisKind.chebyshev:
        reduced = (rows * (2 * cols + 1)) % (4 * order)
        cosines = ((PI * reduced.astype(np.float64)) / (2.0 * order)).cos()
        factor = np.where(rows == 0, 1.0, 2.0) * np.ones((1, order))
        return cosines * (IntervalArray.point(factor) / float(order))
    modes = (rows + 1) // 2
    reduced = (modes * cols) % order
    angles = (PI * (2.0 * reduced.astype(np.float64))) / float(order)
    cosine_slot = (rows % 2 == 1) | (rows == 0)
    values = where(np.broadcast_to(cosine_slot, (order, order)), angles.cos(), angles.sin())
    factor = np.where(rows == 0, 1.0, 2.0) * np.ones((1, order))
    if order % 2 == 0:
        factor[order - 1] = 1.0
    return values * (IntervalArray.point(factor) / float(order))


def _branch_enclosure(branch: Branch, targets: IntervalArray, points: NDArray[np.float64]) -> tuple[IntervalArray, IntervalArray]:
    """Enclose ``v_ι`` and ``|v_ι'|`` at the points `targets` encloses.

    Branches given by their forward map are verified by one interval Newton step around the
    floating preimage: if ``N(X) = v₀ - (f(v₀) - y)/f'(X)`` lands strictly inside ``X`` the
    preimage is unique in ``N(X)``. Boxes that do not contract are enlarged a few times.

    Raises
    ------
    IntervalError
        Some box still fails to contract, or ``f'`` may vanish on it.

    """
    shape = points.shape
    shifted = targets + (2.0 * PI) * branch.turns(points).astype(np.float64)
    if isinstance(branch, InverseBranch):
        values = as_interval(branch.inverse_lift(shifted), shape)
        slopes = as_interval(branch.inverse_lift_derivative(shifted), shape)
        return values, abs(slopes)
    if not isinstance(branch, ForwardBranch):
        raise IntervalError("branch enclosure", f"branch {branch.index} has no interval evaluator")
    centre = branch.inverse(points)
    start = IntervalArray.point(centre)
    residual = as_interval(branch.forward(start), shape) - shifted
    radius = NEWTON_RADIUS * np.maximum(1.0, np.abs(centre))
    for attempt in range(NEWTON_ATTEMPTS):
        box = IntervalArray.enclose(centre, radius)
        slope = as_interval(branch.forward_derivative(box), shape)
        if np.any(slope.contains_zero()):
            raise IntervalError("Newton", f"the derivative of branch {branch.index} may vanish near a preimage")
        candidate = start - residual / slope
        inside = candidate.is_interior(box)
        if np.all(inside):
            LOGGER.debug("<%s> | Newton step contracted | branch: %s | attempt: %s", "_branch_enclosure", branch.index, attempt + 1)
            values = candidate.intersect(box)
            return values, 1.0 / abs(as_interval(branch.forward_derivative(values), shape))
        radius = np.where(inside, radius, radius * NEWTON_GROWTH)
    raise IntervalError("Newton", f"branch {branch.index} failed to contract at {int(np.count_nonzero(~inside))} points")


def _node_values(basis: BasisKind, enclosures: list[tuple[IntervalArray, IntervalArray]], slots: NDArray[np.int64]) -> IntervalArray:
    total: IntervalArray | None = None
    for values, weights in enclosures:
        term = weights.reshape(-1, 1) * interval_basis(basis, values, slots)
        total = term if total is None else total + term
    assert total is not None
    return total


def interval_assemble(markov_map: MarkovMap, order: int, model: EntryBoundModel, *, threads: int = 1) -> IntervalArray:
    """Enclose the ``order × order`` transfer matrix.

    Node values ``Σ_ι |v_ι'| b_k(v_ι)`` are enclosed through verified branch inverses and taken
    to coefficients by an interval matrix product. The aliasing bound is added as
    ``[-A_jk, A_jk]`` and the result is intersected with ``[-b_jk, b_jk]`` from `model`.

    Parameters
    ----------
    markov_map: :class:`MarkovMap`
        The map; its expressions are evaluated on interval arguments.
    order: :class:`int`
        Matrix size, at least 4.
    model: :class:`EntryBoundModel`
        Supplies the aliasing and entry bounds; it must describe this map.
    threads: :class:`int`, optional
        Workers for the node values, by default 1. Results do not depend on it.

    Returns
    -------
    :class:`IntervalArray`
        The enclosure, rows and columns in slot order.

    Raises
    ------
    IntervalError
        A branch inverse could not be verified, or an entry enclosure misses its bound entirely.

    """
    if order < 4:
        raise ConfigurationError("order", f"interval assembly needs at least 4 nodes, got {order}")
    if model.basis is not markov_map.basis:
        raise BoundModelError("the model is for the %s basis but %s needs %s", model.basis.value, markov_map.name, markov_map.basis.value)
    basis = markov_map.basis
    points = NodeGrid(basis, order).nodes
    targets = interval_nodes(basis, order)
    enclosures = [_branch_enclosure(branch, targets, points) for branch in markov_map.branches]
    slots = np.arange(order)
    if threads <= 1 or order < 2 * threads:
        values = _node_values(basis, enclosures, slots)
    else:
        chunks = np.array_split(slots, threads)
        with ThreadPoolExecutor(max_workers=threads) as executor:
            values = _concatenate(list(executor.map(lambda chunk: _node_values(basis, enclosures, chunk), chunks)), axis=1)
    matrix = interval_matmul(_transform_matrix(basis, order), values)
    rows = slots[:, None]
    cols = slots[None, :]
    alias = np.asarray(aliasing_bound(model, rows, cols, order), dtype=np.float64)
    matrix = matrix + IntervalArray(-alias, alias)
    limit = np.nextafter(np.asarray(model.bound(rows, cols), dtype=np.float64) * (1.0 + BOUND_SLACK), np.inf)
    outside = (matrix.lo > limit) | (matrix.hi < -limit)
    if np.any(outside):
        raise IntervalError("assembly", f"{int(np.count_nonzero(outside))} entries miss the entry bound model; check the constants")
    matrix = matrix.intersect(IntervalArray(-limit, limit))
    LOGGER.debug(
        "<%s> | Interval assembly | map: %s | order: %s | widest entry: %s", "interval_assemble", markov_map.name, order, matrix.max_width
    )
    return matrix


def _interval_u(basis: BasisKind, order: int, u: SpectralFunction | None) -> IntervalArray:
    if u is not None:
        return IntervalArray.point(u.resized(order).coeffs)
    first = IntervalArray.point(0.5) if basis is BasisKind.chebyshev else 1.0 / (2.0 * PI)
    lo = np.zeros(order)
    hi = np.zeros(order)
    lo[0] = first.lo
    hi[0] = first.hi
    return IntervalArray(lo, hi)


@dataclass(slots=True)
class ValidatedResult:
    """A midpoint density with a certified BV ball around it.

    ``‖ρ - ρ̃‖_BV ≤ eps_interval + eps_finite``: the first part certifies the finite solve through
    its interval residual, the second bounds the distance between the finite and the exact
    solution operators.
    """

    basis: BasisKind
    order: int
    midpoint: SpectralFunction
    eps_interval: float
    eps_finite: float
    b_sol: float
    b_trunc: float
    residual_bv: float
    k_matrix: IntervalArray = field(repr=False)
    model: EntryBoundModel | None = field(default=None, repr=False)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def product(self) -> float:
        return self.b_trunc * self.b_sol

    @property
    def eps_total(self) -> float:
        return float(np.nextafter(self.eps_interval + self.eps_finite, np.inf))

    @property
    def dominated_by(self) -> BudgetDominance:
        return BudgetDominance.interval if self.eps_interval >= self.eps_finite else BudgetDominance.truncation

    @property
    def recommended_bits(self) -> int:
        """Working precision after which rounding stops mattering next to truncation, ``⌈-log₂(N⁴·b^𝓔)⌉``."""
        scaled = self.order**4 * max(self.b_trunc, float(np.finfo(np.float64).tiny))
        return max(DEFAULT_PRECISION, math.ceil(-math.log2(scaled)))

    def inputs(self) -> dict[str, float | str]:
        data: dict[str, float | str] = {"b_sol": self.b_sol, "b_trunc": self.b_trunc, "precision": DEFAULT_PRECISION}
        if isinstance(self.model, AnalyticBound):
            data.update(bound_case=self.model.case.value, zeta=self.model.zeta, h=self.model.h)
        elif isinstance(self.model, DifferentiableBound):
            data.update(bound_case=self.model.case.value, r=self.model.r)
        return data

    def certificate(
        self,
        map_name: str,
        quantities: dict[str, IntervalScalar] | None = None,
        *,
        deterministic: bool = False,
    ) -> CertificateData:
        data: CertificateData = {
            "map": map_name,
            "order": self.order,
            "midpoint_coefficients": [float(c) for c in self.midpoint.coeffs],
            "eps_interval": self.eps_interval,
            "eps_finite": self.eps_finite,
            "eps_total": self.eps_total,
            "dominated_by": self.dominated_by.value,
            "recommended_bits": self.recommended_bits,
            "inputs": self.inputs(),
        }
        if quantities:
            data["quantities"] = {name: [value.lower, value.upper] for name, value in quantities.items()}
        if not deterministic:
            data["timings"] = dict(self.timings)
        return data


def interval_solve(
    matrix: IntervalArray,
    b_sol: float,
    b_trunc: float,
    *,
    basis: BasisKind,
    u: SpectralFunction | None = None,
    max_residual: float | None = None,
    model: EntryBoundModel | None = None,
) -> ValidatedResult:
    """Solve ``K^{(N)}ρ = u`` at the midpoint and certify the result through its residual.

    With ``K`` enclosing ``I - L^{(N)} + u𝒮``, the residual ``r = u - Kρ̃`` is enclosed in
    intervals and ``‖𝓢_N r‖_BV ≤ b^𝓢/(1 - b^𝓢b^𝓔)·‖r‖_BV``. The finite-section part is
    ``1/(1/(b^𝓔b^𝓢) - 1)``, scaled by ``‖u‖_BV`` when that exceeds one.

    Raises
    ------
    CertificationError
        ``b^𝓔·b^𝓢 ≥ 1``, or the residual bound exceeds `max_residual`.

    """
    product = b_trunc * b_sol
    finite = finite_section_error(product)
    order = matrix.shape[0]
    u_interval = _interval_u(basis, order, u)
    k_matrix = IntervalArray.point(np.eye(order)) - matrix + u_interval.reshape(-1, 1) * interval_integral_row(basis, order).reshape(1, -1)
    coefficients = linalg.solve(k_matrix.mid, u_interval.mid)
    midpoint = SpectralFunction(basis, coefficients)
    midpoint = midpoint.scaled(1.0 / integrate(midpoint))
    residual = u_interval - k_matrix @ midpoint.coeffs
    residual_bv = _bv_upper(residual, basis)
    if max_residual is not None and residual_bv > max_residual:
        raise CertificationError("residual bound %s exceeds %s; try a larger order", residual_bv, max_residual)
    u_norm = bv_norm_upper_function(SpectralFunction(basis, u_interval.mag))
    result = ValidatedResult(
        basis,
        order,
        midpoint,
        eps_interval=float(np.nextafter(b_sol / (1.0 - product) * residual_bv, np.inf)),
        eps_finite=finite * max(1.0, u_norm),
        b_sol=b_sol,
        b_trunc=b_trunc,
        residual_bv=residual_bv,
        k_matrix=k_matrix,
        model=model,
    )
    LOGGER.info(
        "<%s> | Certified solve | order: %s | eps_interval: %s | eps_finite: %s | dominated by: %s",
        "interval_solve",
        order,
        result.eps_interval,
        result.eps_finite,
        result.dominated_by.value,
    )
    return result


def _turn(index: int) -> IntervalScalar:
    shift = (2.0 * PI) * float(index)
    assert isinstance(shift, IntervalScalar)
    return shift


def _cover(lower: Any, upper: Any, boxes: int) -> IntervalArray:
    """Boxes whose union contains ``[lower, upper]``; either limit may be an interval."""
    a = as_interval(lower, ())
    step = (as_interval(upper, ()) - a) / float(boxes)
    edges = a + IntervalArray.point(np.arange(boxes + 1, dtype=np.float64)) * step
    return IntervalArray(edges.lo[:-1], edges.hi[1:])


def _sup_log_slope(markov_map: MarkovMap, boxes: int = SUP_BOXES) -> float:
    """An upper bound on ``sup |log|f'||`` from interval evaluation over `boxes` boxes per branch."""
    worst = 0.0
    for branch in markov_map.branches:
        if isinstance(branch, InverseBranch):
            cover = _cover(_turn(branch.index), _turn(branch.index + 1), boxes)
            logs = abs(as_interval(branch.inverse_lift_derivative(cover), cover.shape)).log()
        else:
            assert isinstance(branch, ForwardBranch)
            lower, upper = (0.0, 2.0 * PI) if markov_map.is_periodic else branch.domain
            cover = _cover(lower, upper, boxes)
            logs = abs(as_interval(branch.forward_derivative(cover), cover.shape)).log()
        worst = max(worst, float(np.max(logs.mag)))
    return worst


def _upper(value: float, operations: int) -> float:
    """Round a nonnegative result of `operations` floating operations up to a guaranteed upper bound."""
    return float(np.nextafter(value * (1.0 + 2.0 * (operations + 1) * EPS), np.inf))


def _lyapunov_pieces(markov_map: MarkovMap, rho: SpectralFunction) -> list[tuple[Callable[[Any], Any], Any, Any]]:
    """Integrands and limits whose integrals add up to ``∫ρ̃ log|f'|``.

    Maps given by forward branches integrate ``ρ̃·log|f'|`` over each branch domain, or over the
    whole circle for a lift. Maps given by an inverse lift use the pullback
    ``-Σ_ι |v_ι'| log|v_ι'| ρ̃∘v_ι`` over one turn.
    """
    jet = spectral_jet(rho, derivative_bounds(rho, REMAINDER_ORDER))
    branches = markov_map.branches
    if all(isinstance(branch, ForwardBranch) for branch in branches):

        def forward(branch: ForwardBranch) -> Callable[[Any], Any]:
            def integrand(t: Any) -> Any:
                return jet(t) * dual.log(dual.absolute(branch.forward_derivative(t)))

            return integrand

        forward_branches = [branch for branch in branches if isinstance(branch, ForwardBranch)]
        if markov_map.is_periodic:
            return [(forward(forward_branches[0]), 0.0, 2.0 * PI)]
        return [(forward(branch), branch.domain[0], branch.domain[1]) for branch in forward_branches]
    if not all(isinstance(branch, InverseBranch) for branch in branches):
        raise IntervalError("Lyapunov quadrature", f"{markov_map.name} mixes forward and inverse branches")
    inverse_branches = [branch for branch in branches if isinstance(branch, InverseBranch)]

    def pullback(t: Any) -> Any:
        total: Any = 0.0
        for branch in inverse_branches:
            s = t + _turn(branch.index)
            slope = dual.absolute(branch.inverse_lift_derivative(s))
            total = total + jet(branch.inverse_lift(s)) * slope * -dual.log(slope)
        return total

    return [(pullback, 0.0, 2.0 * PI)]


def _validated_lyapunov(result: ValidatedResult, markov_map: MarkovMap) -> IntervalScalar:
    """Enclose ``∫ρ log|f'|``.

    The midpoint part is a verified quadrature of ``∫ρ̃ log|f'|``. The density ball adds
    ``‖ρ - ρ̃‖_∞·|Λ|·sup|log|f'||`` with ``‖·‖_∞ ≤ ‖·‖_BV``.
    """
    total: IntervalArray = IntervalArray.point(0.0)
    remainder = 0.0
    for integrand, lower, upper in _lyapunov_pieces(markov_map, result.midpoint):
        piece = enclose_integral(integrand, lower, upper)
        total = total + piece.value
        remainder += piece.remainder
    density = _upper(result.eps_total * markov_map.domain.length * _sup_log_slope(markov_map), 2)
    value = total + IntervalArray(-density, density)
    assert isinstance(value, IntervalScalar)
    LOGGER.debug(
        "<%s> | Lyapunov budget | quadrature remainder: %s | density ball: %s", "_validated_lyapunov", remainder, density
    )
    return value


def _validated_diffusion(result: ValidatedResult, markov_map: MarkovMap, observable: SpectralFunction) -> IntervalScalar:
    """Propagate the density ball through ``σ² = ∫A(2χ - ψ)`` with ``χ = 𝓢ψ`` and ``ψ = (id - ρ𝒮)(ρA)``.

    BV is a Banach algebra for the norms used here and ``|𝒮g| ≤ |Λ|·‖g‖``, so the ρ ball
    ``ε`` moves into ψ as ``aε + ε(|𝒮(ρ̃A)| + |Λ|aε) + ‖ρ̃‖|Λ|aε``. The resolvent solve adds
    ``b^𝓢e_ψ`` for the input error, the finite-section term and its own interval residual.
    Products and integrals of the midpoint functions are enclosed in coefficient space, so
    no rounding is left to estimate.
    """
    basis = result.basis
    order = result.order
    eps = result.eps_total
    length = markov_map.domain.length
    a_coeffs = IntervalArray.point(observable.coeffs)
    a_norm = _bv_upper(a_coeffs, basis)
    rho = IntervalArray.point(result.midpoint.coeffs)
    product = interval_product(rho, a_coeffs, basis)
    mean = interval_integral(product, basis)
    psi_full = product - IntervalArray.point(result.midpoint.resized(product.size).coeffs) * mean
    psi = psi_full[:order]
    tail = where(np.arange(psi_full.size) >= order, psi_full, IntervalArray.point(np.zeros(psi_full.size)))
    dropped = _bv_upper(tail, basis)
    e_psi = a_norm * eps + eps * (float(mean.mag) + length * a_norm * eps)
    e_psi = _upper(e_psi + _bv_upper(rho, basis) * length * a_norm * eps + dropped, 12)
    chi = linalg.solve(result.k_matrix.mid, psi.mid)
    residual = psi - result.k_matrix @ chi
    contraction = float(np.nextafter(1.0 - result.product, -np.inf))
    e_chi = _upper(
        result.b_sol * e_psi
        + result.product / contraction * _bv_upper(psi, basis)
        + result.b_sol / contraction * _bv_upper(residual, basis),
        8,
    )
    padded = np.zeros(psi_full.size)
    padded[:order] = chi
    combined = IntervalArray.point(2.0 * padded) - psi_full
    value = interval_integral(interval_product(a_coeffs, combined, basis), basis)
    radius = _upper(length * a_norm * (2.0 * e_chi + e_psi), 4)
    LOGGER.debug("<%s> | Diffusion budget | e_psi: %s | e_chi: %s | radius: %s", "_validated_diffusion", e_psi, e_chi, radius)
    enclosure = value + IntervalArray(-radius, radius)
    assert isinstance(enclosure, IntervalScalar)
    return enclosure


def validated_quantity(
    result: ValidatedResult,
    kind: QuantityKind,
    markov_map: MarkovMap,
    observable: SpectralFunction | None = None,
) -> IntervalScalar:
    """Enclose a statistic of the certified density.

    Parameters
    ----------
    result: :class:`ValidatedResult`
        Output of :func:`validate` or :func:`interval_solve` for `markov_map`.
    kind: :class:`QuantityKind`
        ``lyapunov`` or ``diffusion``.
    markov_map: :class:`MarkovMap`
        The map the result belongs to.
    observable: :class:`SpectralFunction`, optional
        The observable ``A`` on the canonical domain; needed for ``diffusion``.

    Returns
    -------
    :class:`IntervalScalar`
        An interval containing the statistic.

    Raises
    ------
    ConfigurationError
        ``diffusion`` without an observable, or an observable in the wrong basis.

    """
    if kind is QuantityKind.lyapunov:
        value = _validated_lyapunov(result, markov_map)
    else:
        if observable is None:
            raise ConfigurationError("observable", "the diffusion coefficient needs an observable")
        if observable.basis is not result.basis:
            raise ConfigurationError("observable", f"expected {result.basis.value} coefficients")
        value = _validated_diffusion(result, markov_map, observable)
    LOGGER.info(
        "<%s> | Enclosed %s | map: %s | interval: [%s, %s]", "validated_quantity", kind.value, markov_map.name, value.lower, value.upper
    )
    return value


def validate(
    markov_map: MarkovMap,
    order: int,
    *,
    b_sol: float | None = None,
    model: EntryBoundModel | None = None,
    **params: Unpack[ValidateParams],
) -> ValidatedResult:
    """Certify the invariant density of `markov_map` at spectral order `order`.

    Parameters
    ----------
    markov_map: :class:`MarkovMap`
        The map; ``lam`` and ``c1`` must be user supplied.
    order: :class:`int`
        The spectral order ``N``.
    b_sol: :class:`float`, optional
        A bound on ``‖𝓢‖_BV``; by default the a-priori bound from ``lam`` and ``c1``.
    model: :class:`EntryBoundModel`, optional
        The entry bound model; by default the catalog's model for the map.
    **params: :class:`ValidateParams`
        ``precision`` (only 53), ``threads`` and ``max_residual``.

    Returns
    -------
    :class:`ValidatedResult`
        The certified density.

    Raises
    ------
    ConfigurationError
        Unsupported precision, or constants that were only estimated on a grid.
    BoundModelError
        No entry bound model is known for the map.
    CertificationError
        The finite-section gate fails or the residual is too large.

    """
    precision = params.get("precision", DEFAULT_PRECISION)
    if precision != DEFAULT_PRECISION:
        raise ConfigurationError("precision", f"only the {DEFAULT_PRECISION}-bit interval backend is available, got {precision}")
    if not markov_map.constants.is_user_supplied("lam", "c1"):
        raise ConfigurationError("constants", "validated runs need user-supplied lambda and C1; grid estimates carry no guarantee")
    if model is None:
        model = default_entry_model(markov_map)
        if model is None:
            raise BoundModelError("no entry bound model is known for %s; pass one explicitly", markov_map.name)
    if b_sol is None:
        b_sol = a_priori_solution_norm(markov_map.constants.lam, markov_map.constants.c1)
    started = time.perf_counter()
    b_trunc = truncation_bound(model, order)
    finite_section_error(b_trunc * b_sol)
    bounded = time.perf_counter()
    matrix = interval_assemble(markov_map, order, model, threads=params.get("threads", 1))
    assembled = time.perf_counter()
    result = interval_solve(matrix, b_sol, b_trunc, basis=markov_map.basis, max_residual=params.get("max_residual"), model=model)
    result.timings = {"bounds": bounded - started, "assemble": assembled - bounded, "solve": time.perf_counter() - assembled}
    return result
