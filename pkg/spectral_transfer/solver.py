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
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Unpack

import numpy as np
from scipy import linalg

from ._enums import BasisKind, SolveMode
from .errors import (
    ConfigurationError,
    ConvergenceError,
    NonExpandingError,
    ReflectorBreakdownError,
    SingularOperatorError,
)
from .spectral import (
    NodeGrid,
    SpectralFunction,
    bv_norm_upper_function,
    clenshaw_curtis,
    integrate,
    multiply,
)
from .transfer import TransferColumnSet, apply_transfer

if TYPE_CHECKING:
    from collections.abc import Callable

    from numpy.typing import NDArray

    from ._types import ReportData, SolveParams
    from .maps import MarkovMap

__all__ = (
    "AdaptiveQRState",
    "SolutionProblem",
    "SolveReport",
    "a_priori_solution_norm",
    "acim",
    "adaptive_solve",
    "birkhoff_variance",
    "build_K_N",
    "green_kubo_variance",
    "integral_row",
    "lyapunov",
    "observable",
    "resolvent_apply",
    "solve",
    "solve_fixed",
)

LOGGER = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-14
COLUMN_CAP = 16384
MAX_INTERPOLATION_ORDER = 1 << 16
QUADRATURE_CHANGE = 1e-13
MAX_QUADRATURE_ORDER = 1 << 18
UNIT_INTEGRAL_TOLERANCE = 1e-12
ZERO_INTEGRAL_TOLERANCE = 1e-10


def integral_row(basis: BasisKind, size: int) -> NDArray[np.float64]:
    """``𝒮(b_k)`` for ``k < size``: ``2π`` for the Fourier constant, ``2/(1-k²)`` for even Chebyshev degrees."""
    if basis is BasisKind.fourier:
        row = np.zeros(size)
        row[0] = 2.0 * math.pi
        return row
    k = np.arange(size, dtype=np.float64)
    return np.where(np.arange(size) % 2 == 0, 2.0 / (1.0 - k * k), 0.0)


def _l1(fn: SpectralFunction) -> float:
    return float(np.sum(np.abs(fn.coeffs)))


@dataclass(frozen=True, slots=True, eq=False)
class SolutionProblem:
    """``𝓚x = rhs`` with ``𝓚 = id - 𝓛 + u𝒮``.

    Use :meth:`for_acim` (rhs = u, normalised afterwards) or :meth:`for_resolvent`
    (a zero-integral right hand side) rather than the constructor.

    Raises
    ------
    ConfigurationError
        ``𝒮u ≠ 1``, a resolvent right hand side with nonzero integral, or mixed bases.

    """

    map: MarkovMap
    u: SpectralFunction
    rhs: SpectralFunction
    normalize: bool = False
    columns: TransferColumnSet = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.u.basis is not self.map.basis or self.rhs.basis is not self.map.basis:
            raise ConfigurationError("basis", f"{self.map.name} needs {self.map.basis.value} coefficients")
        if abs(integrate(self.u) - 1.0) > UNIT_INTEGRAL_TOLERANCE:
            raise ConfigurationError("u", f"integral must be 1, got {integrate(self.u)!r}")
        if not self.normalize and abs(integrate(self.rhs)) > ZERO_INTEGRAL_TOLERANCE * max(1.0, _l1(self.rhs)):
            raise ConfigurationError("phi", f"resolvent input must have zero integral, got {integrate(self.rhs)!r}")
        if self.columns is None:
            object.__setattr__(self, "columns", TransferColumnSet(self.map))

    @property
    def basis(self) -> BasisKind:
        return self.map.basis

    @staticmethod
    def default_u(markov_map: MarkovMap) -> SpectralFunction:
        """The constant ``1/|Λ|``."""
        return SpectralFunction.constant(markov_map.basis, 1.0 / markov_map.domain.length)

    @classmethod
    def for_acim(cls, markov_map: MarkovMap, *, threads: int = 1, u: SpectralFunction | None = None) -> SolutionProblem:
        if u is None:
            u = cls.default_u(markov_map)
        return cls(markov_map, u, u, normalize=True, columns=TransferColumnSet(markov_map, threads=threads))

    @classmethod
    def for_resolvent(cls, markov_map: MarkovMap, phi: SpectralFunction, *, threads: int = 1) -> SolutionProblem:
        return cls(markov_map, cls.default_u(markov_map), phi, columns=TransferColumnSet(markov_map, threads=threads))


@dataclass(slots=True)
class SolveReport:
    """Outcome of one solve; residuals come from a fresh assembly at twice the solution order."""

    mode: SolveMode
    order: int
    solution: SpectralFunction
    residual_l1: float
    residual_bv: float
    converged: bool = True
    timings: dict[str, float] = field(default_factory=dict)
    column_orders: list[int] = field(default_factory=list)

    def to_dict(self, map_name: str, quantities: dict[str, float] | None = None, *, deterministic: bool = False) -> ReportData:
        data: ReportData = {
            "map": map_name,
            "mode": self.mode.value,
            "basis": self.solution.basis.value,
            "order": self.order,
            "quantities": dict(quantities or {}),
            "residuals": {"l1": self.residual_l1, "bv_upper": self.residual_bv},
        }
        if self.column_orders:
            data["column_orders"] = list(self.column_orders)
        if not deterministic:
            data["timings"] = dict(self.timings)
        return data


def _k_column(problem: SolutionProblem, k: int, transfer_column: NDArray[np.float64]) -> NDArray[np.float64]:
    """Column ``k`` of ``𝓚``: ``e_k - 𝓛b_k + 𝒮(b_k)·u``."""
    size = max(transfer_column.size, k + 1, len(problem.u))
    column = np.zeros(size)
    column[: transfer_column.size] -= transfer_column
    column[k] += 1.0
    column[: len(problem.u)] += integral_row(problem.basis, k + 1)[k] * problem.u.coeffs
    return column


def build_K_N(problem: SolutionProblem, order: int) -> NDArray[np.float64]:  # noqa: N802
    """``K^{(N)} = I - L^{(N)} + u^{(N)}𝒮^{(N)}``."""
    transfer = problem.columns.assemble(order)
    return np.eye(order) - transfer + np.outer(problem.u.resized(order).coeffs, integral_row(problem.basis, order))


def _residual(problem: SolutionProblem, solution: SpectralFunction) -> tuple[float, float]:
    order = max(2 * len(solution), 8)
    k_matrix = build_K_N(problem, order)
    residual = SpectralFunction(problem.basis, k_matrix @ solution.resized(order).coeffs - problem.rhs.resized(order).coeffs)
    return _l1(residual), bv_norm_upper_function(residual)


def _finish(problem: SolutionProblem, coefficients: NDArray[np.float64]) -> SpectralFunction:
    solution = SpectralFunction(problem.basis, coefficients)
    if problem.normalize:
        solution = solution.scaled(1.0 / integrate(solution))
    return solution


def solve_fixed(problem: SolutionProblem, order: int) -> SolveReport:
    """Dense LU solve of ``K^{(N)}x = rhs^{(N)}``.

    Raises
    ------
    ConfigurationError
        `order` below 4.
    SingularOperatorError
        A pivot of the LU factorisation is zero to working precision.

    """
    if order < 4:
        raise ConfigurationError("order", f"must be at least 4, got {order}")
    started = time.perf_counter()
    k_matrix = build_K_N(problem, order)
    assembled = time.perf_counter()
    lu, pivots = linalg.lu_factor(k_matrix, check_finite=True)
    diagonal = np.abs(np.diag(lu))
    if float(np.min(diagonal)) <= order * np.finfo(float).eps * float(np.max(diagonal)):
        raise SingularOperatorError(order, float(np.min(diagonal)))
    solution = _finish(problem, linalg.lu_solve((lu, pivots), problem.rhs.resized(order).coeffs))
    solved = time.perf_counter()
    residual_l1, residual_bv = _residual(problem, solution)
    LOGGER.info("<%s> | Fixed solve | map: %s | order: %s | residual: %s", "solve_fixed", problem.map.name, order, residual_l1)
    return SolveReport(
        SolveMode.fixed,
        order,
        solution,
        residual_l1,
        residual_bv,
        timings={"assemble": assembled - started, "solve": solved - assembled, "residual": time.perf_counter() - solved},
    )


class AdaptiveQRState:
    """Householder QR of the infinite matrix ``𝓚``, one column at a time.

    Every vector is an extendable array: its stored prefix holds all nonzero entries and
    anything past the end is zero. Reflector ``i`` acts on rows ``i..i+len(w_i)-1`` as
    ``I - 2w_iw_iᵀ``.
    """

    __slots__ = ("r_columns", "reflectors", "rhs")

    def __init__(self, rhs: NDArray[np.float64]) -> None:
        self.reflectors: list[NDArray[np.float64]] = []
        self.r_columns: list[NDArray[np.float64]] = []
        self.rhs = np.array(rhs, dtype=np.float64)

    def __repr__(self) -> str:
        return f"<AdaptiveQRState columns={len(self.r_columns)} rhs_length={self.rhs.size}>"

    def __len__(self) -> int:
        return len(self.r_columns)

    @staticmethod
    def _extended(vector: NDArray[np.float64], size: int) -> NDArray[np.float64]:
        if vector.size >= size:
            return vector
        out = np.zeros(size)
        out[: vector.size] = vector
        return out

    def _reflect(self, index: int, vector: NDArray[np.float64]) -> NDArray[np.float64]:
        w = self.reflectors[index]
        vector = self._extended(vector, index + w.size)
        segment = vector[index : index + w.size]
        segment -= 2.0 * w * float(w @ segment)
        return vector

    def add_column(self, column: NDArray[np.float64]) -> None:
        """Row-reduce a new column against every stored reflector, then append its own reflector.

        Raises
        ------
        ReflectorBreakdownError
            The column lies in the span of the previous ones.

        """
        k = len(self.r_columns)
        vector = self._extended(np.array(column, dtype=np.float64), k + 1)
        for index in range(k):
            vector = self._reflect(index, vector)
        below = vector[k:]
        norm = float(np.linalg.norm(below))
        if norm <= np.finfo(float).tiny or norm <= np.finfo(float).eps * 1e-3 * float(np.linalg.norm(column)):
            raise ReflectorBreakdownError(k)
        sign = 1.0 if below[0] >= 0 else -1.0
        w = below.copy()
        w[0] += sign * norm
        w /= np.linalg.norm(w)
        last = np.nonzero(w)[0]
        self.reflectors.append(w[: last[-1] + 1] if last.size else w[:1])
        r_column = np.empty(k + 1)
        r_column[:k] = vector[:k]
        r_column[k] = -sign * norm
        self.r_columns.append(r_column)
        self.rhs = self._reflect(k, self.rhs)

    def tail(self) -> float:
        """Largest transformed right hand side entry below the processed block."""
        rest = self.rhs[len(self.r_columns) :]
        return float(np.max(np.abs(rest), initial=0.0))

    def solve(self) -> NDArray[np.float64]:
        """Back-substitute on the triangular factor of the processed columns."""
        n = len(self.r_columns)
        upper = np.zeros((n, n))
        for k, column in enumerate(self.r_columns):
            upper[: k + 1, k] = column
        return linalg.solve_triangular(upper, self._extended(self.rhs, n)[:n], lower=False)

    def reconstruct(self, k: int) -> NDArray[np.float64]:
        """Column `k` of the factored matrix, ``Q·R[:, k]``, as an extendable vector."""
        vector = np.array(self.r_columns[k])
        for index in reversed(range(len(self.reflectors))):
            vector = self._reflect(index, vector)
        return vector


def _adaptive_column(problem: SolutionProblem, k: int, tolerance: float, max_order: int) -> tuple[NDArray[np.float64], int]:
    """Interpolate ``𝓛b_k`` at doubling orders until resolved at two successive orders."""
    order = max(4, 1 << math.ceil(math.log2(k + 2)))
    confirmed = False
    while order <= max_order:
        column = SpectralFunction(problem.basis, problem.columns.column(k, order))
        if column.is_resolved(tolerance):
            if confirmed:
                coeffs = column.coeffs
                scale = float(np.max(np.abs(coeffs), initial=0.0))
                significant = np.nonzero(np.abs(coeffs) > 1e-2 * tolerance * scale)[0]
                keep = int(significant[-1]) + 1 if significant.size else 1
                LOGGER.debug("<%s> | Column resolved | k: %s | order: %s | kept: %s", "_adaptive_column", k, order, keep)
                return coeffs[:keep], order
            confirmed = True
        else:
            confirmed = False
        order *= 2
    raise ConvergenceError(f"Interpolation of column {k}", max_order, tolerance)


def adaptive_solve(problem: SolutionProblem, tolerance: float = DEFAULT_TOLERANCE, **params: Unpack[SolveParams]) -> SolveReport:
    """Solve ``𝓚x = rhs`` without fixing the order in advance.

    Columns of ``𝓚`` are interpolated adaptively and row-reduced by Householder reflectors
    as they arrive; the loop stops once the transformed right hand side below the processed
    block is under ``ε·max(1, |Λ|)·|Λ|·‖rhs‖∞``.

    Parameters
    ----------
    problem: :class:`SolutionProblem`
        The problem.
    tolerance: :class:`float`, optional
        ``ε``, at least 1e-15, by default 1e-14.
    **params: :class:`SolveParams`
        ``column_cap`` (default 16384) and ``max_interpolation_order`` (default 65536).

    Returns
    -------
    :class:`SolveReport`
        The solution at order ``N_opt``.

    Raises
    ------
    ConvergenceError
        The column cap was reached, or a column did not resolve.
    ReflectorBreakdownError
        A column of ``𝓚`` is linearly dependent on the previous ones.

    """
    if tolerance < 1e-15:
        raise ConfigurationError("tolerance", f"must be at least 1e-15, got {tolerance!r}")
    cap = params.get("column_cap", COLUMN_CAP)
    max_order = params.get("max_interpolation_order", MAX_INTERPOLATION_ORDER)
    length = problem.map.domain.length
    threshold = tolerance * max(1.0, length) * length * float(np.max(np.abs(problem.rhs.coeffs), initial=0.0))
    started = time.perf_counter()
    state = AdaptiveQRState(problem.rhs.coeffs)
    column_orders: list[int] = []
    for k in range(cap):
        transfer_column, order = _adaptive_column(problem, k, tolerance, max_order)
        column_orders.append(order)
        state.add_column(_k_column(problem, k, transfer_column))
        if state.tail() <= threshold:
            break
    else:
        raise ConvergenceError("Adaptive QR", cap, tolerance)
    solution = _finish(problem, state.solve())
    solved = time.perf_counter()
    residual_l1, residual_bv = _residual(problem, solution)
    LOGGER.info(
        "<%s> | Adaptive solve converged | map: %s | columns: %s | tail: %s | residual: %s",
        "adaptive_solve",
        problem.map.name,
        len(state),
        state.tail(),
        residual_l1,
    )
    return SolveReport(
        SolveMode.adaptive,
        len(state),
        solution,
        residual_l1,
        residual_bv,
        timings={"solve": solved - started, "residual": time.perf_counter() - solved},
        column_orders=column_orders,
    )


def solve(
    problem: SolutionProblem,
    mode: SolveMode = SolveMode.adaptive,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    order: int | None = None,
) -> SolveReport:
    """Dispatch to :func:`adaptive_solve` or, when `order` is given in fixed mode, :func:`solve_fixed`."""
    if mode is SolveMode.fixed:
        if order is None:
            raise ConfigurationError("order", "fixed mode needs an order")
        return solve_fixed(problem, order)
    return adaptive_solve(problem, tolerance)


def acim(
    markov_map: MarkovMap,
    mode: SolveMode = SolveMode.adaptive,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    order: int | None = None,
    threads: int = 1,
) -> SpectralFunction:
    """The invariant density ``ρ = 𝓢u``, normalised to unit integral on the canonical domain."""
    markov_map.constants.require_expanding(markov_map.domain.kind)
    return solve(SolutionProblem.for_acim(markov_map, threads=threads), mode, tolerance=tolerance, order=order).solution


def resolvent_apply(
    markov_map: MarkovMap,
    phi: SpectralFunction,
    mode: SolveMode = SolveMode.adaptive,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    order: int | None = None,
    threads: int = 1,
) -> SpectralFunction:
    """``𝓢φ = Σ_n 𝓛ⁿφ`` for a zero-integral `phi`.

    Raises
    ------
    ConfigurationError
        `phi` does not integrate to zero.

    """
    problem = SolutionProblem.for_resolvent(markov_map, phi, threads=threads)
    if not np.any(phi.coeffs):
        return SpectralFunction(phi.basis, np.zeros(max(len(phi), 1)))
    if mode is SolveMode.fixed and order is not None:
        order = max(order, len(phi))
    return solve(problem, mode, tolerance=tolerance, order=order).solution


def _quadrature(markov_map: MarkovMap, integrand: Callable[[NDArray[np.float64]], NDArray[np.float64]], start: int) -> float:
    """Clenshaw–Curtis (interval) or trapezoid (circle) quadrature, doubled until it settles."""
    order = max(start, 8)
    previous: float | None = None
    while order <= MAX_QUADRATURE_ORDER:
        if markov_map.is_periodic:
            nodes = NodeGrid(BasisKind.fourier, order).nodes
            value = 2.0 * math.pi * float(np.mean(integrand(nodes)))
        else:
            nodes, weights = clenshaw_curtis(order)
            value = float(weights @ integrand(nodes))
        if previous is not None and abs(value - previous) < QUADRATURE_CHANGE * max(1.0, abs(value)):
            LOGGER.debug("<%s> | Quadrature settled | order: %s | value: %s", "_quadrature", order, value)
            return value
        previous = value
        order *= 2
    raise ConvergenceError("Quadrature", MAX_QUADRATURE_ORDER, QUADRATURE_CHANGE)


def lyapunov(markov_map: MarkovMap, rho: SpectralFunction, order: int | None = None) -> float:
    """``∫ log|f'| ρ`` over the domain.

    Each branch is pulled back through its inverse, ``∫_{O_ι} log|f'| ρ = -∫_Λ |v_ι'| log|v_ι'| ρ∘v_ι``,
    so the quadrature sees a function that is smooth across branch boundaries and maps given
    by an inverse lift need no forward derivative.

    Raises
    ------
    NonExpandingError
        ``f'`` vanishes at a quadrature node.

    """

    def integrand(y: NDArray[np.float64]) -> NDArray[np.float64]:
        values, weights = markov_map.preimages(y)
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise NonExpandingError("f' at a quadrature node", 0.0)
        density = rho(values.reshape(-1)).reshape(values.shape)
        return -np.sum(weights * np.log(weights) * density, axis=0)

    value = _quadrature(markov_map, integrand, order or 4 * len(rho))
    LOGGER.info("<%s> | Lyapunov exponent | map: %s | value: %s", "lyapunov", markov_map.name, value)
    return value


def observable(
    markov_map: MarkovMap,
    func: Callable[[Any], Any],
    tolerance: float = DEFAULT_TOLERANCE,
    *,
    max_order: int = MAX_INTERPOLATION_ORDER,
) -> SpectralFunction:
    """Interpolate an observable given in user coordinates until its coefficients resolve."""
    domain = markov_map.domain
    order = 16
    while order <= max_order:
        fn = SpectralFunction.from_function(markov_map.basis, lambda t: func(domain.to_user(t)), order)
        if fn.is_resolved(tolerance):
            return fn
        order *= 2
    raise ConvergenceError("Observable interpolation", max_order, tolerance)


def _centered(rho: SpectralFunction, a: SpectralFunction) -> SpectralFunction:
    phi = multiply(rho, a)
    return phi - rho.scaled(integrate(phi))


def birkhoff_variance(
    markov_map: MarkovMap,
    a: SpectralFunction,
    rho: SpectralFunction,
    mode: SolveMode = SolveMode.adaptive,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    order: int | None = None,
) -> float:
    """``σ² = ∫ A (2𝓢 - id)(id - ρ𝒮)(ρA)``, the diffusion coefficient of `a` under the map."""
    psi = _centered(rho, a)
    chi = resolvent_apply(markov_map, psi, mode, tolerance=tolerance, order=order)
    value = integrate(multiply(a, chi.scaled(2.0) - psi))
    LOGGER.info("<%s> | Variance | map: %s | value: %s", "birkhoff_variance", markov_map.name, value)
    return value


def green_kubo_variance(
    markov_map: MarkovMap,
    a: SpectralFunction,
    rho: SpectralFunction,
    terms: int = 30,
    order: int | None = None,
) -> float:
    """``𝒮(Aψ) + 2Σ_{n=1}^{terms} 𝒮(A𝓛ⁿψ)``, the truncated correlation sum."""
    psi = _centered(rho, a)
    size = order or max(2 * len(psi), 64)
    columns = TransferColumnSet(markov_map)
    current = psi.resized(size)
    total = integrate(multiply(a, current))
    for _ in range(terms):
        current = apply_transfer(columns, current, size)
        total += 2.0 * integrate(multiply(a, current))
    return total


def a_priori_solution_norm(lam: float, c1: float) -> float:
    """A computable upper bound on ``‖𝓢‖_BV`` for maps on [0, 1].

    With ``R = 2C₁/(1-λ⁻¹)``, ``D = 4e^R(1+R)`` and ``ξ = ½e^{-R}(1-λ⁻¹)`` the iterates
    contract after ``n = ⌈(4 + 2log(max(C₁,1)√D))/ξ⌉`` steps and ``m = ⌈2/log λ⌉`` steps
    pass before the distortion settles; then ``‖𝓢‖ ≤ 1 + (5/3)(m+n)C'(3+C')`` with
    ``C' = 1 + C₁/(3(1-λ⁻¹))``.

    Raises
    ------
    NonExpandingError
        ``λ ≤ 1``.

    """
    if not lam > 1.0:
        raise NonExpandingError("lambda", lam)
    if c1 < 0:
        raise ConfigurationError("C1", f"must be nonnegative, got {c1!r}")
    contraction = 1.0 - 1.0 / lam
    r = 2.0 * c1 / contraction
    d = 4.0 * math.exp(r) * (1.0 + r)
    xi = 0.5 * math.exp(-r) * contraction
    n = math.ceil((4.0 + 2.0 * math.log(max(c1, 1.0) * math.sqrt(d))) / xi)
    m = math.ceil(2.0 / math.log(lam))
    c_prime = 1.0 + c1 / (3.0 * contraction)
    bound = 1.0 + (5.0 / 3.0) * (m + n) * c_prime * (3.0 + c_prime)
    LOGGER.debug("<%s> | A priori bound | lambda: %s | C1: %s | n: %s | m: %s | bound: %s", "a_priori_solution_norm", lam, c1, n, m, bound)
    return bound
