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

import functools
import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, ClassVar

import numpy as np
import sympy
from scipy.special import logsumexp

from ._enums import BasisKind, BoundCase
from .errors import BoundModelError, ConfigurationError
from .maps import Branch, MarkovMap
from .maps.dual import arccos, cos, derivative, derivatives
from .spectral import NodeGrid, SpectralFunction, analyze, analyze_columns, basis_values, evaluate

if TYPE_CHECKING:
    from collections.abc import Callable, Mapping, Sequence

    from numpy.typing import ArrayLike, NDArray

__all__ = (
    "AnalyticBound",
    "DifferentiableBound",
    "EntryBoundModel",
    "TransferColumnSet",
    "aliasing_bound",
    "apply_transfer",
    "assemble_column",
    "chebyshev_conjugation_constants",
    "default_entry_model",
    "derivative_range",
    "domination_violations",
    "entry_bound_analytic",
    "entry_bound_differentiable",
    "lanford_entry_model",
    "truncation_bound",
    "uniform_entry_bound",
    "w_coefficients",
    "w_recurrence",
)

LOGGER = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
ALIAS_TERMS = 32
TRUNCATION_ROWS = 64
STRIP_SAMPLES = 4096
INFLATION = 1.05
DOMINATION_SLACK = 1e-8
EPS = float(np.finfo(np.float64).eps)
MAX_DIFFERENTIABLE_ORDER = 8


class TransferColumnSet:
    """Columns of the transfer matrix of one map, assembled by interpolation at the nodes.

    Branch preimages of the nodes are cached per order, so assembling many columns (or the
    same order again) costs one root-finding pass. Column blocks are spread over a thread pool;
    each block is a pure function of the cached preimages, so results do not depend on scheduling.
    """

    __slots__ = ("_columns", "_lock", "_preimages", "basis", "map", "threads")

    def __init__(self, markov_map: MarkovMap, *, threads: int = 1) -> None:
        self.map = markov_map
        self.basis = markov_map.basis
        self.threads = max(1, threads)
        self._preimages: dict[int, tuple[NDArray[np.float64], NDArray[np.float64]]] = {}
        self._columns: dict[int, NDArray[np.float64]] = {}
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"<TransferColumnSet map={self.map.name!r} basis={self.basis.value} columns={len(self._columns)}>"

    @property
    def columns(self) -> Mapping[int, NDArray[np.float64]]:
        """Stored columns by index; each column's length is its assembly order."""
        return dict(self._columns)

    def preimages(self, order: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Branch preimages of the order-`order` nodes and their weights ``|v_ι'|``."""
        with self._lock:
            cached = self._preimages.get(order)
        if cached is None:
            cached = self.map.preimages(NodeGrid(self.basis, order).nodes)
            with self._lock:
                cached = self._preimages.setdefault(order, cached)
        return cached

    def node_values(self, order: int, indices: Sequence[int] | NDArray[np.int64]) -> NDArray[np.float64]:
        """``(𝓛 b_k)(x_l) = Σ_ι |v_ι'(x_l)| b_k(v_ι(x_l))`` for every node and requested slot."""
        values, weights = self.preimages(order)
        slots = np.asarray(indices)
        out = np.zeros((order, slots.size))
        for branch_values, branch_weights in zip(values, weights, strict=True):
            out += branch_weights[:, None] * basis_values(self.basis, branch_values, slots)
        return out

    def assemble(self, order: int, indices: Sequence[int] | NDArray[np.int64] | None = None) -> NDArray[np.float64]:
        """The first `order` coefficients of ``𝓛 b_k`` for each requested `k`, as matrix columns."""
        if order < 4:
            raise ConfigurationError("order", f"assembly needs at least 4 nodes, got {order}")
        slots = np.arange(order) if indices is None else np.asarray(indices)
        grid = NodeGrid(self.basis, order)
        self.preimages(order)
        if self.threads == 1 or slots.size < 2 * self.threads:
            block = analyze_columns(grid, self.node_values(order, slots))
        else:
            chunks = np.array_split(slots, self.threads)
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                parts = list(executor.map(lambda chunk: analyze_columns(grid, self.node_values(order, chunk)), chunks))
            block = np.concatenate(parts, axis=1)
        LOGGER.debug("<%s.%s> | Assembled block | order: %s | columns: %s", __class__.__name__, "assemble", order, slots.size)
        return block

    def column(self, k: int, order: int) -> NDArray[np.float64]:
        """Assemble and store column `k` at order `order`."""
        coefficients = self.assemble(order, [k])[:, 0]
        with self._lock:
            self._columns[k] = coefficients
        return coefficients


def assemble_column(markov_map: MarkovMap, k: int, order: int, basis: BasisKind | None = None) -> NDArray[np.float64]:
    """The first `order` coefficients of ``𝓛 b_k``.

    Raises
    ------
    ConfigurationError
        `basis` does not match the map's domain, or `order` is below 4.

    """
    if basis is not None and basis is not markov_map.basis:
        raise ConfigurationError("basis", f"{markov_map.name} needs the {markov_map.basis.value} basis")
    return TransferColumnSet(markov_map).column(k, order)


def apply_transfer(columns: TransferColumnSet, fn: SpectralFunction, order: int | None = None) -> SpectralFunction:
    """Interpolate ``𝓛 fn`` at `order` nodes (by default the length of `fn`)."""
    n = order or max(len(fn), 4)
    values, weights = columns.preimages(n)
    total = np.zeros(n)
    for branch_values, branch_weights in zip(values, weights, strict=True):
        total += branch_weights * evaluate(fn, branch_values)
    return analyze(NodeGrid(columns.basis, n), total)


def uniform_entry_bound(kind: BasisKind, c1: float, j: ArrayLike) -> Any:
    """Bound on every entry of row `j` that needs no regularity beyond the distortion constant.

    1 for the complex Fourier basis, ``(2 - δ_{j0})(2 + 4C₁)`` for Chebyshev.
    """
    rows = np.asarray(j)
    if kind is BasisKind.fourier:
        result = np.ones(rows.shape)
    else:
        result = np.where(rows == 0, 1.0, 2.0) * (2.0 + 4.0 * c1)
    return float(result) if rows.ndim == 0 else result


def _distance(j: NDArray[np.float64], k: NDArray[np.float64], interval: tuple[float, float]) -> NDArray[np.float64]:
    first = k * interval[0]
    second = k * interval[1]
    lo = np.minimum(first, second)
    hi = np.maximum(first, second)
    return np.maximum(0.0, np.maximum(lo - j, j - hi))


def _signs(modes: NDArray[np.int64]) -> list[tuple[NDArray[np.float64], NDArray[np.bool_]]]:
    """The ± copies of each real-layout frequency; the minus copy is masked out for frequency 0."""
    return [(modes.astype(np.float64), np.ones(modes.shape, dtype=bool)), (-modes.astype(np.float64), modes > 0)]


@dataclass(frozen=True, slots=True)
class EntryBoundModel:
    """Common part of the entry bound models.

    Indices come in two flavours: *native* indices are complex exponential frequencies
    (Fourier, any integer) or Chebyshev degrees; *slot* indices are positions in the real
    layout used for coefficient vectors. :meth:`bound` takes slots.

    Parameters
    ----------
    basis: :class:`BasisKind`
        Which basis the model describes.
    prefactor: :class:`float`
        ``‖h‖₁/2π`` in the Fourier case (1 for transfer operators), ``1 + 2C₁`` for Chebyshev.
    slopes: :class:`tuple[float, float]`
        The interval ``p̃``; Chebyshev models use ``(-p, p)``.
    c1: :class:`float`
        Canonical distortion constant used by the uniform bound.

    """

    basis: BasisKind
    prefactor: float
    slopes: tuple[float, float]
    c1: float

    case: ClassVar[BoundCase]

    def _row_factor(self, j: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.basis is BasisKind.chebyshev:
            return np.where(j == 0, 1.0, 2.0)
        return np.ones(j.shape)

    def _log_model(self, j: NDArray[np.float64], k: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
        raise NotImplementedError

    def _log_series_remainder(self, j_last: NDArray[np.float64], step: float, k: NDArray[np.float64]) -> NDArray[np.float64]:
        raise NotImplementedError

    def _log_row_tail(self, j_last: NDArray[np.float64], k: NDArray[np.float64], power: int) -> NDArray[np.float64]:
        raise NotImplementedError

    def log_native(self, j: ArrayLike, k: ArrayLike) -> NDArray[np.float64]:
        """Log of the entry bound at native indices, capped by the uniform bound."""
        rows, cols = np.broadcast_arrays(np.asarray(j, dtype=np.float64), np.asarray(k, dtype=np.float64))
        with np.errstate(divide="ignore"):
            uniform = np.log(uniform_entry_bound(self.basis, self.c1, rows) * np.ones(rows.shape))
            logs, valid = self._log_model(rows, cols)
        return np.where(valid, np.minimum(logs, uniform), uniform)

    def native(self, j: ArrayLike, k: ArrayLike) -> NDArray[np.float64]:
        return np.exp(self.log_native(j, k))

    def bound(self, j: ArrayLike, k: ArrayLike) -> Any:
        """Bound on ``|L_jk|`` at slot indices.

        A real-layout Fourier entry is a combination of the four complex entries at
        ``(±m_j, ±m_k)``; its bound sums theirs, halved per column when ``m_k > 0``.
        """
        rows = np.asarray(j)
        cols = np.asarray(k)
        if self.basis is BasisKind.chebyshev:
            result = self.native(rows, cols)
        else:
            result = self._real_layout(rows, cols, self.native)
        return float(result) if np.ndim(result) == 0 else result

    def _real_layout(
        self,
        j: NDArray[np.int64],
        k: NDArray[np.int64],
        complex_value: Callable[[NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]],
    ) -> NDArray[np.float64]:
        rows, cols = np.broadcast_arrays((j + 1) // 2, (k + 1) // 2)
        total = np.zeros(rows.shape)
        for row_mode, row_mask in _signs(rows):
            for col_mode, col_mask in _signs(cols):
                total += np.where(row_mask & col_mask, complex_value(row_mode, col_mode), 0.0)
        return np.where(cols > 0, 0.5, 1.0) * total

    def _series(self, start: NDArray[np.float64], step: float, k: NDArray[np.float64]) -> NDArray[np.float64]:
        """``Σ_{t≥0} bound(start + t·step, k)`` with an explicit head and a closed-form remainder."""
        total = np.zeros(np.broadcast(start, k).shape)
        index = start.astype(np.float64)
        for _ in range(ALIAS_TERMS):
            total = total + self.native(index, k)
            index = index + step
        return total + np.exp(self._log_series_remainder(index - step, step, k))


@dataclass(frozen=True, slots=True)
class AnalyticBound(EntryBoundModel):
    """``|L_jk| ≤ t_j·A·exp(ζ(H - d(j, k·p̃)))`` from a contour shift into an analytic strip."""

    zeta: float = 1.0
    h: float = 0.0

    case: ClassVar[BoundCase] = BoundCase.analytic

    def __post_init__(self) -> None:
        if not self.zeta > 0:
            raise BoundModelError("analytic bound needs zeta > 0, got %s", self.zeta)

    def _log_model(self, j: NDArray[np.float64], k: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
        d = _distance(j, k, self.slopes)
        logs = math.log(self.prefactor) + np.log(self._row_factor(j)) + self.zeta * (self.h - d)
        if self.basis is BasisKind.chebyshev:
            return logs, (d > 0) | (k == 0)
        return logs, np.ones(j.shape, dtype=bool)

    def _log_series_remainder(self, j_last: NDArray[np.float64], step: float, k: NDArray[np.float64]) -> NDArray[np.float64]:
        decay = self.zeta * abs(step)
        logs, _ = self._log_model(np.asarray(j_last, dtype=np.float64), np.asarray(k, dtype=np.float64))
        return logs - decay - math.log1p(-math.exp(-decay))

    def _log_row_tail(self, j_last: NDArray[np.float64], k: NDArray[np.float64], power: int) -> NDArray[np.float64]:
        ratio = math.exp(-2.0 * self.zeta) * ((j_last + 1.0) / j_last) ** power
        logs, _ = self._log_model(j_last, k)
        with np.errstate(divide="ignore", invalid="ignore"):
            closure = np.where(ratio < 1.0, np.log(ratio / (1.0 - ratio)), np.inf)
        return 2.0 * logs + power * np.log(j_last) + closure


@dataclass(frozen=True, slots=True)
class DifferentiableBound(EntryBoundModel):
    """``|L_jk| ≤ t_j·A·Σ_n W_{r,n}|k|ⁿ / d(j, k·μ̃)^{n+r}`` from `r` integrations by parts."""

    r: int = 1
    weights: tuple[float, ...] = (0.0, 0.0)
    mu: tuple[float, float] = (0.0, 0.0)

    case: ClassVar[BoundCase] = BoundCase.differentiable

    def __post_init__(self) -> None:
        if len(self.weights) != self.r + 1:
            raise BoundModelError("differentiable bound of order %s needs %s weights, got %s", self.r, self.r + 1, len(self.weights))

    def _terms(self, k: NDArray[np.float64], d: NDArray[np.float64], shift: int) -> NDArray[np.float64]:
        total = np.zeros(np.broadcast(k, d).shape)
        safe = np.where(d > 0, d, 1.0)
        for n, weight in enumerate(self.weights):
            if weight == 0.0:
                continue
            exponent = n + self.r - shift
            if exponent <= 0:
                return np.full(total.shape, np.inf)
            total = total + weight * np.abs(k) ** n / (safe**exponent * exponent)
        return total

    def _log_model(self, j: NDArray[np.float64], k: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
        d = _distance(j, k, self.mu)
        safe = np.where(d > 0, d, 1.0)
        total = np.zeros(d.shape)
        for n, weight in enumerate(self.weights):
            total = total + weight * np.abs(k) ** n / safe ** (n + self.r)
        with np.errstate(divide="ignore"):
            logs = math.log(self.prefactor) + np.log(self._row_factor(j)) + np.log(total)
        return logs, d > 0

    def _log_series_remainder(self, j_last: NDArray[np.float64], step: float, k: NDArray[np.float64]) -> NDArray[np.float64]:
        j_last = np.asarray(j_last, dtype=np.float64)
        d = _distance(j_last, np.asarray(k, dtype=np.float64), self.mu)
        # Σ_{t≥1} (d + t|s|)^{-m} ≤ ∫_0^∞ (d + u|s|)^{-m} du = d^{1-m} / (|s|(m-1))
        total = self._terms(np.asarray(k, dtype=np.float64), d, 1) / abs(step)
        if np.any(np.isinf(total)):
            LOGGER.warning("<%s.%s> | Aliasing tail diverges for r=%s", __class__.__name__, "_log_series_remainder", self.r)
        with np.errstate(divide="ignore"):
            return math.log(self.prefactor) + np.log(self._row_factor(j_last + step)) + np.log(total)

    def _log_row_tail(self, j_last: NDArray[np.float64], k: NDArray[np.float64], power: int) -> NDArray[np.float64]:
        d = _distance(j_last, k, self.mu)
        offset = np.abs(j_last - d)
        total = np.zeros(np.broadcast(j_last, k).shape)
        # (Σ_n a_n)² ≤ (r+1) Σ_n a_n², then Σ_{j>j_L} j^p D^{-2m} ≤ ∫_{D_L}^∞ (D + κ)^p D^{-2m} dD
        for n, weight in enumerate(self.weights):
            if weight == 0.0:
                continue
            m = n + self.r
            pieces = [(1.0, 2 * m - 1)] if power == 0 else [(1.0, 2 * m - 3), (2.0 * offset, 2 * m - 2), (offset**2, 2 * m - 1)]
            for coefficient, exponent in pieces:
                if exponent <= 0:
                    LOGGER.warning("<%s.%s> | Truncation tail diverges for r=%s", __class__.__name__, "_log_row_tail", self.r)
                    return np.full(total.shape, np.inf)
                total = total + weight**2 * np.abs(k) ** (2 * n) * coefficient * d ** (-exponent) / exponent
        with np.errstate(divide="ignore"):
            return math.log((self.r + 1) * self.prefactor**2) + 2.0 * np.log(self._row_factor(j_last + 1.0)) + np.log(total)


def aliasing_bound(model: EntryBoundModel, j: ArrayLike, k: ArrayLike, order: int) -> Any:
    """Bound on the interpolation (aliasing) error of entry ``(j, k)`` at `order` nodes.

    Slot indices are 0-based. Chebyshev degree ``j`` collects ``T_{2mN±j}``; a complex Fourier
    frequency collects every ``j + sN``, ``s ≠ 0``. Each infinite family is summed explicitly for
    a fixed number of terms and closed by a geometric or integral remainder.
    """
    rows = np.asarray(j, dtype=np.float64)
    cols = np.asarray(k, dtype=np.float64)
    n = float(order)
    if model.basis is BasisKind.chebyshev:
        lower = model._series(2.0 * n - rows, 2.0 * n, cols)
        upper = np.where(rows > 0, model._series(2.0 * n + rows, 2.0 * n, cols), 0.0)
        result = lower + upper
    else:

        def aliases(row_mode: NDArray[np.float64], col_mode: NDArray[np.float64]) -> NDArray[np.float64]:
            return model._series(row_mode + n, n, col_mode) + model._series(row_mode - n, -n, col_mode)

        result = model._real_layout(rows.astype(np.int64), cols.astype(np.int64), aliases)
    return float(result) if np.ndim(result) == 0 else result


def truncation_bound(model: EntryBoundModel, order: int) -> float:
    """Upper bound on ``‖𝓔_N‖_BV`` for ``𝓔_N = (id - 𝒫_N)𝓛𝒫_N``.

    Squared entry bounds are summed in log space over the rows just outside ``E_N`` and every
    column inside it; each row sum is closed with the model's remainder. The two Frobenius sums
    combine as ``2π(‖DE‖ + ‖E‖)``, conjugated by ``Č`` in the Chebyshev case.
    """
    if model.basis is BasisKind.chebyshev:
        cols = np.arange(order, dtype=np.float64)[None, :]
        rows = np.arange(order, order + TRUNCATION_ROWS, dtype=np.float64)[:, None]
        log_weight = np.log(np.where(cols == 0, 1.0, 2.0)) - math.log(2.0)
        symmetry = 0.0
    else:
        half = order // 2
        cols = np.arange(-half, half + 1, dtype=np.float64)[None, :]
        first_row = (order + 1) // 2
        rows = np.arange(first_row, first_row + TRUNCATION_ROWS, dtype=np.float64)[:, None]
        log_weight = np.zeros(cols.shape)
        symmetry = math.log(2.0)
    block = 2.0 * model.log_native(rows, cols) + log_weight
    last = np.full(cols.shape, rows[-1, 0])
    sums = []
    for power in (2, 0):
        head = block + power * np.log(rows)
        tail = model._log_row_tail(last, cols, power) + log_weight
        sums.append(symmetry + float(logsumexp(np.concatenate((head.ravel(), tail.ravel())))))
    result = TWO_PI * (math.exp(0.5 * sums[0]) + math.exp(0.5 * sums[1]))
    LOGGER.debug("<%s> | Truncation bound | case: %s | order: %s | bound: %s", "truncation_bound", model.case.value, order, result)
    return result


@functools.cache
def w_recurrence(r: int) -> tuple[tuple[sympy.Expr, ...], tuple[sympy.Symbol, ...], tuple[sympy.Symbol, ...]]:
    """The polynomials ``w_{r,0..r}`` of the integration-by-parts expansion, exactly.

    ``V_m`` stands for ``v^{(m)}`` and ``h_l`` for ``h^{(l)}``; formal differentiation maps
    ``V_m → V_{m+1}`` and ``h_l → h_{l+1}``. The recurrence is

    ``w_{n,0} = w'_{n-1,0}``, ``w_{n,l} = w'_{n-1,l} + (n+l-1)·V_2·w_{n-1,l-1}`` and
    ``w_{n,n} = 2n·V_2·w_{n-1,n-1}``, from ``w_{0,0} = h_0``.

    Raises
    ------
    BoundModelError
        `r` outside ``1..8``.

    """
    if not 1 <= r <= MAX_DIFFERENTIABLE_ORDER:
        raise BoundModelError("differentiable bounds support 1 <= r <= %s, got %s", MAX_DIFFERENTIABLE_ORDER, r)
    v = sympy.symbols(f"V2:{r + 4}", positive=True)
    h = sympy.symbols(f"h0:{r + 2}", positive=True)

    def differentiate(expr: sympy.Expr) -> sympy.Expr:
        total = sum(sympy.diff(expr, v[i]) * v[i + 1] for i in range(len(v) - 1))
        total += sum(sympy.diff(expr, h[i]) * h[i + 1] for i in range(len(h) - 1))
        return sympy.expand(total)

    w: dict[tuple[int, int], sympy.Expr] = {(0, 0): h[0]}
    for n in range(1, r + 1):
        w[n, 0] = differentiate(w[n - 1, 0])
        for level in range(1, n):
            w[n, level] = sympy.expand(differentiate(w[n - 1, level]) + (n + level - 1) * v[0] * w[n - 1, level - 1])
        w[n, n] = sympy.expand(2 * n * v[0] * w[n - 1, n - 1])
    return tuple(w[r, n] for n in range(r + 1)), v, h


def w_coefficients(r: int, upsilon: Sequence[float], h: Sequence[float]) -> tuple[float, ...]:
    """Evaluate ``W_{r,n}`` with ``V_{m+1} → Υ_m`` and ``h_l/h → H_l`` (``H_0 = 1``).

    Every polynomial has positive coefficients, so upper bounds in give upper bounds out.
    """
    polynomials, v, hs = w_recurrence(r)
    if len(upsilon) < r or len(h) < r:
        raise BoundModelError("order %s needs %s distortion constants of each kind", r, r)
    values: dict[sympy.Symbol, Any] = {symbol: sympy.Integer(0) for symbol in (*v, *hs)}
    values[hs[0]] = sympy.Integer(1)
    for m in range(r):
        values[v[m]] = sympy.Rational(upsilon[m])
        values[hs[m + 1]] = sympy.Rational(h[m])
    result = tuple(float(poly.subs(values)) * (1.0 + 4.0 * np.finfo(float).eps) for poly in polynomials)
    LOGGER.debug("<%s> | W coefficients | r: %s | values: %s", "w_coefficients", r, result)
    return result


def _conjugated(markov_map: MarkovMap, branch: Branch) -> tuple[Callable[[Any], Any], Callable[[Any], Any]]:
    """``υ_ι`` and ``h_ι`` of a branch: ``acos∘v∘cos`` and ``v'∘cos`` on intervals, ``v`` and ``v'`` on the circle."""
    if markov_map.is_periodic:
        return branch.inverse_generic, derivative(branch.inverse_generic)

    def upsilon(theta: Any) -> Any:
        return arccos(branch.inverse_generic(cos(theta)))

    slope = derivative(branch.inverse_generic)

    def weight(theta: Any) -> Any:
        return slope(cos(theta))

    return upsilon, weight


def _sample_points(markov_map: MarkovMap, zeta: float, samples: int, *, strip: bool) -> NDArray[Any]:
    if strip:
        theta = np.linspace(0.0, TWO_PI, samples, endpoint=False)
        return np.concatenate((theta + 1j * zeta, theta - 1j * zeta))
    if markov_map.is_periodic:
        return np.linspace(0.0, TWO_PI, samples, endpoint=False)
    # Midpoints stay clear of the critical points 0 and π of the cosine.
    return (np.arange(samples) + 0.5) * math.pi / samples


def chebyshev_conjugation_constants(
    markov_map: MarkovMap,
    zeta: float,
    samples: int = STRIP_SAMPLES,
    *,
    order: int | None = None,
) -> tuple[Any, Any]:
    """Numerical suprema of the conjugated branch derivatives, inflated by 5%.

    Without `order` this samples ``|υ''|`` and ``|h'/h|`` on the boundary of the strip
    ``Im θ = ±ζ`` through complex evaluation and returns ``(Υ̂₁, Ĥ₁)``. With `order` it samples
    ``|υ^{(n+1)}|`` and ``|h^{(n)}/h|`` for ``n = 1..order`` on a real grid and returns two tuples.

    Raises
    ------
    AnalyticExtensionError
        The map uses a function with no complex extension (``abs``) and a strip was requested.

    """
    strip = order is None
    depth = 1 if order is None else order
    points = _sample_points(markov_map, zeta, samples, strip=strip)
    upsilon = np.zeros(depth)
    ratios = np.zeros(depth)
    for branch in markov_map.branches:
        conjugate, weight = _conjugated(markov_map, branch)
        v_derivs = derivatives(conjugate, points, depth + 1)
        h_derivs = derivatives(weight, points, depth)
        for n in range(1, depth + 1):
            upsilon[n - 1] = max(upsilon[n - 1], float(np.max(np.abs(v_derivs[n + 1]))))
            ratios[n - 1] = max(ratios[n - 1], float(np.max(np.abs(h_derivs[n] / h_derivs[0]))))
    upsilon *= INFLATION
    ratios *= INFLATION
    LOGGER.debug(
        "<%s> | Conjugation constants | map: %s | strip: %s | upsilon: %s | h: %s",
        "chebyshev_conjugation_constants",
        markov_map.name,
        strip,
        upsilon,
        ratios,
    )
    if order is None:
        return float(upsilon[0]), float(ratios[0])
    return tuple(float(x) for x in upsilon), tuple(float(x) for x in ratios)


def derivative_range(markov_map: MarkovMap, samples: int = STRIP_SAMPLES) -> tuple[float, float]:
    """``[min v', max v']`` over all branches on a real grid of the canonical domain."""
    lo, hi = markov_map.domain.canonical
    grid = np.linspace(lo, hi, samples, endpoint=not markov_map.is_periodic)
    slopes = np.concatenate([branch.inverse_derivatives(grid)[1] for branch in markov_map.branches])
    return float(np.min(slopes)), float(np.max(slopes))


def _expansion_interval(markov_map: MarkovMap) -> tuple[float, float]:
    if markov_map.is_periodic:
        return derivative_range(markov_map)
    lam_check = markov_map.constants.lam_check
    if lam_check is None or not lam_check > 1.0:
        raise BoundModelError("Chebyshev entry bounds need a C-expansion constant above 1, got %s", lam_check)
    return -1.0 / lam_check, 1.0 / lam_check


def entry_bound_analytic(
    markov_map: MarkovMap,
    *,
    delta: float,
    slopes: tuple[float, float] | float | None = None,
    zeta: float | None = None,
    upsilon: float | None = None,
    h: float | None = None,
) -> AnalyticBound:
    """Build the analytic-case model ``t_j·A·exp(ζ(H - d(j, k·p̃)))``.

    ``ζ = min(2·d(μ̃, ℝ∖p̃)/Υ, δ)``; a requested `zeta` above that is lowered to it.

    Parameters
    ----------
    markov_map: :class:`MarkovMap`
        The map.
    delta: :class:`float`
        Half-width of the strip on which the branches extend analytically.
    slopes: :class:`tuple[float, float] | float | None`, optional
        ``p̃`` (Fourier, an interval) or ``p`` (Chebyshev, a number); by default ``μ̃`` widened halfway to the nearest of 0 or 1.
    zeta: :class:`float | None`, optional
        Requested decay rate.
    upsilon, h: :class:`float | None`, optional
        ``Υ_{1,δ}`` and ``H_{1,δ}``; estimated on the strip boundary when omitted.

    Returns
    -------
    :class:`AnalyticBound`
        The model.

    Raises
    ------
    BoundModelError
        ``p̃`` does not strictly contain ``μ̃``, so ``ζ ≤ 0``.

    """
    mu = _expansion_interval(markov_map)
    if upsilon is None or h is None:
        estimated = chebyshev_conjugation_constants(markov_map, delta)
        upsilon = estimated[0] if upsilon is None else upsilon
        h = estimated[1] if h is None else h
    if slopes is None:
        width = max(abs(mu[0]), abs(mu[1]))
        slopes = (mu[0] - 0.5 * (1.0 - width), mu[1] + 0.5 * (1.0 - width))
    interval = (-float(slopes), float(slopes)) if isinstance(slopes, (int, float)) else (float(slopes[0]), float(slopes[1]))
    gap = min(mu[0] - interval[0], interval[1] - mu[1])
    if not gap > 0:
        raise BoundModelError("slopes %s must strictly contain the derivative range %s", interval, mu)
    limit = min(2.0 * gap / upsilon, delta) if upsilon > 0 else delta
    if zeta is not None and zeta > limit:
        LOGGER.warning("<%s> | Requested zeta %s exceeds the admissible %s; using the latter", "entry_bound_analytic", zeta, limit)
    chosen = limit if zeta is None else min(zeta, limit)
    if not chosen > 0:
        raise BoundModelError("zeta must be positive, got %s", chosen)
    c1 = markov_map.constants.canonical_c1(markov_map.domain)
    prefactor = 1.0 if markov_map.is_periodic else 1.0 + 2.0 * c1
    model = AnalyticBound(markov_map.basis, prefactor, interval, c1, zeta=chosen, h=float(h))
    LOGGER.info(
        "<%s> | Analytic model | map: %s | zeta: %s | slopes: %s | H: %s", "entry_bound_analytic", markov_map.name, chosen, interval, h
    )
    return model


def entry_bound_differentiable(
    markov_map: MarkovMap,
    *,
    r: int,
    upsilon: Sequence[float],
    h: Sequence[float],
    mu: tuple[float, float] | None = None,
) -> DifferentiableBound:
    """Build the differentiable-case model from ``Υ_1..Υ_r`` and ``H_1..H_r``.

    ``μ̃`` defaults to the sampled range of ``v'`` (Fourier, widened by 1e-3) or
    ``[-λ̌⁻¹, λ̌⁻¹]`` (Chebyshev).
    """
    weights = w_coefficients(r, upsilon, h)
    if mu is None:
        mu = _expansion_interval(markov_map)
        if markov_map.is_periodic:
            mu = (mu[0] - 1e-3, mu[1] + 1e-3)
    c1 = markov_map.constants.canonical_c1(markov_map.domain)
    prefactor = 1.0 if markov_map.is_periodic else 1.0 + 2.0 * c1
    return DifferentiableBound(markov_map.basis, prefactor, mu, c1, r=r, weights=weights, mu=mu)


def lanford_entry_model() -> AnalyticBound:
    """``|L_jk| ≤ t_j·√(7 + √33/2)·exp(acosh(4 - √6)·k - acosh(7/4)·j)``."""
    zeta = math.acosh(7.0 / 4.0)
    p = math.acosh(4.0 - math.sqrt(6.0)) / zeta
    return AnalyticBound(BasisKind.chebyshev, math.sqrt(7.0 + math.sqrt(33.0) / 2.0), (-p, p), 2.0 / 9.0, zeta=zeta, h=0.0)


def default_entry_model(markov_map: MarkovMap) -> EntryBoundModel | None:
    """The catalog's bound model for a map, or None when the catalog has none."""
    match markov_map.catalog_key:
        case "lanford":
            return lanford_entry_model()
        case "doubling" | "circle":
            # Exactly linear branches: Υ = H = 0, so any ζ is admissible.
            slope = 1.0 / markov_map.beta
            return AnalyticBound(BasisKind.fourier, 1.0, (0.8 * slope, 1.2 * slope), 0.0, zeta=40.0, h=0.0)
        case "nonanalytic-g":
            upsilon, h = chebyshev_conjugation_constants(markov_map, 0.0, order=2)
            return entry_bound_differentiable(markov_map, r=2, upsilon=upsilon, h=h)
        case _:
            return None


def domination_violations(
    block: NDArray[np.float64],
    model: EntryBoundModel,
    order: int,
    slack: float = DOMINATION_SLACK,
) -> tuple[int, NDArray[np.float64], NDArray[np.float64]]:
    """Count entries of a leading block that exceed the model's bound.

    `block` is the top left corner of an assembly at `order` nodes. An entry counts as a
    violation when ``|L_jk| > b_jk(1 + slack) + N·ε·max_j|L_jk|``; the second term is the
    rounding level of column ``k`` in the assembly, below which entries are not resolved.

    Returns
    -------
    :class:`tuple[int, NDArray, NDArray]`
        The number of violations, the bounds and the per-column rounding floor.

    """
    rows, cols = np.meshgrid(np.arange(block.shape[0]), np.arange(block.shape[1]), indexing="ij")
    bounds = np.asarray(model.bound(rows, cols), dtype=np.float64)
    magnitude = np.abs(block)
    floor = order * EPS * np.max(magnitude, axis=0, keepdims=True)
    violations = int(np.count_nonzero(magnitude > bounds * (1.0 + slack) + floor))
    if violations:
        LOGGER.warning(
            "<%s> | Entries exceed their bound | case: %s | violations: %s", "domination_violations", model.case.value, violations
        )
    return violations, bounds, floor[0]
