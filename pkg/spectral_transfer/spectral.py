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
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
from numpy.polynomial import chebyshev
from scipy import fft

from ._enums import BasisKind

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

__all__ = (
    "NodeGrid",
    "SpectralFunction",
    "analyze",
    "analyze_columns",
    "basis_values",
    "bv_norm_upper_function",
    "bv_norm_upper_matrix",
    "bv_seminorm_upper_function",
    "clenshaw_curtis",
    "evaluate",
    "fourier_modes",
    "integrate",
    "multiply",
    "read_csv",
    "synthesize",
    "write_csv",
)

LOGGER = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def fourier_modes(size: int) -> NDArray[np.int64]:
    """The frequency ``m`` carried by each slot of the real Fourier layout: 0, 1, 1, 2, 2, …"""
    return (np.arange(size) + 1) // 2


def tail_length(size: int) -> int:
    """How many trailing coefficients decide whether a sequence is resolved."""
    return max(1, min(size - 1, max(8, size // 8)))


@dataclass(frozen=True, slots=True)
class NodeGrid:
    """Interpolation nodes of order `order`.

    Fourier nodes are ``2πl/N`` for ``l = 0..N-1``; Chebyshev nodes are the first-kind points
    ``cos((2l+1)π/(2N))``, in decreasing order.
    """

    basis: BasisKind
    order: int

    @property
    def nodes(self) -> NDArray[np.float64]:
        index = np.arange(self.order)
        if self.basis is BasisKind.fourier:
            return TWO_PI * index / self.order
        return np.cos((2 * index + 1) * math.pi / (2 * self.order))


@dataclass(frozen=True, slots=True, eq=False)
class SpectralFunction:
    """A function on the canonical domain, stored by its coefficients in `basis`.

    Fourier coefficients use the real layout ``(a0, a1, b1, a2, b2, …)`` for
    ``a0 + Σ a_m cos(mθ) + b_m sin(mθ)``; Chebyshev coefficients ``c_k`` multiply ``T_k``.
    """

    basis: BasisKind
    coeffs: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=np.float64).reshape(-1))

    def __len__(self) -> int:
        return int(self.coeffs.size)

    def __repr__(self) -> str:
        return f"<SpectralFunction basis={self.basis.value} order={len(self)} trailing={self.trailing_magnitude():.3e}>"

    def __add__(self, other: SpectralFunction) -> SpectralFunction:
        size = max(len(self), len(other))
        return SpectralFunction(self.basis, self.resized(size).coeffs + other.resized(size).coeffs)

    def __sub__(self, other: SpectralFunction) -> SpectralFunction:
        return self + other.scaled(-1.0)

    def scaled(self, factor: float) -> SpectralFunction:
        return SpectralFunction(self.basis, self.coeffs * factor)

    def resized(self, size: int) -> SpectralFunction:
        """Truncate or zero-pad to `size` coefficients."""
        out = np.zeros(size)
        keep = min(size, len(self))
        out[:keep] = self.coeffs[:keep]
        return SpectralFunction(self.basis, out)

    def trailing_magnitude(self) -> float:
        if len(self) == 0:
            return 0.0
        return float(np.max(np.abs(self.coeffs[-tail_length(len(self)) :])))

    def is_resolved(self, tolerance: float) -> bool:
        """Whether the trailing coefficients are below `tolerance` relative to the largest one."""
        scale = float(np.max(np.abs(self.coeffs), initial=0.0))
        return scale == 0.0 or self.trailing_magnitude() < tolerance * scale

    def __call__(self, x: ArrayLike) -> Any:
        return evaluate(self, x)

    @classmethod
    def constant(cls, basis: BasisKind, value: float, size: int = 1) -> SpectralFunction:
        coeffs = np.zeros(size)
        coeffs[0] = value
        return cls(basis, coeffs)

    @classmethod
    def from_function(cls, basis: BasisKind, func: Any, order: int) -> SpectralFunction:
        """Interpolate a callable at the nodes of order `order`."""
        grid = NodeGrid(basis, order)
        return analyze(grid, np.asarray(func(grid.nodes), dtype=np.float64) * np.ones(order))

    def to_csv(self, path: Path | str) -> Path:
        return write_csv(self, path)

    @classmethod
    def from_csv(cls, basis: BasisKind, path: Path | str) -> SpectralFunction:
        return read_csv(basis, path)


def analyze(grid: NodeGrid, values: ArrayLike) -> SpectralFunction:
    """Coefficients of the interpolant through ``(grid.nodes, values)``.

    Chebyshev uses ``scipy.fft.dct`` of type II: ``y_k = 2 Σ_l v_l cos(πk(2l+1)/2N)``, so
    ``c_k = y_k / N`` for ``k ≥ 1`` and ``c_0 = y_0 / 2N``. Fourier uses ``rfft`` with
    ``a_m = 2 Re X_m / N``, ``b_m = -2 Im X_m / N`` and the Nyquist cosine ``X_{N/2} / N``.
    """
    data = np.asarray(values, dtype=np.float64).reshape(-1)
    if data.size != grid.order:
        raise ValueError(f"expected {grid.order} values, got {data.size}")
    return SpectralFunction(grid.basis, analyze_columns(grid, data))


def analyze_columns(grid: NodeGrid, values: NDArray[np.float64], *, workers: int = 1) -> NDArray[np.float64]:
    """:func:`analyze` applied along axis 0 of a block of node values, one transform per column."""
    n = grid.order
    if grid.basis is BasisKind.chebyshev:
        coeffs = fft.dct(values, type=2, axis=0, workers=workers) / n
        coeffs[0] /= 2.0
        return coeffs
    spectrum = fft.rfft(values, axis=0, workers=workers)
    coeffs = np.empty(values.shape)
    coeffs[0] = spectrum[0].real / n
    modes = np.arange(1, (n - 1) // 2 + 1)
    coeffs[2 * modes - 1] = 2.0 * spectrum[modes].real / n
    coeffs[2 * modes] = -2.0 * spectrum[modes].imag / n
    if n % 2 == 0 and n > 1:
        coeffs[n - 1] = spectrum[n // 2].real / n
    return coeffs


def basis_values(basis: BasisKind, x: ArrayLike, indices: ArrayLike) -> NDArray[np.float64]:
    """``b_k(x)`` for every point and every slot index, shape ``x.shape + (len(indices),)``.

    Points are not reduced to the canonical domain: Fourier slots are 2π-periodic and
    Chebyshev arguments are clipped to [-1, 1] before ``cos(k·acos x)``.
    """
    points = np.asarray(x, dtype=np.float64)[..., None]
    slots = np.asarray(indices)
    if basis is BasisKind.chebyshev:
        return np.cos(slots * np.arccos(np.clip(points, -1.0, 1.0)))
    modes = (slots + 1) // 2
    phase = modes * points
    return np.where(slots == 0, 1.0, np.where(slots % 2 == 1, np.cos(phase), np.sin(phase)))


def synthesize(fn: SpectralFunction, grid: NodeGrid) -> NDArray[np.float64]:
    """Values of `fn` at the grid nodes; the inverse of :func:`analyze` on equal orders."""
    n = grid.order
    if len(fn) > n:
        return evaluate(fn, grid.nodes)
    coeffs = fn.resized(n).coeffs
    if fn.basis is BasisKind.chebyshev:
        scaled = coeffs / 2.0
        scaled[0] = coeffs[0]
        return fft.dct(scaled, type=3)
    spectrum = np.zeros(n // 2 + 1, dtype=np.complex128)
    spectrum[0] = n * coeffs[0]
    modes = np.arange(1, (n - 1) // 2 + 1)
    spectrum[modes] = 0.5 * n * (coeffs[2 * modes - 1] - 1j * coeffs[2 * modes])
    if n % 2 == 0 and n > 1:
        spectrum[n // 2] = n * coeffs[n - 1]
    return fft.irfft(spectrum, n=n)


def _fourier_pairs(coeffs: NDArray[np.float64]) -> tuple[float, NDArray[np.float64], NDArray[np.float64]]:
    size = coeffs.size + (coeffs.size + 1) % 2
    padded = np.zeros(size)
    padded[: coeffs.size] = coeffs
    return float(padded[0]), padded[1::2], padded[2::2]


def evaluate(fn: SpectralFunction, x: ArrayLike) -> Any:
    """Evaluate at canonical points: ``chebval`` (Clenshaw) or direct trigonometric summation."""
    points = np.asarray(x, dtype=np.float64)
    if fn.basis is BasisKind.chebyshev:
        result = chebyshev.chebval(points, fn.coeffs)
    else:
        a0, a, b = _fourier_pairs(fn.coeffs)
        modes = np.arange(1, a.size + 1)
        phase = np.multiply.outer(points, modes)
        result = a0 + np.cos(phase) @ a + np.sin(phase) @ b
    return float(result) if points.ndim == 0 else result


def integrate(fn: SpectralFunction) -> float:
    """The total Lebesgue integral over the canonical domain."""
    if fn.basis is BasisKind.fourier:
        return TWO_PI * float(fn.coeffs[0]) if len(fn) else 0.0
    k = np.arange(0, len(fn), 2)
    return float(np.sum(fn.coeffs[::2] * 2.0 / (1.0 - k * k)))


def multiply(f: SpectralFunction, g: SpectralFunction) -> SpectralFunction:
    """Pointwise product, exact up to round-off for finite expansions."""
    if f.basis is not g.basis:
        raise ValueError("cannot multiply functions in different bases")
    if f.basis is BasisKind.chebyshev:
        size = len(f) + len(g) - 1
    else:
        size = 2 * (len(f) // 2 + len(g) // 2) + 1
    grid = NodeGrid(f.basis, size)
    product = analyze(grid, synthesize(f, grid) * synthesize(g, grid))
    LOGGER.debug("<%s> | Product grid | basis: %s | order: %s", "multiply", f.basis.value, size)
    return product


def bv_seminorm_upper_function(fn: SpectralFunction) -> float:
    """An upper bound on the total variation.

    Chebyshev uses ``Var(T_k) = 2k``; Fourier uses ``Var(a cos mθ + b sin mθ) = 4m·√(a²+b²)``.
    """
    if fn.basis is BasisKind.chebyshev:
        k = np.arange(len(fn))
        return float(np.sum(2.0 * k * np.abs(fn.coeffs)))
    _, a, b = _fourier_pairs(fn.coeffs)
    modes = np.arange(1, a.size + 1)
    return float(np.sum(4.0 * modes * np.hypot(a, b)))


def bv_norm_upper_function(fn: SpectralFunction) -> float:
    """Variation bound plus the sup bound ``Σ|c_k|``."""
    return bv_seminorm_upper_function(fn) + float(np.sum(np.abs(fn.coeffs)))


def bv_norm_upper_matrix(matrix: ArrayLike, basis: BasisKind, *, complex_layout: bool = False) -> float:
    """Upper bound on the BV operator norm of a coefficient block, ``2π(‖DF‖ + ‖F‖)``.

    The ℓ² operator norms are bounded by Frobenius norms. For Fourier the real layout is first
    brought to the complex exponential basis by the similarity ``diag(1, 1/√2, 1/√2, …)`` (the
    remaining change of basis is unitary), and ``D`` scales each row by its frequency. Pass
    `complex_layout` when the block is already indexed ``e_0, e_1, e_-1, e_2, …``.
    For Chebyshev the block is conjugated by ``Č = diag(t_k^{-1/2})`` with ``t_k = 2 - δ_{k0}``
    and ``Ď`` scales row ``j`` by ``j``.

    Parameters
    ----------
    matrix: :class:`ArrayLike`
        A finite rectangular block, rows and columns in basis order.
    basis: :class:`BasisKind`
        The basis of both rows and columns.
    complex_layout: :class:`bool`, optional
        Fourier only, by default False.

    Returns
    -------
    :class:`float`
        The bound.

    """
    block = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    rows, cols = block.shape
    if basis is BasisKind.fourier:
        if not complex_layout:
            weight = np.where(np.arange(max(rows, cols)) == 0, 1.0, 1.0 / math.sqrt(2.0))
            block = block * weight[:rows, None] / weight[None, :cols]
        scale = fourier_modes(rows).astype(np.float64)
    else:
        t = np.where(np.arange(max(rows, cols)) == 0, 1.0, 2.0)
        block = block * t[:rows, None] ** -0.5 * t[None, :cols] ** 0.5
        scale = np.arange(rows, dtype=np.float64)
    return TWO_PI * (float(np.linalg.norm(scale[:, None] * block)) + float(np.linalg.norm(block)))


def clenshaw_curtis(n: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Clenshaw–Curtis nodes ``cos(πj/n)``, ``j = 0..n``, and weights on [-1, 1].

    The weights are a type-I DCT of the Chebyshev moments ``∫T_k = 2/(1-k²)`` (even ``k``).
    """
    if n < 2:
        raise ValueError("Clenshaw-Curtis needs n >= 2")
    k = np.arange(n + 1)
    moments = np.where(k % 2 == 0, 2.0 / (1.0 - k.astype(np.float64) ** 2), 0.0)
    weights = fft.dct(moments, type=1) / n
    weights[0] /= 2.0
    weights[-1] /= 2.0
    return np.cos(math.pi * k / n), weights


def write_csv(fn: SpectralFunction, path: Path | str) -> Path:
    """Dump coefficients as ``index,coefficient`` rows, 1-based, 17 significant digits."""
    target = Path(path)
    table = np.column_stack((np.arange(1, len(fn) + 1), fn.coeffs))
    np.savetxt(target, table, fmt=("%d", "%.17g"), delimiter=",", header="index,coefficient", comments="")
    LOGGER.debug("<%s> | Wrote coefficients | path: %s | order: %s", "write_csv", target, len(fn))
    return target


def read_csv(basis: BasisKind, path: Path | str) -> SpectralFunction:
    """Read a coefficient dump written by :func:`write_csv`."""
    table = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    order = np.argsort(table[:, 0])
    return SpectralFunction(basis, table[order, 1])
