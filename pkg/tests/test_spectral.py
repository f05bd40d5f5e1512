from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad

from spectral_transfer._enums import BasisKind
from spectral_transfer.spectral import (
    NodeGrid,
    SpectralFunction,
    analyze,
    basis_values,
    bv_norm_upper_function,
    bv_norm_upper_matrix,
    bv_seminorm_upper_function,
    clenshaw_curtis,
    evaluate,
    fourier_modes,
    integrate,
    multiply,
    read_csv,
    synthesize,
)


def test_chebyshev_nodes_decrease() -> None:
    nodes = NodeGrid(BasisKind.chebyshev, 8).nodes
    assert np.all(np.diff(nodes) < 0)
    assert nodes[0] == pytest.approx(math.cos(math.pi / 16))


def test_fourier_modes_layout() -> None:
    np.testing.assert_array_equal(fourier_modes(6), [0, 1, 1, 2, 2, 3])


@pytest.mark.parametrize("order", [7, 8, 33])
def test_chebyshev_analysis_recovers_polynomials(order: int) -> None:
    grid = NodeGrid(BasisKind.chebyshev, order)
    x = grid.nodes
    fn = analyze(grid, 4 * x**3 - 3 * x + 0.5)
    expected = np.zeros(order)
    expected[0] = 0.5
    expected[3] = 1.0
    np.testing.assert_allclose(fn.coeffs, expected, atol=1e-14)


@pytest.mark.parametrize("order", [9, 10])
def test_fourier_analysis_layout(order: int) -> None:
    grid = NodeGrid(BasisKind.fourier, order)
    t = grid.nodes
    fn = analyze(grid, 1.0 + 2.0 * np.cos(t) - 3.0 * np.sin(2 * t) + 0.25 * np.cos(4 * t))
    expected = np.zeros(order)
    expected[[0, 1, 4, 7]] = [1.0, 2.0, -3.0, 0.25]
    np.testing.assert_allclose(fn.coeffs, expected, atol=1e-14)


@pytest.mark.parametrize(("basis", "order"), [(BasisKind.chebyshev, 16), (BasisKind.fourier, 16), (BasisKind.fourier, 15)])
def test_synthesize_inverts_analyze(basis: BasisKind, order: int, rng: np.random.Generator) -> None:
    fn = SpectralFunction(basis, rng.standard_normal(order))
    grid = NodeGrid(basis, order)
    np.testing.assert_allclose(analyze(grid, synthesize(fn, grid)).coeffs, fn.coeffs, atol=1e-13)
    np.testing.assert_allclose(synthesize(fn, grid), evaluate(fn, grid.nodes), atol=1e-13)


@pytest.mark.parametrize("basis", [BasisKind.chebyshev, BasisKind.fourier])
def test_basis_values_match_evaluate(basis: BasisKind, rng: np.random.Generator) -> None:
    coeffs = rng.standard_normal(9)
    x = rng.uniform(-1.0, 1.0, 13)
    direct = basis_values(basis, x, np.arange(9)) @ coeffs
    np.testing.assert_allclose(direct, evaluate(SpectralFunction(basis, coeffs), x), atol=1e-13)


def test_integrals() -> None:
    assert integrate(SpectralFunction.constant(BasisKind.fourier, 1.0 / (2 * math.pi))) == pytest.approx(1.0)
    # ∫T_2 = -2/3 and odd degrees integrate to zero.
    assert integrate(SpectralFunction(BasisKind.chebyshev, np.array([0.5, 7.0, 1.0]))) == pytest.approx(1.0 - 2.0 / 3.0)


def test_multiply_is_exact_for_finite_expansions() -> None:
    f = SpectralFunction(BasisKind.chebyshev, np.array([0.0, 1.0]))
    product = multiply(f, f)
    np.testing.assert_allclose(product.coeffs, [0.5, 0.0, 0.5], atol=1e-15)
    g = SpectralFunction(BasisKind.fourier, np.array([0.0, 1.0, 0.0]))
    np.testing.assert_allclose(multiply(g, g).resized(5).coeffs, [0.5, 0.0, 0.0, 0.5, 0.0], atol=1e-15)


def test_bv_bounds() -> None:
    cosine = SpectralFunction(BasisKind.fourier, np.array([0.0, 1.0, 0.0]))
    assert bv_seminorm_upper_function(cosine) == pytest.approx(4.0)
    t3 = SpectralFunction(BasisKind.chebyshev, np.array([0.0, 0.0, 0.0, 1.0]))
    assert bv_seminorm_upper_function(t3) == pytest.approx(6.0)
    assert bv_norm_upper_function(t3) == pytest.approx(7.0)


def test_bv_matrix_bound(rng: np.random.Generator) -> None:
    identity = bv_norm_upper_matrix(np.eye(4), BasisKind.chebyshev)
    assert identity == pytest.approx(2 * math.pi * (math.sqrt(14.0) + 2.0))
    block = rng.standard_normal((12, 12))
    assert bv_norm_upper_matrix(2.0 * block, BasisKind.fourier) == pytest.approx(2.0 * bv_norm_upper_matrix(block, BasisKind.fourier))


def test_clenshaw_curtis() -> None:
    nodes, weights = clenshaw_curtis(16)
    assert weights.sum() == pytest.approx(2.0, abs=1e-14)
    assert weights @ nodes**2 == pytest.approx(2.0 / 3.0, abs=1e-14)
    assert weights @ np.exp(nodes) == pytest.approx(math.e - 1.0 / math.e, abs=1e-14)


def test_csv_round_trip(tmp_path: Path) -> None:
    fn = SpectralFunction(BasisKind.chebyshev, np.array([1.0 / 3.0, -2.5e-17, 7.0]))
    path = fn.to_csv(tmp_path / "rho.csv")
    assert path.read_text(encoding="utf-8").splitlines()[0] == "index,coefficient"
    np.testing.assert_array_equal(read_csv(BasisKind.chebyshev, path).coeffs, fn.coeffs)


def test_resolution_checks() -> None:
    fn = SpectralFunction(BasisKind.chebyshev, np.r_[1.0, np.full(15, 1e-16)])
    assert fn.is_resolved(1e-14)
    assert not SpectralFunction(BasisKind.chebyshev, np.ones(16)).is_resolved(1e-14)


def canonical_points(basis: BasisKind, count: int) -> np.ndarray:
    if basis is BasisKind.fourier:
        return np.linspace(0.0, 2.0 * math.pi, count)
    return np.linspace(-1.0, 1.0, count)


@pytest.mark.parametrize("basis", [BasisKind.chebyshev, BasisKind.fourier])
def test_integral_of_product_matches_quadrature(basis: BasisKind, rng: np.random.Generator) -> None:
    lo, hi = (0.0, 2.0 * math.pi) if basis is BasisKind.fourier else (-1.0, 1.0)
    for _ in range(5):
        f = SpectralFunction(basis, rng.standard_normal(2 * int(rng.integers(0, 6)) + 1))
        g = SpectralFunction(basis, rng.standard_normal(2 * int(rng.integers(0, 6)) + 1))
        reference, _ = quad(lambda x, f=f, g=g: evaluate(f, x) * evaluate(g, x), lo, hi, limit=200, epsabs=1e-13, epsrel=1e-13)
        assert integrate(multiply(f, g)) == pytest.approx(reference, abs=1e-10)


def sampled_bv_norm(fn: SpectralFunction) -> float:
    values = evaluate(fn, canonical_points(fn.basis, 4001))
    return float(np.sum(np.abs(np.diff(values))) + np.max(np.abs(values)))


@pytest.mark.parametrize("basis", [BasisKind.chebyshev, BasisKind.fourier])
def test_bv_matrix_bound_dominates_trial_ratios(basis: BasisKind, rng: np.random.Generator) -> None:
    size = 9
    matrix = rng.standard_normal((size, size)) * 0.7 ** np.arange(size)[None, :]
    bound = bv_norm_upper_matrix(matrix, basis)
    ratios = []
    for _ in range(100):
        trial = SpectralFunction(basis, rng.standard_normal(size))
        image = SpectralFunction(basis, matrix @ trial.coeffs)
        ratios.append(sampled_bv_norm(image) / sampled_bv_norm(trial))
    assert max(ratios) <= bound
