from __future__ import annotations

import math

import numpy as np
import pytest
import sympy
from scipy.special import logsumexp

from spectral_transfer._enums import BasisKind, BoundCase
from spectral_transfer.errors import BoundModelError, ConfigurationError
from spectral_transfer.maps import MarkovMap
from spectral_transfer.spectral import SpectralFunction
from spectral_transfer.transfer import (
    EntryBoundModel,
    TransferColumnSet,
    aliasing_bound,
    apply_transfer,
    assemble_column,
    chebyshev_conjugation_constants,
    default_entry_model,
    derivative_range,
    domination_violations,
    entry_bound_analytic,
    entry_bound_differentiable,
    lanford_entry_model,
    truncation_bound,
    uniform_entry_bound,
    w_coefficients,
    w_recurrence,
)


def violations(markov_map: MarkovMap, model: EntryBoundModel, size: int = 64) -> int:
    block = TransferColumnSet(markov_map).assemble(2 * size)[:size, :size]
    return domination_violations(block, model, 2 * size)[0]


def test_doubling_matrix_halves_frequencies(doubling: MarkovMap) -> None:
    matrix = TransferColumnSet(doubling).assemble(16)
    expected = np.zeros((16, 16))
    expected[0, 0] = 1.0
    # cos 2mθ ↦ cos mθ and sin 2mθ ↦ sin mθ; odd frequencies vanish.
    for m in range(1, 4):
        expected[2 * m - 1, 4 * m - 1] = 1.0
        expected[2 * m, 4 * m] = 1.0
    # Slot 15 is the Nyquist cosine cos 8θ.
    expected[7, 15] = 1.0
    np.testing.assert_allclose(matrix, expected, atol=1e-14)


def test_threads_do_not_change_columns(lanford: MarkovMap) -> None:
    single = TransferColumnSet(lanford).assemble(24)
    threaded = TransferColumnSet(lanford, threads=4).assemble(24)
    np.testing.assert_allclose(single, threaded, rtol=0, atol=1e-15)


def test_lanford_columns_preserve_integrals(lanford: MarkovMap) -> None:
    # ∫𝓛b_k = ∫b_k, and 𝓛 maps the constant 1/2 to a density with integral 1.
    matrix = TransferColumnSet(lanford).assemble(48)
    k = np.arange(48)
    moments = np.where(k % 2 == 0, 2.0 / (1.0 - k * k), 0.0)
    np.testing.assert_allclose(moments @ matrix[:, :8], moments[:8], atol=1e-12)


def test_assemble_column_checks_basis(lanford: MarkovMap) -> None:
    column = assemble_column(lanford, 2, 32)
    assert column.shape == (32,)
    with pytest.raises(ConfigurationError):
        assemble_column(lanford, 2, 32, BasisKind.fourier)
    with pytest.raises(ConfigurationError):
        assemble_column(lanford, 0, 3)


def test_apply_transfer(doubling: MarkovMap) -> None:
    phi = SpectralFunction(BasisKind.fourier, np.array([0.0, 0.0, 0.0, 1.0, 0.0]))
    image = apply_transfer(TransferColumnSet(doubling), phi, 8)
    np.testing.assert_allclose(image.coeffs, [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], atol=1e-15)


def test_uniform_entry_bound() -> None:
    np.testing.assert_allclose(uniform_entry_bound(BasisKind.chebyshev, 0.5, np.array([0, 1, 5])), [4.0, 8.0, 8.0])
    assert uniform_entry_bound(BasisKind.fourier, 3.0, 7) == 1.0


def test_lanford_model_constants() -> None:
    model = lanford_entry_model()
    assert model.case is BoundCase.analytic
    assert model.zeta == pytest.approx(math.acosh(7.0 / 4.0))
    assert model.prefactor == pytest.approx(math.sqrt(7.0 + math.sqrt(33.0) / 2.0))
    # Entries near the diagonal region fall back to the uniform bound.
    assert model.bound(0, 0) <= uniform_entry_bound(BasisKind.chebyshev, model.c1, 0)


def test_lanford_entries_are_dominated(lanford: MarkovMap) -> None:
    assert violations(lanford, lanford_entry_model()) == 0


def test_differentiable_entries_are_dominated(nonanalytic: MarkovMap) -> None:
    model = default_entry_model(nonanalytic)
    assert model is not None
    assert model.case is BoundCase.differentiable
    assert violations(nonanalytic, model) == 0


def test_doubling_catalog_model(doubling: MarkovMap) -> None:
    model = default_entry_model(doubling)
    assert model is not None
    assert violations(doubling, model, 32) == 0


def test_analytic_model_from_strip(doubling: MarkovMap) -> None:
    model = entry_bound_analytic(doubling, delta=1.0)
    assert model.zeta == pytest.approx(1.0)
    assert model.h == pytest.approx(0.0, abs=1e-12)
    assert violations(doubling, model, 32) == 0
    with pytest.raises(BoundModelError):
        entry_bound_analytic(doubling, delta=1.0, slopes=(0.6, 0.9))


def test_truncation_bound_decreases() -> None:
    model = lanford_entry_model()
    bounds = [truncation_bound(model, n) for n in (256, 512, 1024, 2048)]
    assert all(later < earlier for earlier, later in zip(bounds, bounds[1:], strict=False))
    assert bounds[-1] <= 6.75e-131
    assert bounds[-1] > 0.0


def test_aliasing_bound_shrinks_with_order() -> None:
    model = lanford_entry_model()
    coarse = aliasing_bound(model, 3, 5, 32)
    fine = aliasing_bound(model, 3, 5, 64)
    assert 0.0 < fine < coarse


def test_w_recurrence_low_orders() -> None:
    (w10, w11), v, h = w_recurrence(1)
    assert sympy.expand(w10 - h[1]) == 0
    assert sympy.expand(w11 - 2 * v[0] * h[0]) == 0
    (w20, w21, w22), v, h = w_recurrence(2)
    assert sympy.expand(w20 - h[2]) == 0
    assert sympy.expand(w21 - (2 * v[1] * h[0] + 4 * v[0] * h[1])) == 0
    assert sympy.expand(w22 - 8 * v[0] ** 2 * h[0]) == 0


def test_w_coefficients_substitute_bounds() -> None:
    weights = w_coefficients(2, [0.5, 0.25], [0.1, 0.2])
    np.testing.assert_allclose(weights, [0.2, 2 * 0.25 + 4 * 0.5 * 0.1, 8 * 0.25], rtol=1e-14)
    with pytest.raises(BoundModelError):
        w_recurrence(9)


def test_conjugation_constants(doubling: MarkovMap, lanford: MarkovMap) -> None:
    assert derivative_range(doubling) == pytest.approx((0.5, 0.5))
    upsilon, h = chebyshev_conjugation_constants(doubling, 0.5)
    assert upsilon == pytest.approx(0.0, abs=1e-10)
    assert h == pytest.approx(0.0, abs=1e-10)
    upsilon, h = chebyshev_conjugation_constants(lanford, 0.0, order=2)
    assert len(upsilon) == len(h) == 2
    assert all(value > 0.0 for value in (*upsilon, *h))


def test_differentiable_model_from_constants(doubling: MarkovMap) -> None:
    model = entry_bound_differentiable(doubling, r=1, upsilon=[0.0], h=[0.0])
    assert model.case is BoundCase.differentiable
    assert model.mu == pytest.approx((0.5 - 1e-3, 0.5 + 1e-3))
    # Exact entries sit where d = 0, so the uniform bound covers them.
    assert model.bound(1, 3) == pytest.approx(1.0)


def test_domination_counts_real_excess() -> None:
    model = lanford_entry_model()
    block = np.full((8, 8), 1e3)
    count, bounds, floor = domination_violations(block, model, 16)
    assert count == 64
    assert bounds.shape == (8, 8)
    np.testing.assert_allclose(floor, 16 * np.finfo(np.float64).eps * 1e3)


def explicit_truncation_sum(model: EntryBoundModel, order: int, rows: int) -> float:
    """The Chebyshev truncation bound summed over `rows` rows with no closed-form remainder."""
    j = np.arange(order, order + rows, dtype=np.float64)[:, None]
    k = np.arange(order, dtype=np.float64)[None, :]
    block = 2.0 * model.log_native(j, k) + np.log(np.where(k == 0, 1.0, 2.0)) - math.log(2.0)
    weighted = float(logsumexp(block + 2.0 * np.log(j)))
    plain = float(logsumexp(block))
    return 2.0 * math.pi * (math.exp(0.5 * weighted) + math.exp(0.5 * plain))


@pytest.mark.parametrize(("order", "rows"), [(128, 8192), (2048, 512)])
def test_truncation_bound_against_explicit_tail(order: int, rows: int) -> None:
    model = lanford_entry_model()
    bound = truncation_bound(model, order)
    oracle = explicit_truncation_sum(model, order, rows)
    assert oracle <= bound * (1.0 + 1e-12)
    assert bound <= 2.0 * oracle


def test_lanford_truncation_bound_at_2048() -> None:
    # the remaining gap to 6.75e-133 comes from the entry model's constants, not from the summation
    bound = truncation_bound(lanford_entry_model(), 2048)
    assert 6.75e-133 < bound < 12.0 * 6.75e-133


def test_aliasing_bound_covers_refinement(lanford: MarkovMap) -> None:
    model = lanford_entry_model()
    order = 32
    coarse = TransferColumnSet(lanford).assemble(order)
    fine = TransferColumnSet(lanford).assemble(4 * order)[:order, :order]
    j = np.arange(order)[:, None]
    k = np.arange(order)[None, :]
    allowed = aliasing_bound(model, j, k, order) + aliasing_bound(model, j, k, 4 * order) + 1e-13
    assert np.all(np.abs(coarse - fine) <= allowed)


def test_lanford_uniform_entry_bound() -> None:
    assert uniform_entry_bound(BasisKind.chebyshev, 4.0 / 9.0, 1) == pytest.approx(68.0 / 9.0, rel=1e-15)
    assert uniform_entry_bound(BasisKind.chebyshev, 0.0, 0) == 2.0
