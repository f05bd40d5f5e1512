from __future__ import annotations

import math

import numpy as np
import pytest

from spectral_transfer._enums import BasisKind, BudgetDominance, QuantityKind
from spectral_transfer.errors import CertificationError, ConfigurationError
from spectral_transfer.maps import MarkovMap
from spectral_transfer.solver import observable
from spectral_transfer.spectral import NodeGrid, SpectralFunction
from spectral_transfer.transfer import TransferColumnSet, default_entry_model, lanford_entry_model
from spectral_transfer.validated import (
    ValidatedResult,
    finite_section_error,
    interval_assemble,
    interval_nodes,
    interval_solve,
    validate,
    validated_quantity,
)

from .conftest import LANFORD_DIFFUSION, LANFORD_LYAPUNOV


@pytest.fixture(scope="module")
def doubling_result(doubling: MarkovMap) -> ValidatedResult:
    return validate(doubling, 16)


def test_finite_section_error() -> None:
    assert finite_section_error(0.5) == 1.0
    assert finite_section_error(0.0) == 0.0
    with pytest.raises(CertificationError):
        finite_section_error(1.0)
    with pytest.raises(CertificationError):
        finite_section_error(-0.1)


@pytest.mark.parametrize("basis", [BasisKind.chebyshev, BasisKind.fourier])
def test_interval_nodes_enclose_grid(basis: BasisKind) -> None:
    enclosure = interval_nodes(basis, 24)
    assert np.all(enclosure.contains(NodeGrid(basis, 24).nodes))
    assert enclosure.max_width < 1e-14


def test_doubling_matrix_enclosure(doubling: MarkovMap) -> None:
    model = default_entry_model(doubling)
    assert model is not None
    matrix = interval_assemble(doubling, 16, model)
    assert matrix.shape == (16, 16)
    assert matrix[1, 3].contains(1.0)
    assert matrix[1, 3].max_width < 1e-13
    assert matrix[2, 4].contains(1.0)
    assert matrix[0, 1].contains(0.0)


def test_doubling_certificate(doubling_result: ValidatedResult) -> None:
    assert doubling_result.midpoint.coeffs[0] == pytest.approx(1.0 / (2.0 * math.pi), abs=1e-14)
    assert doubling_result.eps_total < 1e-9
    assert doubling_result.eps_total >= doubling_result.eps_interval
    assert doubling_result.dominated_by is BudgetDominance.interval
    assert doubling_result.recommended_bits >= 53
    assert doubling_result.b_sol == pytest.approx(167.67, abs=0.01)


def test_certificate_data(doubling: MarkovMap, doubling_result: ValidatedResult) -> None:
    lyap = validated_quantity(doubling_result, QuantityKind.lyapunov, doubling)
    assert math.log(2.0) in lyap
    data = doubling_result.certificate("doubling", {"lyapunov": lyap}, deterministic=True)
    assert "timings" not in data
    assert data["order"] == 16
    assert data["dominated_by"] == "interval"
    assert data["quantities"]["lyapunov"] == [lyap.lower, lyap.upper]
    assert data["inputs"]["bound_case"] == "analytic"
    assert len(data["midpoint_coefficients"]) == 16
    with pytest.raises(ConfigurationError):
        validated_quantity(doubling_result, QuantityKind.diffusion, doubling)


def test_lanford_enclosure_widths(lanford: MarkovMap) -> None:
    matrix = interval_assemble(lanford, 64, lanford_entry_model())
    leading = matrix[:16, :16]
    assert leading.max_width < 1e-12
    floating = TransferColumnSet(lanford).assemble(64)[:16, :16]
    np.testing.assert_allclose(leading.mid, floating, atol=1e-13)


def test_residual_gate(doubling: MarkovMap) -> None:
    model = default_entry_model(doubling)
    assert model is not None
    matrix = interval_assemble(doubling, 16, model)
    with pytest.raises(CertificationError):
        interval_solve(matrix, 167.7, 1e-30, basis=BasisKind.fourier, max_residual=0.0)
    with pytest.raises(CertificationError):
        interval_solve(matrix, 10.0, 0.2, basis=BasisKind.fourier)


def test_validate_rejects_bad_inputs(lanford: MarkovMap, nonanalytic: MarkovMap) -> None:
    with pytest.raises(ConfigurationError):
        validate(lanford, 32, precision=113)
    with pytest.raises(ConfigurationError):
        validate(nonanalytic, 32)


@pytest.mark.slow
def test_lanford_statistics_are_contained(lanford: MarkovMap) -> None:
    result = validate(lanford, 192, b_sol=9235.0)
    lyap = validated_quantity(result, QuantityKind.lyapunov, lanford)
    assert LANFORD_LYAPUNOV in lyap
    a = observable(lanford, lambda x: x**2)
    diffusion = validated_quantity(result, QuantityKind.diffusion, lanford, a)
    assert LANFORD_DIFFUSION in diffusion


def test_doubling_statistics_are_enclosed(doubling: MarkovMap, doubling_result: ValidatedResult) -> None:
    lyap = validated_quantity(doubling_result, QuantityKind.lyapunov, doubling)
    assert lyap.upper - lyap.lower < 1e-7
    # cos θ is uncorrelated with every cos 2ⁿθ, so σ² = ∫cos²θ dθ/2π
    a = SpectralFunction(BasisKind.fourier, [0.0, 1.0, 0.0])
    diffusion = validated_quantity(doubling_result, QuantityKind.diffusion, doubling, a)
    assert 0.5 in diffusion
    assert diffusion.upper - diffusion.lower < 1e-3
