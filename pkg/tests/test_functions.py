from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from numpy.polynomial import chebyshev

from spectral_transfer._enums import BasisKind
from spectral_transfer.maps import dual
from spectral_transfer.spectral import SpectralFunction, evaluate, integrate, multiply
from spectral_transfer.validated.functions import (
    derivative_bounds,
    enclose_integral,
    gauss_enclosure,
    interval_integral,
    interval_product,
    spectral_jet,
)
from spectral_transfer.validated.interval import PI, IntervalArray


def decaying(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.standard_normal(size) * 0.6 ** np.arange(size)


@pytest.mark.parametrize("basis", [BasisKind.chebyshev, BasisKind.fourier])
def test_interval_product_matches_multiply(basis: BasisKind, rng: np.random.Generator) -> None:
    for left, right in ((9, 9), (13, 7), (5, 17)):
        f = SpectralFunction(basis, decaying(rng, left))
        g = SpectralFunction(basis, decaying(rng, right))
        enclosure = interval_product(IntervalArray.point(f.coeffs), IntervalArray.point(g.coeffs), basis)
        reference = multiply(f, g)
        assert enclosure.size == len(reference)
        assert np.max(enclosure.rad) < 1e-13
        assert np.max(np.abs(enclosure.mid - reference.coeffs)) < 1e-13


def test_interval_product_exact_identities() -> None:
    one = IntervalArray.point([0.0, 1.0])
    square = interval_product(one, one, BasisKind.chebyshev)
    for slot, exact in enumerate((0.5, 0.0, 0.5)):
        assert exact in square[slot]
    # cos θ · sin θ = sin(2θ)/2
    cosine = IntervalArray.point([0.0, 1.0, 0.0])
    sine = IntervalArray.point([0.0, 0.0, 1.0])
    mixed = interval_product(cosine, sine, BasisKind.fourier)
    for slot, exact in enumerate((0.0, 0.0, 0.0, 0.0, 0.5)):
        assert exact in mixed[slot]
    # sin² θ = (1 - cos 2θ)/2
    sines = interval_product(sine, sine, BasisKind.fourier)
    for slot, exact in enumerate((0.5, 0.0, 0.0, -0.5, 0.0)):
        assert exact in sines[slot]


def test_interval_product_encloses_pointwise_values(rng: np.random.Generator) -> None:
    f = SpectralFunction(BasisKind.fourier, decaying(rng, 10))
    g = SpectralFunction(BasisKind.fourier, decaying(rng, 11))
    product = interval_product(IntervalArray.point(f.coeffs), IntervalArray.point(g.coeffs), BasisKind.fourier)
    points = rng.uniform(0.0, 2.0 * math.pi, 50)
    values = SpectralFunction(BasisKind.fourier, product.mid)
    np.testing.assert_allclose(evaluate(values, points), evaluate(f, points) * evaluate(g, points), atol=1e-13)


@pytest.mark.parametrize("basis", [BasisKind.chebyshev, BasisKind.fourier])
def test_interval_integral_encloses_integrate(basis: BasisKind, rng: np.random.Generator) -> None:
    fn = SpectralFunction(basis, decaying(rng, 17))
    enclosure = interval_integral(IntervalArray.point(fn.coeffs), basis)
    assert enclosure.lower <= integrate(fn) + 1e-15
    assert integrate(fn) - 1e-15 <= enclosure.upper
    assert enclosure.upper - enclosure.lower < 1e-14


def test_interval_integral_exact_values() -> None:
    # T0 + 3T2 integrates to 2 - 2 = 0
    assert 0.0 in interval_integral(IntervalArray.point([1.0, 0.0, 3.0]), BasisKind.chebyshev)
    constant = interval_integral(IntervalArray.point([1.0, 0.4, -0.2]), BasisKind.fourier)
    with mpmath.workprec(200):
        assert mpmath.mpf(constant.lower) <= 2 * mpmath.pi <= mpmath.mpf(constant.upper)


def test_chebyshev_derivative_bounds_dominate_samples(rng: np.random.Generator) -> None:
    coeffs = decaying(rng, 14)
    fn = SpectralFunction(BasisKind.chebyshev, coeffs)
    bounds = derivative_bounds(fn, 4)
    points = np.concatenate([np.linspace(-1.0, 1.0, 2001), [-1.0, 1.0]])
    for order, bound in enumerate(bounds):
        values = chebyshev.chebval(points, chebyshev.chebder(coeffs, order) if order else coeffs)
        assert np.max(np.abs(values)) <= bound


def test_markov_bound_is_attained_at_the_endpoint() -> None:
    fn = SpectralFunction(BasisKind.chebyshev, [0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
    bounds = derivative_bounds(fn, 2)
    # T5'(1) = 25, T5''(1) = 25·24/3
    assert bounds[1] == pytest.approx(25.0)
    assert bounds[2] == pytest.approx(200.0)


def test_fourier_derivative_bounds_dominate_samples(rng: np.random.Generator) -> None:
    coeffs = decaying(rng, 11)
    fn = SpectralFunction(BasisKind.fourier, coeffs)
    bounds = derivative_bounds(fn, 3)
    theta = np.linspace(0.0, 2.0 * math.pi, 2001)
    a = coeffs[1::2]
    b = coeffs[2::2]
    modes = np.arange(1, a.size + 1)
    for order in range(1, 4):
        shift = order * math.pi / 2.0
        phase = np.multiply.outer(theta, modes) + shift
        values = (np.cos(phase) * modes**order) @ a + (np.sin(phase) * modes[: b.size] ** order) @ b
        assert np.max(np.abs(values)) <= bounds[order]
    assert bounds[0] == pytest.approx(np.sum(np.abs(coeffs)))


def test_spectral_jet_encloses_values_and_derivatives(rng: np.random.Generator) -> None:
    coeffs = decaying(rng, 12)
    fn = SpectralFunction(BasisKind.chebyshev, coeffs)
    bounds = derivative_bounds(fn, 4)
    jet = spectral_jet(fn, bounds)
    points = np.linspace(-0.95, 0.95, 40)
    boxes = IntervalArray(points, points + 0.01)
    values = jet(boxes)
    for edge in (boxes.lo, boxes.hi):
        exact = evaluate(fn, edge)
        assert np.all(values.lo <= exact + 1e-15)
        assert np.all(exact - 1e-15 <= values.hi)
    fourth = dual.lift(boxes, 4)
    result = jet(fourth)
    for _ in range(4):
        result = dual.tangent(result)
    magnitude = dual.primal(result).mag
    assert np.all(magnitude <= bounds[4] * (1.0 + 1e-12))
    assert np.max(np.abs(chebyshev.chebval(points, chebyshev.chebder(coeffs, 4)))) <= np.max(magnitude)


def test_spectral_jet_rejects_missing_bounds() -> None:
    jet = spectral_jet(SpectralFunction(BasisKind.chebyshev, [1.0, 2.0]), [3.0])
    with pytest.raises(ValueError, match="order 1"):
        jet(dual.lift(IntervalArray.point([0.1]), 1))


def test_gauss_enclosure_contains_exponential_integral() -> None:
    coarse = gauss_enclosure(dual.exp, 0.0, 1.0, 64)
    fine = gauss_enclosure(dual.exp, 0.0, 1.0, 128)
    with mpmath.workprec(200):
        exact = mpmath.e - 1
        for result in (coarse, fine):
            assert mpmath.mpf(result.value.lower) <= exact <= mpmath.mpf(result.value.upper)
    assert 0.05 < fine.remainder / coarse.remainder < 0.075
    assert abs(float(fine.rule.mid) - (math.e - 1.0)) < fine.remainder


def test_gauss_enclosure_with_interval_limits() -> None:
    result = gauss_enclosure(lambda t: dual.cos(t) * dual.cos(t), 0.0, 2.0 * PI, 256)
    with mpmath.workprec(200):
        assert mpmath.mpf(result.value.lower) <= mpmath.pi <= mpmath.mpf(result.value.upper)


def test_enclose_integral_refines_until_tolerance() -> None:
    result = enclose_integral(lambda t: 1.0 / (2.0 + dual.sin(t)), 0.0, 2.0 * PI, tolerance=1e-12)
    assert result.remainder <= 1e-12
    assert result.boxes >= 64
    # ∫ dθ/(2 + sin θ) over a turn is 2π/√3
    assert 2.0 * math.pi / math.sqrt(3.0) in result.value


def test_enclose_integral_warns_when_capped(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level("WARNING", logger="spectral_transfer.validated.functions"):
        result = enclose_integral(dual.exp, 0.0, 1.0, tolerance=1e-40, max_boxes=128)
    assert result.boxes == 128
    assert "remainder above tolerance" in caplog.text


def test_enclose_integral_of_a_spectral_function(rng: np.random.Generator) -> None:
    fn = SpectralFunction(BasisKind.chebyshev, decaying(rng, 10))
    jet = spectral_jet(fn, derivative_bounds(fn, 4))
    result = enclose_integral(jet, -1.0, 1.0)
    exact = interval_integral(IntervalArray.point(fn.coeffs), BasisKind.chebyshev)
    assert result.value.lower <= exact.upper
    assert exact.lower <= result.value.upper
    assert result.remainder < 1e-13
