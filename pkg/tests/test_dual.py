from __future__ import annotations

import math

import numpy as np
import pytest

from spectral_transfer.maps.dual import Dual, arccos, cos, derivative, derivatives, exp, lift, log, primal, sin, sqrt, tan, tangent


@pytest.mark.parametrize(
    ("func", "first", "x"),
    [
        (sin, math.cos, 0.3),
        (cos, lambda x: -math.sin(x), 0.3),
        (tan, lambda x: 1.0 / math.cos(x) ** 2, 0.3),
        (exp, math.exp, 0.3),
        (log, lambda x: 1.0 / x, 0.3),
        (sqrt, lambda x: 0.5 / math.sqrt(x), 0.3),
        (arccos, lambda x: -1.0 / math.sqrt(1.0 - x * x), 0.3),
    ],
)
def test_elementary_derivatives(func, first, x: float) -> None:
    assert derivative(func)(x) == pytest.approx(first(x), rel=1e-14)


def test_arithmetic_rules() -> None:
    x = Dual(2.0, 1.0)
    assert (x * x).dual == 4.0
    assert (1.0 / x).dual == -0.25
    assert (x**3).dual == 12.0
    assert (3.0 - x).dual == -1.0
    assert (2.0**x).dual == pytest.approx(4.0 * math.log(2.0))


def test_nested_duals_give_higher_derivatives() -> None:
    values = derivatives(lambda x: x**4 + sin(x), 0.5, 3)
    assert values[0] == pytest.approx(0.5**4 + math.sin(0.5))
    assert values[1] == pytest.approx(4 * 0.5**3 + math.cos(0.5))
    assert values[2] == pytest.approx(12 * 0.5**2 - math.sin(0.5))
    assert values[3] == pytest.approx(24 * 0.5 - math.cos(0.5))


def test_arrays_and_complex_arguments() -> None:
    x = np.linspace(0.1, 1.0, 5)
    np.testing.assert_allclose(derivative(lambda t: t * exp(t))(x), (1.0 + x) * np.exp(x), rtol=1e-14)
    z = 0.4 + 0.2j
    assert derivative(lambda t: sin(t) * t)(z) == pytest.approx(np.cos(z) * z + np.sin(z), rel=1e-14)


def test_helpers() -> None:
    seeded = lift(1.5, 2)
    assert primal(seeded) == 1.5
    assert tangent(3.0) == 0.0
    assert isinstance(seeded.real, Dual)
