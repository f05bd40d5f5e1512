from __future__ import annotations

import operator
from typing import TYPE_CHECKING, Any

import mpmath
import numpy as np
import pytest

from spectral_transfer.errors import IntervalError
from spectral_transfer.maps import dual
from spectral_transfer.validated.interval import PI, IntervalArray, IntervalScalar, interval_matmul

if TYPE_CHECKING:
    from collections.abc import Callable

CASES = 2000

UNARY = {
    "sqrt": (IntervalArray.sqrt, mpmath.sqrt, (1e-3, 100.0)),
    "exp": (IntervalArray.exp, mpmath.exp, (-30.0, 30.0)),
    "log": (IntervalArray.log, mpmath.log, (1e-3, 100.0)),
    "sin": (IntervalArray.sin, mpmath.sin, (-50.0, 50.0)),
    "cos": (IntervalArray.cos, mpmath.cos, (-50.0, 50.0)),
    "arccos": (IntervalArray.arccos, mpmath.acos, (-1.0, 1.0)),
    "square": (lambda x: x**2, lambda t: t**2, (-5.0, 5.0)),
    "cube": (lambda x: x**3, lambda t: t**3, (-5.0, 5.0)),
}

BINARY = {
    "add": (operator.add, (-10.0, 10.0), (-10.0, 10.0)),
    "sub": (operator.sub, (-10.0, 10.0), (-10.0, 10.0)),
    "mul": (operator.mul, (-10.0, 10.0), (-10.0, 10.0)),
    "div": (operator.truediv, (-10.0, 10.0), (0.5, 4.0)),
}


def random_intervals(rng: np.random.Generator, bounds: tuple[float, float], size: int) -> IntervalArray:
    low, high = bounds
    lo = rng.uniform(low, high, size)
    width = rng.exponential(0.1 * (high - low), size) * (rng.uniform(size=size) > 0.1)
    return IntervalArray(lo, np.minimum(lo + width, high))


def sample(rng: np.random.Generator, x: IntervalArray) -> np.ndarray:
    return np.clip(x.lo + rng.uniform(size=x.shape) * (x.hi - x.lo), x.lo, x.hi)


def assert_encloses(result: IntervalArray, exact: list[Any]) -> None:
    with mpmath.workprec(200):
        missed = [i for i, value in enumerate(exact) if not mpmath.mpf(result.lo[i]) <= value <= mpmath.mpf(result.hi[i])]
    assert not missed, f"{len(missed)} enclosures missed, first at {missed[0]}"


def check_unary(name: str, rng: np.random.Generator, cases: int) -> None:
    method, exact_fn, bounds = UNARY[name]
    x = random_intervals(rng, bounds, cases)
    result = method(x)
    for points in (x.lo, x.hi, sample(rng, x)):
        with mpmath.workprec(200):
            exact = [exact_fn(mpmath.mpf(float(t))) for t in points]
        assert_encloses(result, exact)


def check_binary(name: str, rng: np.random.Generator, cases: int) -> None:
    op, left, right = BINARY[name]
    a = random_intervals(rng, left, cases)
    b = random_intervals(rng, right, cases)
    result = op(a, b)
    for s, t in ((a.lo, b.hi), (a.hi, b.lo), (sample(rng, a), sample(rng, b))):
        with mpmath.workprec(200):
            exact = [op(mpmath.mpf(float(u)), mpmath.mpf(float(v))) for u, v in zip(s, t, strict=True)]
        assert_encloses(result, exact)


@pytest.mark.parametrize("name", list(UNARY))
def test_unary_enclosures(name: str, rng: np.random.Generator) -> None:
    check_unary(name, rng, CASES)


@pytest.mark.parametrize("name", list(BINARY))
def test_binary_enclosures(name: str, rng: np.random.Generator) -> None:
    check_binary(name, rng, CASES)


@pytest.mark.slow
@pytest.mark.parametrize("name", [*UNARY, *BINARY])
def test_enclosures_at_scale(name: str, rng: np.random.Generator) -> None:
    check: Callable[[str, np.random.Generator, int], None] = check_unary if name in UNARY else check_binary
    check(name, rng, 100000)


def test_periodic_extrema_are_included() -> None:
    x = IntervalArray([1.0, 3.0, 0.0], [2.0, 3.5, 7.0])
    result = x.sin()
    assert result.hi[0] == 1.0
    assert result.lo[1] <= np.sin(3.5)
    assert (result.lo[2], result.hi[2]) == (-1.0, 1.0)
    assert x.cos().lo[1] == -1.0


def test_pi_enclosure() -> None:
    with mpmath.workprec(200):
        assert mpmath.mpf(PI.lower) < mpmath.pi < mpmath.mpf(PI.upper)
    assert PI.upper - PI.lower == np.spacing(np.pi)


@pytest.mark.parametrize(
    "operation",
    [
        pytest.param(lambda: IntervalArray(1.5, 1.7).tan(), id="tan-pole"),
        pytest.param(lambda: IntervalArray(0.0, 4.0).tan(), id="tan-wide"),
        pytest.param(lambda: IntervalArray(-1.0, 1.0).log(), id="log-nonpositive"),
        pytest.param(lambda: 1.0 / IntervalArray(-1.0, 1.0), id="division-by-zero"),
        pytest.param(lambda: IntervalArray(-2.0, -1.0).sqrt(), id="sqrt-negative"),
        pytest.param(lambda: IntervalArray(1.5, 2.0).arccos(), id="arccos-outside"),
        pytest.param(lambda: IntervalArray(2.0, 1.0), id="reversed-endpoints"),
        pytest.param(lambda: IntervalArray(np.nan), id="nan"),
    ],
)
def test_interval_errors(operation: Callable[[], object]) -> None:
    with pytest.raises(IntervalError):
        operation()


def test_matmul_encloses_sampled_products(rng: np.random.Generator) -> None:
    size = 8
    centre = rng.standard_normal((size, size))
    a = IntervalArray.enclose(centre, np.full((size, size), 1e-10))
    b = rng.standard_normal((size, 3))
    product = interval_matmul(a, b)
    assert (a @ b).shape == (size, 3)
    for _ in range(20):
        point = sample(rng, a)
        with mpmath.workprec(200):
            exact = [
                mpmath.fsum(mpmath.mpf(float(point[i, k])) * mpmath.mpf(float(b[k, j])) for k in range(size))
                for i in range(size)
                for j in range(3)
            ]
        flat = IntervalArray(product.lo.reshape(-1), product.hi.reshape(-1))
        assert_encloses(flat, exact)


def test_matmul_of_points_is_tight(rng: np.random.Generator) -> None:
    m = rng.standard_normal((32, 32))
    product = IntervalArray.point(m) @ m
    assert product.max_width < 1e-12
    assert np.all(product.contains(m @ m))


def test_scalar_helpers() -> None:
    x = IntervalScalar(1.0, 2.0)
    assert 1.5 in x
    assert 2.5 not in x
    assert float(x) == 1.5
    assert "lower=1.0" in repr(x)
    assert (x * x).lo <= 1.0


def test_dual_dispatch_on_intervals() -> None:
    x = IntervalArray(0.1, 0.2)
    enclosure = dual.sin(x)
    assert isinstance(enclosure, IntervalArray)
    assert enclosure.lo <= np.sin(0.1)
    assert enclosure.hi >= np.sin(0.2)
    slope = dual.derivative(dual.sin)(x)
    assert slope.lo <= np.cos(0.2)
    assert slope.hi >= np.cos(0.1)
