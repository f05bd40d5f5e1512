from __future__ import annotations

import pytest

from spectral_transfer.errors import (
    CatalogLookupError,
    CertificationError,
    ConfigurationError,
    ConvergenceError,
    MapSemanticError,
    MapSyntaxError,
    SingularOperatorError,
)


@pytest.mark.parametrize(
    ("error", "text"),
    [
        pytest.param(MapSyntaxError(3, 7, ["RSQB", "COMMA"]), "line 3, column 7 | Expected one of: COMMA, RSQB", id="syntax"),
        pytest.param(CatalogLookupError("dubling", ["doubling"]), "catalog map 'dubling' | Did you mean: doubling", id="catalog"),
        pytest.param(CatalogLookupError("zzz", []), "Did you mean: nothing similar", id="catalog-empty"),
        pytest.param(ConvergenceError("adaptive solve", 4096, 1e-14), "adaptive solve failed to converge within 4096", id="convergence"),
        pytest.param(SingularOperatorError(16, 0.0), "Order: 16 | Smallest pivot: 0.0", id="singular"),
        pytest.param(CertificationError("residual %s exceeds %s", 0.5, 0.1), "residual 0.5 exceeds 0.1", id="certification"),
        pytest.param(CertificationError("100% wide"), "100% wide", id="no-values"),
        pytest.param(MapSemanticError("x in constant %s", "[0, x]"), "x in constant [0, x]", id="semantic"),
        pytest.param(ConfigurationError("--tol", "too small"), "--tol: too small", id="configuration"),
    ],
)
def test_messages_are_formatted(error: Exception, text: str) -> None:
    assert text in str(error)
    assert "%s" not in str(error)
