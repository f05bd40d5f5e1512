from __future__ import annotations

import pytest

from spectral_transfer._enums import DomainKind
from spectral_transfer.errors import CatalogLookupError, MapSemanticError
from spectral_transfer.maps import MarkovMap, parse_map_definition
from spectral_transfer.maps.catalog import available, definition_text, lookup


def test_available_names() -> None:
    assert available() == ["lanford", "doubling", "circle", "tupling", "pwlinear", "nonanalytic-g"]


@pytest.mark.parametrize(
    ("query", "kind", "beta", "lam"),
    [
        ("doubling", DomainKind.periodic, 2, 2.0),
        ("circle k=3 linear", DomainKind.periodic, 3, 3.0),
        ("circle", DomainKind.periodic, 3, 3.0),
        ("tupling(4)", DomainKind.interval, 4, 4.0),
        ("pwlinear s=3", DomainKind.interval, 2, 1.5),
        ("Lanford", DomainKind.interval, 2, 1.5),
    ],
)
def test_lookup(query: str, kind: DomainKind, beta: int, lam: float) -> None:
    markov_map = lookup(query)
    assert markov_map.domain.kind is kind
    assert markov_map.beta == beta
    assert markov_map.constants.lam == pytest.approx(lam)
    assert markov_map.constants.is_user_supplied("lam", "c1")


def test_nonanalytic_constants_are_estimated(nonanalytic: MarkovMap) -> None:
    assert nonanalytic.catalog_key == "nonanalytic-g"
    assert not nonanalytic.constants.is_user_supplied("lam")
    assert nonanalytic.constants.lam > 1.0


def test_parse_map_definition_accepts_names_and_documents() -> None:
    by_name = parse_map_definition("doubling")
    by_text = parse_map_definition(definition_text("doubling"))
    assert by_name.catalog_key == "doubling"
    assert by_text.catalog_key is None
    assert by_text.beta == by_name.beta


def test_unknown_name_suggests_close_matches() -> None:
    with pytest.raises(CatalogLookupError) as info:
        lookup("lanfrod")
    assert "lanford" in info.value.suggestions


@pytest.mark.parametrize(
    "query",
    [
        pytest.param("tupling", id="missing-parameter"),
        pytest.param("tupling(1)", id="degree-too-small"),
        pytest.param("circle k=2.5", id="fractional-degree"),
        pytest.param("doubling(3)", id="no-parameters"),
        pytest.param("circle q=3", id="unknown-parameter"),
        pytest.param("pwlinear s=1", id="slope-not-expanding"),
        pytest.param("pwlinear s=abc", id="not-a-number"),
    ],
)
def test_bad_parameters(query: str) -> None:
    with pytest.raises(MapSemanticError):
        lookup(query)


def test_tupling_chebyshev_expansion() -> None:
    constants = lookup("tupling(4)").constants
    assert constants.lam == pytest.approx(4.0)
    assert constants.lam_check is not None
    assert constants.lam_check == pytest.approx(2.0, rel=1e-3)
