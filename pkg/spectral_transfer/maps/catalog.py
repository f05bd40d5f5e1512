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
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from thefuzz import fuzz  # type: ignore[reportMissingStubFile]

from spectral_transfer.errors import CatalogLookupError, MapSemanticError

from . import MarkovMap
from .expression import parse_document

if TYPE_CHECKING:
    from collections.abc import Callable

__all__ = (
    "CATALOG",
    "CatalogEntry",
    "available",
    "definition_text",
    "lookup",
)

LOGGER = logging.getLogger(__name__)

_NAME = re.compile(r"^(?P<name>[a-z][a-z0-9\-]*)(?:\((?P<arg>[^)]*)\))?(?P<rest>.*)$")

# Smallest M with 2^(-33M/8) below double machine epsilon.
NONANALYTIC_TERMS = math.ceil(52 * 8 / 33)


@dataclass(frozen=True, slots=True)
class CatalogEntry:
    """A built-in map: how to write its definition and which constants are known exactly.

    Parameters
    ----------
    name: :class:`str`
        The catalog name.
    text: :class:`Callable`
        Builds the definition document from the parsed parameters.
    constants: :class:`Callable`
        Returns the analytically known constants (user units) for the parameters.
    params: :class:`tuple[str, ...]`
        Accepted ``key=value`` parameters; the first may be given positionally, ``tupling(4)``.
    flags: :class:`tuple[str, ...]`
        Accepted bare words, ``linear``.

    """

    name: str
    text: Callable[[dict[str, float]], str]
    constants: Callable[[dict[str, float]], dict[str, float]]
    params: tuple[str, ...] = ()
    flags: tuple[str, ...] = ()
    defaults: dict[str, float] = field(default_factory=dict)


def _lanford(_: dict[str, float]) -> str:
    return (
        "# f(x) = 2x + x(1-x)/2 mod 1\n"
        "domain interval 0 1\n"
        "branch [0, (5 - sqrt(17))/2] expr 5*x/2 - x^2/2 deriv 5/2 - x\n"
        "branch [(5 - sqrt(17))/2, 1] expr 5*x/2 - x^2/2 - 1 deriv 5/2 - x\n"
    )


def _circle(params: dict[str, float]) -> str:
    return f"domain periodic 0 (2*pi)\nlift {params['k']!r}*x deriv {params['k']!r}\n"


def _tupling(params: dict[str, float]) -> str:
    k = int(params["k"])
    lines = ["domain interval -1 1"]
    for i in range(k):
        lines.append(f"branch [-1 + 2*{i}/{k}, -1 + 2*{i + 1}/{k}] expr {k}*x + {k - 2 * i - 1} deriv {k}")
    return "\n".join(lines) + "\n"


def _pwlinear(params: dict[str, float]) -> str:
    s = params["s"]
    if not s > 1.0:
        raise MapSemanticError("pwlinear needs a first slope above 1, got %s", s)
    return (
        "domain interval -1 1\n"
        f"branch [-1, -1 + 2/{s!r}] expr {s!r}*(x + 1) - 1 deriv {s!r}\n"
        f"branch [-1 + 2/{s!r}, 1] expr ({s!r}/({s!r} - 1))*(x - 1) + 1 deriv {s!r}/({s!r} - 1)\n"
    )


def _nonanalytic(_: dict[str, float]) -> str:
    terms = " + ".join(f"{2.0 ** (-33 * m / 8)!r}*cos({2**m}*(1 - cos(x/3)))" for m in range(NONANALYTIC_TERMS + 1))
    return f"domain periodic 0 (2*pi)\ninvlift 3 x/3 + {terms}\n"


def _linear_constants(slope: Callable[[dict[str, float]], float]) -> Callable[[dict[str, float]], dict[str, float]]:
    def constants(params: dict[str, float]) -> dict[str, float]:
        return {"lam": slope(params), "c1": 0.0}

    return constants


CATALOG: dict[str, CatalogEntry] = {
    entry.name: entry
    for entry in (
        CatalogEntry("lanford", _lanford, lambda _: {"lam": 1.5, "c1": 4.0 / 9.0}),
        CatalogEntry("doubling", lambda _: _circle({"k": 2}), lambda _: {"lam": 2.0, "c1": 0.0}),
        CatalogEntry("circle", _circle, _linear_constants(lambda p: p["k"]), params=("k",), flags=("linear",), defaults={"k": 3}),
        CatalogEntry("tupling", _tupling, _linear_constants(lambda p: p["k"]), params=("k",)),
        CatalogEntry(
            "pwlinear",
            _pwlinear,
            _linear_constants(lambda p: min(p["s"], p["s"] / (p["s"] - 1.0))),
            params=("s",),
            defaults={"s": 3},
        ),
        CatalogEntry("nonanalytic-g", _nonanalytic, lambda _: {}),
    )
}


def available() -> list[str]:
    """The catalog names, in registration order."""
    return list(CATALOG)


def _suggest(query: str, match: int = 60) -> list[str]:
    suggestions: list[tuple[int, str]] = []
    for name in CATALOG:
        ratio: int = fuzz.partial_ratio(s1=name, s2=query.lower())  # pyright: ignore[reportUnknownMemberType]
        LOGGER.debug("<%s> | Searching... | name: %s | ratio: %s | query: %s", "_suggest", name, ratio, query)
        if ratio >= match:
            suggestions.append((ratio, name))
    return [name for _, name in sorted(suggestions, reverse=True)]


def _parse_name(query: str) -> tuple[CatalogEntry, dict[str, float]]:
    found = _NAME.match(query.strip().lower())
    if found is None or found["name"] not in CATALOG:
        raise CatalogLookupError(query, _suggest(found["name"] if found else query))
    entry = CATALOG[found["name"]]
    params = dict(entry.defaults)
    words = found["rest"].split()
    if found["arg"] is not None:
        if not entry.params:
            raise MapSemanticError("catalog map %s takes no parameters", entry.name)
        words.insert(0, f"{entry.params[0]}={found['arg'].strip()}")
    for word in words:
        if word in entry.flags:
            continue
        key, sep, value = word.partition("=")
        if not sep or key not in entry.params:
            raise MapSemanticError("catalog map %s does not accept %r", entry.name, word)
        try:
            params[key] = float(value)
        except ValueError:
            raise MapSemanticError("catalog parameter %s must be a number, got %r", key, value) from None
    missing = [key for key in entry.params if key not in params]
    if missing:
        raise MapSemanticError("catalog map %s needs %s", entry.name, ", ".join(missing))
    if "k" in params and (params["k"] != int(params["k"]) or params["k"] < 2):
        raise MapSemanticError("k must be an integer of at least 2, got %s", params["k"])
    return entry, params


def definition_text(query: str) -> str:
    """The definition document a catalog name expands to."""
    entry, params = _parse_name(query)
    return entry.text(params)


def lookup(query: str) -> MarkovMap:
    """Resolve a catalog name, such as ``lanford`` or ``circle k=3 linear``, into a map.

    Constants that are known in closed form are attached as user-supplied values; the rest are
    estimated on a grid.

    Raises
    ------
    CatalogLookupError
        No catalog map has this name; the error carries the closest names.
    MapSemanticError
        Unknown or malformed parameters.

    """
    entry, params = _parse_name(query)
    markov_map = MarkovMap.from_document(parse_document(entry.text(params)), name=query.strip(), catalog_key=entry.name)
    known = entry.constants(params)
    LOGGER.info("<%s> | Resolved catalog map | name: %s | params: %s | exact constants: %s", "lookup", entry.name, params, known)
    return markov_map.with_constants(**known) if known else markov_map
