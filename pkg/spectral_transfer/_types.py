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

from typing import NotRequired, TypedDict

__all__ = (
    "CertificateData",
    "ConstantsData",
    "ConvergenceRow",
    "EstimateParams",
    "ReportData",
    "SolveParams",
    "ValidateParams",
)


class SolveParams(TypedDict):
    tolerance: NotRequired[float]
    column_cap: NotRequired[int]
    max_interpolation_order: NotRequired[int]
    threads: NotRequired[int]


class EstimateParams(TypedDict):
    max_refinements: NotRequired[int]
    relative_change: NotRequired[float]


class ValidateParams(TypedDict):
    precision: NotRequired[int]
    threads: NotRequired[int]
    max_residual: NotRequired[float]


class ConstantsData(TypedDict):
    lam: float
    lam_check: float | None
    c1: float
    xi: float
    provenance: dict[str, str]
    grid_size: NotRequired[int]


class ReportData(TypedDict):
    map: str
    mode: str
    basis: str
    order: int
    quantities: dict[str, float]
    residuals: dict[str, float]
    column_orders: NotRequired[list[int]]
    timings: NotRequired[dict[str, float]]


class CertificateData(TypedDict):
    map: str
    order: int
    midpoint_coefficients: list[float]
    eps_interval: float
    eps_finite: float
    eps_total: float
    dominated_by: str
    recommended_bits: int
    inputs: dict[str, float | str]
    quantities: NotRequired[dict[str, list[float]]]
    timings: NotRequired[dict[str, float]]


class ConvergenceRow(TypedDict):
    order: int
    error_linf: float
    error_bv: float
    seconds: float
