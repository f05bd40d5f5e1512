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

from enum import Enum, IntEnum

__all__ = (
    "BasisKind",
    "BoundCase",
    "BudgetDominance",
    "Direction",
    "DomainKind",
    "ExitCode",
    "Provenance",
    "QuantityKind",
    "SolveMode",
)


class DomainKind(Enum):
    """The kind of phase space a map acts on.

    Parameters
    ----------
        periodic | canonical domain [0, 2π), Fourier basis.
        non_periodic | canonical domain [-1, 1], Chebyshev basis.

    """

    periodic = "periodic"
    non_periodic = "interval"


class BasisKind(Enum):
    """Spectral basis used for coefficient sequences.

    Parameters
    ----------
        fourier | real layout b_1 = 1, b_2m = cos(mθ), b_2m+1 = sin(mθ).
        chebyshev | b_k+1 = T_k.

    """

    fourier = "fourier"
    chebyshev = "chebyshev"


class Direction(Enum):
    """Which side of a branch the user expression describes."""

    forward = "forward"
    inverse = "inverse"


class Provenance(Enum):
    """Where a map constant came from; validated runs only accept `user_supplied`."""

    user_supplied = "user"
    grid_estimated = "grid"


class BoundCase(Enum):
    """Regularity case of an entry bound model."""

    analytic = "analytic"
    differentiable = "differentiable"


class SolveMode(Enum):
    """How a solution operator problem is discretised."""

    adaptive = "adaptive"
    fixed = "fixed"


class QuantityKind(Enum):
    """Statistics a validated run can enclose."""

    lyapunov = "lyapunov"
    diffusion = "diffusion"


class BudgetDominance(Enum):
    """Which part of a validated error budget is larger."""

    interval = "interval"
    truncation = "truncation"


class ExitCode(IntEnum):
    """CLI process exit status.

    Parameters
    ----------
        ok = 0 |
        input = 2 | parse, semantic or configuration errors.
        numerical = 3 | solver or certification failures.

    """

    ok = 0
    input = 2
    numerical = 3
