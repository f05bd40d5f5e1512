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

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from ._enums import BasisKind, ExitCode, QuantityKind, SolveMode
from .errors import BoundModelError, ConfigurationError, MapInputError, SpectralNumericalError
from .maps import MarkovMap, parse_map_definition
from .maps.catalog import available
from .maps.expression import parse_expression
from .solver import (
    DEFAULT_TOLERANCE,
    SolutionProblem,
    SolveReport,
    birkhoff_variance,
    lyapunov,
    observable,
    solve,
    solve_fixed,
)
from .spectral import SpectralFunction, bv_seminorm_upper_function, integrate, write_csv
from .transfer import (
    EntryBoundModel,
    TransferColumnSet,
    default_entry_model,
    domination_violations,
    entry_bound_analytic,
    truncation_bound,
)
from .validated import validate, validated_quantity

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from ._types import ConvergenceRow

__all__ = (
    "RunConfig",
    "build_parser",
    "cmd_acim",
    "cmd_bounds",
    "cmd_convergence",
    "cmd_diffusion",
    "cmd_lyapunov",
    "cmd_resolvent",
    "cmd_validate",
    "main",
)

LOGGER = logging.getLogger(__name__)

TOLERANCE_RANGE = (1e-15, 1e-2)
DEFAULT_ORDERS = (16, 24, 32, 48, 64)
DEFAULT_BLOCK = 64
DEFAULT_VALIDATED_ORDER = 64
REFERENCE_FACTOR = 4


@dataclass(slots=True)
class RunConfig:
    """Everything one CLI invocation needs, validated on construction.

    Raises
    ------
    ConfigurationError
        Both or neither map source, a tolerance outside [1e-15, 1e-2], a nonpositive thread
        count or an order below 4.

    """

    command: str
    map_name: str | None = None
    map_file: Path | None = None
    tolerance: float = DEFAULT_TOLERANCE
    order: int | None = None
    basis: BasisKind | None = None
    observable: str | None = None
    orders: tuple[int, ...] = DEFAULT_ORDERS
    block: int = DEFAULT_BLOCK
    b_sol: float | None = None
    zeta: float | None = None
    delta: float | None = None
    lam: float | None = None
    c1: float | None = None
    precision: int = 53
    threads: int = 1
    deterministic: bool = False
    output: Path | None = None
    csv_path: Path | None = None
    verbose: int = 0

    def __post_init__(self) -> None:
        if (self.map_name is None) == (self.map_file is None):
            raise ConfigurationError("map", "give exactly one of a catalog name or --map-file")
        if not TOLERANCE_RANGE[0] <= self.tolerance <= TOLERANCE_RANGE[1]:
            raise ConfigurationError("--tol", f"must lie in [{TOLERANCE_RANGE[0]:g}, {TOLERANCE_RANGE[1]:g}], got {self.tolerance:g}")
        if self.threads < 1:
            raise ConfigurationError("--threads", f"must be positive, got {self.threads}")
        if self.order is not None and self.order < 4:
            raise ConfigurationError("--order", f"must be at least 4, got {self.order}")
        if any(order < 4 for order in self.orders):
            raise ConfigurationError("--orders", "every order must be at least 4")
        if self.block < 1:
            raise ConfigurationError("--block", f"must be positive, got {self.block}")

    @property
    def mode(self) -> SolveMode:
        return SolveMode.fixed if self.order is not None else SolveMode.adaptive

    @property
    def report_path(self) -> Path:
        return self.output or Path(f"{self.command}.json")

    @property
    def coefficients_path(self) -> Path:
        return self.csv_path or Path(f"{self.command}.csv")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        return cls(
            command=args.command,
            map_name=args.map,
            map_file=args.map_file,
            tolerance=args.tol,
            order=args.order,
            basis=BasisKind(args.basis) if args.basis else None,
            observable=args.obs,
            orders=tuple(args.orders) if args.orders else DEFAULT_ORDERS,
            block=args.block,
            b_sol=args.bsol,
            zeta=args.zeta,
            delta=args.delta,
            lam=args.lam,
            c1=args.C1,
            precision=args.precision,
            threads=args.threads,
            deterministic=args.deterministic,
            output=args.output,
            csv_path=args.csv,
            verbose=args.verbose,
        )

    def load_map(self) -> MarkovMap:
        """Parse the map source and apply constant overrides."""
        if self.map_file is not None:
            try:
                text = self.map_file.read_text(encoding="utf-8")
            except OSError as e:
                raise ConfigurationError("--map-file", str(e)) from None
        else:
            assert self.map_name is not None
            text = self.map_name
        markov_map = parse_map_definition(text)
        if self.basis is not None and self.basis is not markov_map.basis:
            kind = markov_map.domain.kind.value
            raise ConfigurationError("--basis", f"{markov_map.name} lives on a {kind} domain and needs {markov_map.basis.value}")
        overrides = {name: value for name, value in (("lam", self.lam), ("c1", self.c1)) if value is not None}
        return markov_map.with_constants(**overrides) if overrides else markov_map

    def observable_function(self, markov_map: MarkovMap) -> SpectralFunction:
        if self.observable is None:
            raise ConfigurationError("--obs", f"the {self.command} command needs an observable")
        return observable(markov_map, parse_expression(self.observable), self.tolerance)

    def entry_model(self, markov_map: MarkovMap) -> EntryBoundModel:
        """The entry bound model from --zeta/--delta, or the catalog's model."""
        if self.zeta is not None or self.delta is not None:
            delta = self.delta if self.delta is not None else self.zeta
            assert delta is not None
            return entry_bound_analytic(markov_map, delta=delta, zeta=self.zeta)
        model = default_entry_model(markov_map)
        if model is None:
            raise BoundModelError("no entry bound model is known for %s; pass --zeta or --delta", markov_map.name)
        return model


def _write_json(data: Any, path: Path) -> Path:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    LOGGER.debug("<%s> | Wrote report | path: %s", "_write_json", path)
    return path


def _write_rows(rows: Sequence[dict[str, Any]], header: Sequence[str], path: Path) -> Path:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(header))
        writer.writeheader()
        writer.writerows(rows)
    LOGGER.debug("<%s> | Wrote table | path: %s | rows: %s", "_write_rows", path, len(rows))
    return path


def _summary(**values: Any) -> None:
    sys.stdout.write(" | ".join(f"{key}: {value}" for key, value in values.items()) + "\n")


def _acim_report(config: RunConfig, markov_map: MarkovMap) -> SolveReport:
    markov_map.constants.require_expanding(markov_map.domain.kind)
    problem = SolutionProblem.for_acim(markov_map, threads=config.threads)
    return solve(problem, config.mode, tolerance=config.tolerance, order=config.order)


def _finish(config: RunConfig, markov_map: MarkovMap, report: SolveReport, quantities: dict[str, float]) -> int:
    data = report.to_dict(markov_map.name, quantities, deterministic=config.deterministic)
    data_out: dict[str, Any] = dict(data)
    data_out["constants"] = markov_map.constants.to_dict()
    _write_json(data_out, config.report_path)
    write_csv(report.solution, config.coefficients_path)
    _summary(map=markov_map.name, order=report.order, **quantities)
    return ExitCode.ok


def cmd_acim(config: RunConfig) -> int:
    """Invariant density; writes the report and the coefficients."""
    markov_map = config.load_map()
    report = _acim_report(config, markov_map)
    return _finish(config, markov_map, report, {"integral": integrate(report.solution)})


def cmd_lyapunov(config: RunConfig) -> int:
    """Lyapunov exponent ``∫ log|f'| ρ``."""
    markov_map = config.load_map()
    report = _acim_report(config, markov_map)
    return _finish(config, markov_map, report, {"lyapunov": lyapunov(markov_map, report.solution)})


def cmd_diffusion(config: RunConfig) -> int:
    """Diffusion coefficient of the observable given by --obs."""
    markov_map = config.load_map()
    a = config.observable_function(markov_map)
    report = _acim_report(config, markov_map)
    value = birkhoff_variance(markov_map, a, report.solution, config.mode, tolerance=config.tolerance, order=config.order)
    return _finish(config, markov_map, report, {"diffusion": value})


def cmd_resolvent(config: RunConfig) -> int:
    """``𝓢φ`` for the observable given by --obs, shifted to zero mean first."""
    markov_map = config.load_map()
    markov_map.constants.require_expanding(markov_map.domain.kind)
    phi = config.observable_function(markov_map)
    mean = integrate(phi) / markov_map.domain.length
    if mean != 0.0:
        LOGGER.info("<%s> | Subtracting the mean of the input | mean: %s", "cmd_resolvent", mean)
        phi = phi - SpectralFunction.constant(phi.basis, mean)
    problem = SolutionProblem.for_resolvent(markov_map, phi, threads=config.threads)
    order = max(config.order, len(phi)) if config.order is not None else None
    report = solve(problem, config.mode, tolerance=config.tolerance, order=order)
    return _finish(config, markov_map, report, {"mean_removed": mean})


def cmd_bounds(config: RunConfig) -> int:
    """Compare the leading block of the transfer matrix with the entry bound model.

    Entries come from an assembly at twice the block size, so aliasing is negligible next to
    the slack ``1 + 1e-8`` allowed before an entry counts as a violation. Ratios are reported
    only for entries above the rounding floor of their column.
    """
    markov_map = config.load_map()
    model = config.entry_model(markov_map)
    size = config.block
    started = time.perf_counter()
    order = max(2 * size, 8)
    block = TransferColumnSet(markov_map, threads=config.threads).assemble(order)[:size, :size]
    violations, bounds, floor = domination_violations(block, model, order)
    magnitude = np.abs(block)
    ratio = np.divide(magnitude, bounds, out=np.zeros_like(magnitude), where=(bounds > 0) & (magnitude > floor))
    table = [
        {"j": int(j), "k": int(k), "entry": repr(float(block[j, k])), "bound": repr(float(bounds[j, k])), "ratio": repr(float(ratio[j, k]))}
        for j in range(size)
        for k in range(size)
    ]
    _write_rows(table, ("j", "k", "entry", "bound", "ratio"), config.coefficients_path)
    data: dict[str, Any] = {
        "map": markov_map.name,
        "basis": markov_map.basis.value,
        "block": size,
        "bound_case": model.case.value,
        "violations": violations,
        "max_ratio": float(np.max(ratio)),
        "truncation_bound": truncation_bound(model, size),
    }
    if not config.deterministic:
        data["timings"] = {"total": time.perf_counter() - started}
    _write_json(data, config.report_path)
    _summary(map=markov_map.name, block=size, violations=violations, max_ratio=data["max_ratio"])
    return ExitCode.ok


def _difference(reference: SpectralFunction, approximation: SpectralFunction) -> SpectralFunction:
    size = max(len(reference), len(approximation))
    return reference.resized(size) - approximation.resized(size)


def cmd_convergence(config: RunConfig) -> int:
    """Errors of fixed-order solves against a reference at four times the largest order."""
    markov_map = config.load_map()
    markov_map.constants.require_expanding(markov_map.domain.kind)
    orders = sorted(set(config.orders))
    problem = SolutionProblem.for_acim(markov_map, threads=config.threads)
    reference = solve_fixed(problem, REFERENCE_FACTOR * orders[-1]).solution
    rows: list[ConvergenceRow] = []
    for order in orders:
        started = time.perf_counter()
        solution = solve_fixed(problem, order).solution
        seconds = 0.0 if config.deterministic else time.perf_counter() - started
        error = _difference(reference, solution)
        rows.append(
            {
                "order": order,
                "error_linf": float(np.max(np.abs(error.coeffs))),
                "error_bv": bv_seminorm_upper_function(error),
                "seconds": seconds,
            },
        )
        LOGGER.info("<%s> | Order done | order: %s | error: %s", "cmd_convergence", order, rows[-1]["error_linf"])
    _write_rows([dict(row) for row in rows], ("order", "error_linf", "error_bv", "seconds"), config.coefficients_path)
    _write_json(
        {"map": markov_map.name, "reference_order": REFERENCE_FACTOR * orders[-1], "rows": [dict(row) for row in rows]},
        config.report_path,
    )
    _summary(map=markov_map.name, orders=orders, final_error=rows[-1]["error_linf"])
    return ExitCode.ok


def cmd_validate(config: RunConfig) -> int:
    """Certified density, Lyapunov exponent and (with --obs) diffusion coefficient."""
    markov_map = config.load_map()
    if not markov_map.constants.is_user_supplied("lam", "c1"):
        raise ConfigurationError("constants", "validated runs need --lambda and --C1 unless the catalog knows them exactly")
    model = config.entry_model(markov_map)
    result = validate(
        markov_map,
        config.order or DEFAULT_VALIDATED_ORDER,
        b_sol=config.b_sol,
        model=model,
        precision=config.precision,
        threads=config.threads,
    )
    quantities = {QuantityKind.lyapunov.value: validated_quantity(result, QuantityKind.lyapunov, markov_map)}
    if config.observable is not None:
        a = config.observable_function(markov_map)
        quantities[QuantityKind.diffusion.value] = validated_quantity(result, QuantityKind.diffusion, markov_map, a)
    _write_json(result.certificate(markov_map.name, quantities, deterministic=config.deterministic), config.report_path)
    write_csv(result.midpoint, config.coefficients_path)
    _summary(
        map=markov_map.name,
        order=result.order,
        eps_total=result.eps_total,
        **{name: f"[{value.lower!r}, {value.upper!r}]" for name, value in quantities.items()},
    )
    return ExitCode.ok


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "acim": cmd_acim,
    "lyapunov": cmd_lyapunov,
    "diffusion": cmd_diffusion,
    "resolvent": cmd_resolvent,
    "bounds": cmd_bounds,
    "convergence": cmd_convergence,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    """The argument parser; every subcommand shares the same options."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("map", nargs="?", default=None, help=f"Catalog map name, one of: {', '.join(available())}.")
    common.add_argument("--map-file", type=Path, default=None, help="Read the map definition from this file instead.")
    common.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE, help=f"Adaptive tolerance (default: {DEFAULT_TOLERANCE:g}).")
    common.add_argument("--order", type=int, default=None, help="Fixed spectral order; switches off adaptive mode.")
    common.add_argument("--basis", choices=[kind.value for kind in BasisKind], default=None, help="Assert the basis the map must use.")
    common.add_argument("--obs", default=None, help='Observable in the map expression grammar, e.g. "x^2".')
    common.add_argument("--orders", type=int, nargs="+", default=None, help=f"Orders for convergence (default: {DEFAULT_ORDERS}).")
    common.add_argument("--block", type=int, default=DEFAULT_BLOCK, help=f"Block size for bounds (default: {DEFAULT_BLOCK}).")
    common.add_argument("--bsol", type=float, default=None, help="Bound on the solution operator norm; a-priori bound by default.")
    common.add_argument("--zeta", type=float, default=None, help="Requested analytic decay rate.")
    common.add_argument("--delta", type=float, default=None, help="Half-width of the analytic strip.")
    common.add_argument("--lambda", dest="lam", type=float, default=None, help="User-supplied expansion constant.")
    common.add_argument("--C1", dest="C1", type=float, default=None, help="User-supplied distortion constant.")
    common.add_argument("--precision", type=int, default=53, help="Interval precision in bits; only 53 is available.")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="Worker threads (default: all cores).")
    common.add_argument("--deterministic", action="store_true", help="Leave timings out of reports.")
    common.add_argument("--output", type=Path, default=None, help="JSON report path (default: <command>.json).")
    common.add_argument("--csv", type=Path, default=None, help="CSV path (default: <command>.csv).")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logging.")
    parser = argparse.ArgumentParser(
        prog="spectral-transfer",
        description="Spectral Galerkin statistics for expanding Markov maps.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, handler in COMMANDS.items():
        commands.add_parser(name, parents=[common], help=(handler.__doc__ or "").splitlines()[0])
    return parser


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s [%(levelname)s] %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand and return its exit status: 0, 2 for input errors, 3 for numerical failures."""
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = RunConfig.from_args(args)
        return int(COMMANDS[config.command](config))
    except MapInputError as e:
        sys.stderr.write(f"error: {e}\n")
        return int(ExitCode.input)
    except SpectralNumericalError as e:
        sys.stderr.write(f"numerical failure: {e}\n")
        return int(ExitCode.numerical)
