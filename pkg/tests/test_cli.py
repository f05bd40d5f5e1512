from __future__ import annotations

import csv
import json
import math
from typing import TYPE_CHECKING, Any

import pytest

from spectral_transfer.cli import RunConfig, build_parser, main
from spectral_transfer.errors import ConfigurationError
from spectral_transfer.maps.catalog import definition_text

from .conftest import LANFORD_DIFFUSION, LANFORD_LYAPUNOV

if TYPE_CHECKING:
    from pathlib import Path


def run(tmp_path: Path, *argv: str) -> tuple[int, dict[str, Any], list[dict[str, str]]]:
    report = tmp_path / "report.json"
    table = tmp_path / "table.csv"
    code = main([*argv, "--threads", "1", "--deterministic", "--output", str(report), "--csv", str(table)])
    if code != 0:
        return code, {}, []
    with table.open(encoding="utf-8", newline="") as file:
        rows = list(csv.DictReader(file))
    return code, json.loads(report.read_text(encoding="utf-8")), rows


def test_acim_report(tmp_path: Path) -> None:
    code, data, rows = run(tmp_path, "acim", "lanford")
    assert code == 0
    assert data["map"] == "lanford"
    assert data["mode"] == "adaptive"
    assert data["basis"] == "chebyshev"
    assert data["quantities"]["integral"] == pytest.approx(1.0, abs=1e-14)
    assert "timings" not in data
    assert data["constants"]["lam"] == pytest.approx(1.5)
    assert len(rows) == data["order"]
    assert float(rows[0]["coefficient"]) > 0.0


def test_fixed_order_mode(tmp_path: Path) -> None:
    code, data, rows = run(tmp_path, "acim", "doubling", "--order", "16")
    assert code == 0
    assert data["mode"] == "fixed"
    assert data["order"] == 16
    assert float(rows[0]["coefficient"]) == pytest.approx(1.0 / (2.0 * math.pi), abs=1e-14)


def test_lyapunov_and_diffusion(tmp_path: Path) -> None:
    code, data, _ = run(tmp_path, "lyapunov", "lanford")
    assert code == 0
    assert data["quantities"]["lyapunov"] == pytest.approx(LANFORD_LYAPUNOV, abs=1e-12)
    code, data, _ = run(tmp_path, "diffusion", "lanford", "--obs", "x^2")
    assert code == 0
    assert data["quantities"]["diffusion"] == pytest.approx(LANFORD_DIFFUSION, abs=1e-12)


def test_resolvent_removes_the_mean(tmp_path: Path) -> None:
    code, data, rows = run(tmp_path, "resolvent", "doubling", "--obs", "1 + cos(x)")
    assert code == 0
    assert data["quantities"]["mean_removed"] == pytest.approx(1.0)
    assert float(rows[1]["coefficient"]) == pytest.approx(1.0, abs=1e-12)


def test_map_file(tmp_path: Path) -> None:
    path = tmp_path / "doubling.map"
    path.write_text(definition_text("doubling"), encoding="utf-8")
    code, data, _ = run(tmp_path, "lyapunov", "--map-file", str(path), "--lambda", "2", "--C1", "0")
    assert code == 0
    assert data["quantities"]["lyapunov"] == pytest.approx(math.log(2.0), abs=1e-13)


def test_bounds_report(tmp_path: Path) -> None:
    code, data, rows = run(tmp_path, "bounds", "lanford", "--block", "16")
    assert code == 0
    assert data["violations"] == 0
    assert data["bound_case"] == "analytic"
    assert len(rows) == 16 * 16
    assert set(rows[0]) == {"j", "k", "entry", "bound", "ratio"}


def test_convergence_report(tmp_path: Path) -> None:
    code, data, rows = run(tmp_path, "convergence", "lanford", "--orders", "8", "16", "24")
    assert code == 0
    assert data["reference_order"] == 96
    errors = [row["error_linf"] for row in data["rows"]]
    assert errors[0] > errors[-1]
    assert [int(row["order"]) for row in rows] == [8, 16, 24]
    assert all(float(row["seconds"]) == 0.0 for row in rows)


def test_validate_report(tmp_path: Path) -> None:
    code, data, rows = run(tmp_path, "validate", "doubling", "--order", "16")
    assert code == 0
    assert data["order"] == 16
    assert set(data) >= {"eps_interval", "eps_finite", "eps_total", "dominated_by", "recommended_bits", "inputs"}
    low, high = data["quantities"]["lyapunov"]
    assert low <= math.log(2.0) <= high
    assert len(rows) == 16


@pytest.mark.parametrize(
    "argv",
    [
        pytest.param(("acim", "lanfrod"), id="unknown-map"),
        pytest.param(("acim",), id="no-map"),
        pytest.param(("acim", "lanford", "--tol", "1e-20"), id="tolerance-out-of-range"),
        pytest.param(("acim", "lanford", "--basis", "fourier"), id="basis-mismatch"),
        pytest.param(("diffusion", "lanford", "--obs", "x +"), id="bad-observable"),
        pytest.param(("validate", "nonanalytic-g"), id="estimated-constants"),
        pytest.param(("validate", "lanford", "--precision", "113"), id="precision"),
        pytest.param(("acim", "lanford", "--order", "3"), id="order-too-small"),
    ],
)
def test_input_errors_exit_2(tmp_path: Path, argv: tuple[str, ...]) -> None:
    code, _, _ = run(tmp_path, *argv)
    assert code == 2


def test_numerical_failure_exits_3(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code, _, _ = run(tmp_path, "validate", "doubling", "--order", "4", "--bsol", "1e300")
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err


def test_missing_map_file(tmp_path: Path) -> None:
    code, _, _ = run(tmp_path, "acim", "--map-file", str(tmp_path / "absent.map"))
    assert code == 2


def test_run_config_defaults() -> None:
    args = build_parser().parse_args(["bounds", "lanford"])
    config = RunConfig.from_args(args)
    assert config.report_path.name == "bounds.json"
    assert config.coefficients_path.name == "bounds.csv"
    assert config.block == 64
    with pytest.raises(ConfigurationError):
        RunConfig.from_args(build_parser().parse_args(["bounds", "lanford", "--threads", "0"]))


def test_input_error_messages(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code, _, _ = run(tmp_path, "acim", "lanfrod")
    assert code == 2
    err = capsys.readouterr().err
    assert "catalog map 'lanfrod'" in err
    assert "Did you mean:" in err
    assert "lanford" in err
    assert "%" not in err

    path = tmp_path / "broken.map"
    path.write_text("domain interval 0 1\nbranch [0, 1 expr x\n", encoding="utf-8")
    code, _, _ = run(tmp_path, "acim", "--map-file", str(path))
    assert code == 2
    err = capsys.readouterr().err
    assert "syntax error at line 2" in err
    assert "%" not in err
