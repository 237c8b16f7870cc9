"""Tests for the kura command line.

Tests verify:
- gen writes edge lists and JSON that read back to the same graph
- verify passes on eye graphs and fails on the degenerate 4-cycle
- Text reports and misses files carry the version and configuration echo
- scan tables with the stable interval around pi/2, in every format
- equilibria requires a seed and labels cataloged equilibria
- hetero writes the K4 digraph and its JSON companion
- Invalid input maps to exit code 2 with a JSON error record on stderr
- Flag validation in RunConfig, parse_angle and parse_grid
"""

import io
import json
import math
from pathlib import Path
from typing import Any, Dict

import pandas as pd
import pytest
from click.testing import CliRunner, Result
from pydantic import ValidationError

from cli.config import RunConfig, parse_angle, parse_grid
from cli.main import EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_OK, cli
from data_store.store import read_parquet_header
from kuramoto_tori import __version__
from kuramoto_tori.graphs import Cycle, generate, parse_edge_list

PI = math.pi


@pytest.fixture
def runner() -> CliRunner:
    """Click test runner."""
    return CliRunner()


def _error(result: Result) -> Dict[str, Any]:
    """Last stderr line parsed as the JSON error record."""
    lines = [line for line in result.stderr.splitlines() if line.strip()]
    return dict(json.loads(lines[-1]))


# =============================================================================
# gen
# =============================================================================


def test_gen_edge_list(runner: CliRunner) -> None:
    """Comment header, then an edge list that parses back."""
    result = runner.invoke(cli, ["gen", "--graph", "cycle:4"])
    assert result.exit_code == EXIT_OK
    lines = result.stdout.splitlines()
    assert lines[0] == "# kura 0.1.0"
    assert lines[1] == "# graph: cycle:4"
    assert parse_edge_list(result.stdout) == generate(Cycle(4))


def test_gen_json(runner: CliRunner) -> None:
    """JSON form carries the family, n and the edges."""
    result = runner.invoke(cli, ["gen", "--graph", "eye:2", "--format", "json"])
    assert result.exit_code == EXIT_OK
    data = json.loads(result.stdout)
    assert data["family"] == {"family": "eye", "d": 2}
    assert data["n"] == 12
    assert len(data["edges"]) == 16
    assert data["meta"]["tool"] == "kura"


def test_gen_to_file_is_deterministic(runner: CliRunner, tmp_path: Path) -> None:
    """Two runs that differ only in their destination write identical files."""
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert runner.invoke(cli, ["gen", "--graph", "h36", "--out", str(a)]).exit_code == EXIT_OK
    assert runner.invoke(cli, ["gen", "--graph", "h36", "--out", str(b)]).exit_code == EXIT_OK
    assert a.read_text() == b.read_text()


def test_gen_unknown_family(runner: CliRunner) -> None:
    """Unknown families exit 2 with a GraphError record."""
    result = runner.invoke(cli, ["gen", "--graph", "triangle:3"])
    assert result.exit_code == EXIT_INVALID
    record = _error(result)
    assert record["error"] == "GraphError"
    assert record["command"] == "gen"


def test_gen_bad_format(runner: CliRunner) -> None:
    """Formats are checked per command."""
    result = runner.invoke(cli, ["gen", "--graph", "cycle:4", "--format", "csv"])
    assert result.exit_code == EXIT_INVALID
    assert _error(result)["error"] == "ValidationError"


def test_missing_graph(runner: CliRunner) -> None:
    """--graph is required."""
    result = runner.invoke(cli, ["verify"])
    assert result.exit_code == EXIT_INVALID
    assert "graph" in _error(result)["message"]


# =============================================================================
# verify
# =============================================================================


def test_verify_eye_graph(runner: CliRunner) -> None:
    """Every check passes on EyeGd(2)."""
    result = runner.invoke(cli, ["verify", "--graph", "eye:2"])
    assert result.exit_code == EXIT_OK
    assert "zero_count: 2" in result.stdout
    assert "FAIL" not in result.stdout
    assert result.stdout.rstrip().endswith("6/6 checks passed")


def test_verify_text_is_self_describing(runner: CliRunner, tmp_path: Path) -> None:
    """The text report starts with the tool version and the configuration echo."""
    out = tmp_path / "eye2.txt"
    result = runner.invoke(cli, ["verify", "--graph", "eye:2", "--out", str(out)])
    assert result.exit_code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == f"# kura {__version__}"
    assert lines[1].startswith("# config: ")
    echo = json.loads(lines[1][len("# config: ") :])
    assert echo["command"] == "verify"
    assert echo["graph"] == "eye:2"
    assert "out" not in echo
    assert lines[2] == "kura verify eye:2"


def test_verify_json(runner: CliRunner) -> None:
    """JSON report lists the checks."""
    result = runner.invoke(cli, ["verify", "--graph", "eye:3", "--format", "json"])
    assert result.exit_code == EXIT_OK
    data = json.loads(result.stdout)
    assert data["passed"] is True
    names = [c["name"] for c in data["checks"]]
    assert names == [
        "connected",
        "torus_conditions",
        "torus_residual",
        "transversal_stability",
        "reference_spectrum",
        "circulant_oracle",
    ]


def test_verify_degenerate_cycle_fails(runner: CliRunner) -> None:
    """The splay state of C4 is completely degenerate, so stability fails."""
    result = runner.invoke(cli, ["verify", "--graph", "cycle:4"])
    assert result.exit_code == EXIT_CHECK_FAILED
    assert "FAIL transversal_stability: degenerate" in result.stdout


def test_verify_needs_family(runner: CliRunner, tmp_path: Path) -> None:
    """Edge-list files have no natural partition."""
    path = tmp_path / "c5.txt"
    runner.invoke(cli, ["gen", "--graph", "cycle:5", "--out", str(path)])
    result = runner.invoke(cli, ["verify", "--graph", str(path)])
    assert result.exit_code == EXIT_INVALID
    assert _error(result)["error"] == "GraphError"


# =============================================================================
# scan
# =============================================================================


def test_scan_eye_graph_csv(runner: CliRunner) -> None:
    """256 grid points; beta = pi/2 is transversally stable."""
    result = runner.invoke(cli, ["scan", "--graph", "eye:2"])
    assert result.exit_code == EXIT_OK
    assert result.stdout.startswith("# kura 0.1.0 ")
    df = pd.read_csv(io.StringIO(result.stdout), comment="#")
    assert len(df) == 256
    assert df["shift_2"][64] == pytest.approx(PI / 2)
    assert df["class"][64] == "stable(2)"
    assert df["zero_count"][64] == 2
    assert str(df["class"][0]).startswith("unstable")


def test_scan_is_deterministic(runner: CliRunner) -> None:
    """Identical invocations give byte-identical output."""
    args = ["scan", "--graph", "eye:2", "--grid", "0:pi:8", "--format", "json"]
    first = runner.invoke(cli, args)
    second = runner.invoke(cli, args)
    assert first.exit_code == EXIT_OK
    assert first.stdout == second.stdout
    assert len(json.loads(first.stdout)["rows"]) == 8


def test_scan_parquet_needs_out(runner: CliRunner) -> None:
    """Binary output is never written to stdout."""
    result = runner.invoke(cli, ["scan", "--graph", "eye:2", "--format", "parquet"])
    assert result.exit_code == EXIT_INVALID


def test_scan_parquet(runner: CliRunner, tmp_path: Path) -> None:
    """The Parquet header echoes the configuration."""
    path = tmp_path / "scan.parquet"
    result = runner.invoke(
        cli, ["scan", "--graph", "eye:2", "--grid", "0:2pi:16", "--format", "parquet", "--out", str(path)]
    )
    assert result.exit_code == EXIT_OK
    header = read_parquet_header(path)
    assert header["config"]["grid"] == "0:2pi:16"
    assert len(pd.read_parquet(path)) == 16


def test_scan_bad_grid(runner: CliRunner) -> None:
    """Malformed grids are rejected before any work."""
    result = runner.invoke(cli, ["scan", "--graph", "eye:2", "--grid", "0:pi"])
    assert result.exit_code == EXIT_INVALID


# =============================================================================
# equilibria
# =============================================================================


def test_equilibria_needs_seed(runner: CliRunner) -> None:
    """Stochastic commands refuse to run unseeded."""
    result = runner.invoke(cli, ["equilibria", "--graph", "complete:4"])
    assert result.exit_code == EXIT_INVALID
    assert "seed" in _error(result)["message"]


@pytest.mark.timeout(120)
def test_equilibria_on_k4(runner: CliRunner) -> None:
    """Energies are 0, 6 or 8 and every row carries a component label."""
    result = runner.invoke(cli, ["equilibria", "--graph", "complete:4", "--seed", "1", "--trials", "50"])
    assert result.exit_code == EXIT_OK
    data = json.loads(result.stdout)
    assert data["meta"]["config"]["seeds"] == 50 + 216
    rows = data["rows"]
    assert rows
    assert {round(r["energy"], 6) for r in rows} <= {0.0, 6.0, 8.0}
    assert all(r["component"] for r in rows)
    assert all(r["phases"][0] == 0.0 for r in rows)


@pytest.mark.timeout(120)
def test_equilibria_from_edge_list(runner: CliRunner, tmp_path: Path) -> None:
    """Catalogs are found from the edge set of a file."""
    path = tmp_path / "k4.txt"
    runner.invoke(cli, ["gen", "--graph", "complete:4", "--out", str(path)])
    result = runner.invoke(
        cli, ["equilibria", "--graph", str(path), "--seed", "2", "--trials", "20", "--format", "csv"]
    )
    assert result.exit_code == EXIT_OK
    df = pd.read_csv(io.StringIO(result.stdout), comment="#")
    assert set(df["energy"].round(6)) <= {0.0, 6.0, 8.0}
    assert df["component"].notna().all()


# =============================================================================
# hetero
# =============================================================================


@pytest.mark.timeout(300)
def test_hetero_k4(runner: CliRunner, tmp_path: Path) -> None:
    """Nineteen arcs in the DOT file, plus the JSON companion."""
    out = tmp_path / "k4.dot"
    result = runner.invoke(cli, ["hetero", "--graph", "complete:4", "--seed", "7", "--out", str(out)])
    assert result.exit_code == EXIT_OK
    dot = out.read_text()
    assert dot.startswith("// kura 0.1.0\n")
    assert sum(1 for line in dot.splitlines() if "->" in line) == 19
    companion = json.loads((tmp_path / "k4.json").read_text())
    assert len(companion["arcs"]) == 19
    assert companion["meta"]["config"]["seed"] == 7
    misses = tmp_path / "k4.misses.json"
    if misses.exists():
        assert json.loads(misses.read_text())["meta"]["config"]["seed"] == 7


def test_hetero_without_catalog(runner: CliRunner) -> None:
    """Graphs without a component catalog exit 2."""
    result = runner.invoke(cli, ["hetero", "--graph", "cycle:5", "--seed", "1"])
    assert result.exit_code == EXIT_INVALID
    assert _error(result)["error"] == "CatalogError"


# =============================================================================
# Configuration
# =============================================================================


@pytest.mark.parametrize(
    "token, value",
    [
        ("pi", PI),
        ("2pi", 2 * PI),
        ("-pi/2", -PI / 2),
        ("2*pi", 2 * PI),
        (".5pi", PI / 2),
        ("π", PI),
        ("1.25", 1.25),
    ],
)
def test_parse_angle(token: str, value: float) -> None:
    """Numbers and pi expressions."""
    assert parse_angle(token) == pytest.approx(value)


def test_parse_angle_rejects() -> None:
    """Anything else is a ValueError."""
    with pytest.raises(ValueError):
        parse_angle("tau")


def test_parse_grid() -> None:
    """count points, end excluded."""
    assert parse_grid("0:2pi:4") == pytest.approx([0.0, PI / 2, PI, 1.5 * PI])
    for bad in ("0:1", "0:1:0", "0:1:x"):
        with pytest.raises(ValueError):
            parse_grid(bad)


@pytest.mark.parametrize(
    "params",
    [
        {"command": "hetero", "graph": "complete:4"},
        {"command": "gen", "graph": "cycle:4", "format": "dot"},
        {"command": "verify", "graph": "eye:2", "grid": "0:pi:4"},
        {"command": "scan", "graph": "eye:2", "format": "parquet"},
        {"command": "hetero", "graph": "complete:4", "seed": 1, "dt": 0.0},
        {"command": "scan", "graph": "eye:2", "grid": "nonsense"},
        {"command": "gen", "graph": ""},
        {"command": "gen", "graph": "cycle:4", "colour": "red"},
    ],
)
def test_run_config_rejects(params: Dict[str, Any]) -> None:
    """Missing seeds, foreign formats, stray flags and bad values."""
    with pytest.raises(ValidationError):
        RunConfig(**params)


def test_run_config_defaults() -> None:
    """Formats, trials and integration settings fall back per command."""
    hetero = RunConfig(command="hetero", graph="complete:4", seed=7)
    assert hetero.resolved_format == "dot"
    assert hetero.trial_count() == 64
    assert hetero.integration() == (1e-2, 200.0)
    assert hetero.echo() == {"command": "hetero", "graph": "complete:4", "seed": 7, "format": "dot"}

    to_file = RunConfig(command="hetero", graph="complete:4", seed=7, out="runs/k4.dot")
    assert to_file.echo() == hetero.echo()

    eq = RunConfig(command="equilibria", graph="complete:4", seed=0)
    assert eq.resolved_format == "json"
    assert eq.trial_count() == 2000
    assert eq.tolerance(1e-12) == 1e-12
