import csv
import io
import json

import pytest

from pyspenceabel.cli import EXIT_FAILURE, EXIT_INPUT, EXIT_OK, RunConfig, main, main_parser
from pyspenceabel.const import ZETA2
from pyspenceabel.dilog.reference import rogers_reference
from pyspenceabel.models import FormulaVariant, InvalidInput, OutputFormat
from pyspenceabel.tests import RHS_DIR


def _rows(text: str) -> list[list[str]]:
    return list(csv.reader(io.StringIO(text)))


def test_check_identities(capsys):
    """All cheap identities pass."""
    code = main(["--grid-n", "20", "check-identities"])
    rows = _rows(capsys.readouterr().out)
    assert code == EXIT_OK
    assert rows[0] == ["identity", "residual", "tolerance", "passed"]
    assert {row[0] for row in rows[1:]} == {"five_term", "six_term", "reflection", "cocycle"}
    assert all(row[3] == "True" for row in rows[1:])


def test_check_identities_subset_json(capsys):
    """JSON documents carry the resolved config."""
    code = main(["--format", "json", "check-identities", "--which", "reflection"])
    document = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert document["config"]["format"] == "json"
    assert document["columns"] == ["identity", "residual", "tolerance", "passed"]
    assert document["rows"][0][0] == "reflection"
    assert document["rows"][0][3] is True


def test_eval_rogers_reference(capsys):
    """Reference values with 17 significant digits."""
    code = main(["eval-rogers", "--mode", "reference", "--xs", "0.5,0.25"])
    rows = _rows(capsys.readouterr().out)
    assert code == EXIT_OK
    assert rows[0] == ["x", "L2_ref"]
    assert float(rows[1][1]) == pytest.approx(ZETA2 / 2, abs=1e-15)
    assert len(rows) == 3


def test_eval_rogers_both(capsys):
    """Both evaluations agree and the variant verdict is recorded."""
    code = main(["--format", "json", "eval-rogers", "--xs", "0.3,0.6"])
    document = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert document["columns"] == ["x", "L2_new", "L2_ref", "abs_diff"]
    assert document["metadata"]["arbitration"]["winner"] == "body"
    assert all(row[3] <= 1e-4 for row in document["rows"])


def test_eval_rogers_difference_too_large():
    """Exceeding --max-diff is a failure."""
    assert main(["eval-rogers", "--xs", "0.3", "--max-diff", "1e-30"]) == EXIT_FAILURE


def test_eval_rogers_bad_xs():
    """Points outside (0, 1) are input errors."""
    assert main(["eval-rogers", "--xs", "1.5"]) == EXIT_INPUT
    assert main(["eval-rogers", "--xs", "a,b"]) == EXIT_INPUT


@pytest.mark.parametrize("rhs", ["tau3:cos2", str(RHS_DIR / "malformed.json"), "nothing"])
def test_solve_bad_rhs(rhs):
    """Unusable right-hand sides exit with status 2."""
    assert main(["solve", "--rhs", rhs, "--xs", "0.5"]) == EXIT_INPUT


def test_plot_flat(tmp_path):
    """Rows of the closed-form F♭ on the upper triangle."""
    out = tmp_path / "flat.csv"
    assert main(["--grid-n", "5", "--out", str(out), "plot-flat"]) == EXIT_OK
    rows = _rows(out.read_text())
    assert rows[0] == ["phi1", "phi2", "F"]
    assert len(rows) == 1 + 10
    assert all(float(r[0]) < float(r[1]) for r in rows[1:])


def test_stability_reproducible(tmp_path):
    """Two runs with the same seed are byte-identical."""
    outputs = []
    for name in ("a.jsonl", "b.jsonl"):
        out = tmp_path / name
        args = ["--seed", "11", "--format", "json", "--out", str(out), "stability", "--trials", "2"]
        assert main(args) == EXIT_OK
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    lines = outputs[0].decode().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["metadata"]["seed"] == 11


def test_stability_csv(capsys):
    """CSV rows per trial."""
    assert main(["stability", "--trials", "1", "--amplitude", "0"]) == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert rows[0][:3] == ["trial", "epsilon", "c_offset"]
    assert rows[1][-1] == "True"


def test_config_file_and_precedence(tmp_path, capsys, monkeypatch):
    """Defaults < config file < flags; the file may come from the environment."""
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"grid_n": 7, "format": "json", "seed": 3}))
    monkeypatch.setenv("SPENCE_ABEL_CONFIG", str(config))
    assert main(["--seed", "9", "check-identities", "--which", "cocycle"]) == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert document["config"]["grid_n"] == 7
    assert document["config"]["seed"] == 9


def test_config_file_errors(tmp_path):
    """Unknown keys and unreadable files are input errors."""
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"grid": 7}))
    assert main(["--config", str(config), "plot-flat"]) == EXIT_INPUT
    assert main(["--config", str(tmp_path / "missing.json"), "plot-flat"]) == EXIT_INPUT


def test_invalid_flags():
    """Invalid settings exit with status 2."""
    assert main(["--grid-n", "1", "plot-flat"]) == EXIT_INPUT
    assert main(["--abs-tol", "0", "plot-flat"]) == EXIT_INPUT
    with pytest.raises(SystemExit) as err:
        main(["eval-rogers", "--mode", "sometimes"])
    assert err.value.code == 2


def test_run_config():
    """Values are coerced and validated."""
    run = RunConfig("solve", format="json", formula_variant="intro")
    assert run.format is OutputFormat.JSON
    assert run.formula_variant is FormulaVariant.INTRO
    assert run.quad_config().abs_tol == run.abs_tol
    with pytest.raises(InvalidInput):
        RunConfig("solve", grid_n="many")


def test_parser_requires_command():
    """A subcommand is mandatory."""
    with pytest.raises(SystemExit):
        main_parser().parse_args([])


def test_enum_lookup():
    """Enum values match case- and dash-insensitively; anything else is rejected."""
    assert OutputFormat("JSON") is OutputFormat.JSON
    assert FormulaVariant("Intro") is FormulaVariant.INTRO
    with pytest.raises(ValueError):
        OutputFormat("unknown")
    with pytest.raises(ValueError):
        FormulaVariant(3)


@pytest.mark.slow
def test_solve_reports_residuals(capsys):
    """By default the solution is checked against both equations of the system."""
    code = main(["--format", "json", "solve", "--xs", "0.3,0.6"])
    document = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    expected = [rogers_reference(0.3), rogers_reference(0.6)]
    assert [row[1] for row in document["rows"]] == pytest.approx(expected, abs=1e-6)
    assert document["metadata"]["five_term_residual"] <= 1e-5
    assert document["metadata"]["reflection_residual"] <= 1e-5
