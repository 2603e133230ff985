import json
import math
import subprocess
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import pytest
from hypothesis import given, strategies as st

from voldist import __version__
from voldist.cli import RunConfig, main, parse_matrix, render_matrix, run, to_json
from voldist.errors import InvalidInput
from voldist.intmat import IntMatrix

GOLDEN = Path(__file__).parent / "golden"
SCHEMA = json.loads(resources.files("voldist").joinpath("report_schema.json").read_text())


def invoke(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_matrix_forms():
    A = IntMatrix.from_rows([[2, 1], [1, 1]])
    assert parse_matrix("2 1\n1 1") == A
    assert parse_matrix("2 1; 1 1") == A
    assert parse_matrix("[[2, 1], [1, 1]]") == A
    assert parse_matrix('{"matrix": [[2, 1], [1, 1]]}') == A


@pytest.mark.parametrize("bad", ["", "1 2\n3", "1.5 0; 0 1", "[[1, 2]]", "[[1, true], [0, 1]]", "{not json"])
def test_parse_matrix_rejects(bad):
    with pytest.raises(InvalidInput):
        parse_matrix(bad)


@given(st.integers(1, 4).flatmap(lambda m: st.lists(st.lists(st.integers(-50, 50), min_size=m, max_size=m), min_size=m, max_size=m)))
def test_render_round_trip(rows):
    A = IntMatrix.from_rows(rows)
    assert parse_matrix(render_matrix(A)) == A


def test_classify_golden(capsys):
    code, out, _ = invoke(capsys, "classify", "--matrix", "2 0; 0 3")
    assert code == 0
    assert json.loads(out) == json.loads((GOLDEN / "classify_diag23.json").read_text())


@pytest.mark.parametrize(
    "argv",
    [
        ["classify", "--matrix", "2 1; 1 1"],
        ["classify", "--matrix", "1 1 0; 0 1 1; 0 0 1"],
        ["classify", "--matrix", "2 0 0; 0 2 0; 0 0 2", "--mode", "volume", "--k", "3"],
        ["eval", "--matrix", "2 0; 0 1", "--n", "e,10"],
        ["witness", "--matrix", "2 0; 0 2", "--scales", "4,8"],
        ["measure", "--matrix", "2 0; 0 2", "--scales", "4,8"],
        ["measure", "--matrix", "1 1; 0 1", "--scales", "2"],
        ["classify", "--matrix", "1 1; 1 1"],
    ],
)
def test_reports_match_schema(capsys, argv):
    code, out, _ = invoke(capsys, *argv)
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    assert report["exit_status"] == code
    assert report["version"] == __version__


def test_classify_includes_complexity(capsys):
    _, out, _ = invoke(capsys, "classify", "--matrix", "2 1; 1 1")
    report = json.loads(out)
    assert report["complexity"] == {"m": 3, "bound": "n*3^n", "method": "explicit grid filling"}
    assert report["verdict"]["lower"]["text"] == "n"


def test_eval_values(capsys):
    _, out, _ = invoke(capsys, "eval", "--matrix", "2 0; 0 1")
    ev = json.loads(out)["evaluations"][0]
    assert ev["lower"] == pytest.approx(math.e**2, abs=1e-9)
    assert ev["upper"] == pytest.approx(math.e**2, abs=1e-9)


def test_singular_matrix_exit_code(capsys):
    code, out, err = invoke(capsys, "classify", "--matrix", "1 2; 2 4")
    assert code == 2
    assert "det M = 0" in json.loads(out)["error"]
    assert "det M = 0" in err


def test_invalid_input_exit_code(capsys):
    code, out, _ = invoke(capsys, "classify", "--matrix", "1 2 3")
    assert code == 2
    code, _, _ = invoke(capsys, "measure", "--matrix", "2 0; 0 2", "--scales", "abc")
    assert code == 2


def test_oracle_exit_code_on_cap(capsys):
    code, out, _ = invoke(capsys, "measure", "--matrix", "2 0; 0 2", "--scales", "4,5000")
    report = json.loads(out)
    assert code == 4
    assert report["measurement"]["partial"] is True
    assert report["measurement"]["volumes"]["subgroup"] == [16]


def test_oracle_command(tmp_path, capsys):
    cyc = {"complex": {"kind": "grid", "m": 2, "R": 3}, "cycle": {"word": [1, 1, 2, 2, 2, -1, -1, -2, -2, -2]}}
    path = tmp_path / "cycle.json"
    path.write_text(json.dumps(cyc))
    code, out, _ = invoke(capsys, "oracle", "--cycle", str(path))
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    assert code == 0 and report["filling"]["volume"] == 6 and report["filling"]["optimal"]


def test_oracle_slab_cells(tmp_path, capsys):
    cyc = {
        "complex": {"kind": "slab", "matrix": [[2, 0], [0, 2]], "R": 1, "h": 1},
        "cycle": {"word": [3, 1, -3, -1, -1], "basepoint": [1, [0, 0]]},
    }
    path = tmp_path / "slab.json"
    path.write_text(json.dumps(cyc))
    code, out, _ = invoke(capsys, "oracle", "--cycle", str(path))
    assert code == 0 and json.loads(out)["filling"]["volume"] == 1


def test_text_format(capsys):
    code, out, _ = invoke(capsys, "classify", "--matrix", "2 0; 0 3", "--format", "text")
    assert code == 0
    assert "sharp: True" in out and "text: n^2" in out


def test_matrix_from_file(tmp_path, capsys):
    path = tmp_path / "m.txt"
    path.write_text("0 -1\n1 0\n")
    code, out, _ = invoke(capsys, "classify", str(path))
    assert code == 0
    assert json.loads(out)["profile"]["finite_order"] == 4


def test_run_is_deterministic():
    cfg = RunConfig("measure", matrix="2 1; 0 2", scales=[4, 8])
    a, _ = run(cfg)
    b, _ = run(cfg)
    assert to_json(a) == to_json(b)


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "voldist", "--version"], capture_output=True, text=True, check=True)
    assert __version__ in out.stdout
