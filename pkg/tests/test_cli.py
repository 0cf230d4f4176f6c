import io
import json
import subprocess
import sys

import pytest

from pcsp.catalog import one_in_three
from pcsp.cli import EXIT_DATA, EXIT_INCONCLUSIVE, EXIT_NEGATIVE, EXIT_POSITIVE, EXIT_USAGE, run
from pcsp.core import Relation, Structure, serialize_structure


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    text = out.getvalue()
    return code, (json.loads(text) if text else None), err.getvalue()


@pytest.fixture
def rxxx(tmp_path):
    p = tmp_path / "rxxx.json"
    p.write_text(serialize_structure(Structure(1, [Relation("R", 3, [(0, 0, 0)])])))
    return str(p)


@pytest.fixture
def path_instance(tmp_path):
    p = tmp_path / "path.json"
    p.write_text(serialize_structure(Structure(5, [Relation("R", 3, [(0, 1, 2), (2, 3, 4)])])))
    return str(p)


def test_analyze():
    code, rep, _ = call("analyze", "--structure", "1in3")
    assert code == EXIT_POSITIVE
    assert rep["command"] == "analyze" and len(rep["inputs"]["structure"]["sha256"]) == 64


def test_classify_exit_codes():
    assert call("classify", "--A", "1in3", "--B", "eqn(3,1)")[0] == EXIT_POSITIVE
    code, rep, _ = call("classify", "--A", "1in3", "--B", "1in3")
    assert code == EXIT_NEGATIVE and rep["result"]["outcome"] == "np_hard"
    assert call("classify", "--A", "1in3", "--B", "nae")[0] == EXIT_INCONCLUSIVE
    assert call("classify", "--A", "1in3", "--B", "1in3", "--m-max", "3")[0] == EXIT_INCONCLUSIVE


def test_solve(path_instance, rxxx):
    code, rep, _ = call("solve", "--A", "1in3", "--B", "eqn(3,1)", "--instance", path_instance)
    assert code == EXIT_POSITIVE and rep["result"]["solved"] and len(rep["result"]["homomorphism"]) == 5
    code, rep, _ = call("solve", "--A", "1in3", "--B", "eqn(3,1)", "--instance", rxxx)
    assert code == EXIT_NEGATIVE and not rep["result"]["solved"]


def test_relax(rxxx):
    code, rep, _ = call("relax", "--method", "blp", "--template", "1in3", "--instance", rxxx)
    assert code == EXIT_POSITIVE
    assert rep["result"]["certificate"][0] == ["mu[0][0]", "2/3"]
    assert call("relax", "--method", "aip", "--template", "1in3", "--instance", rxxx)[0] == EXIT_NEGATIVE
    assert call("relax", "--method", "blp+aip", "--template", "1in3", "--instance", rxxx)[0] == EXIT_NEGATIVE


def test_poly():
    assert call("poly", "--A", "remark_5_1", "--B", "remark_5_1", "--k", "1")[0] == EXIT_NEGATIVE
    assert call("poly", "--A", "remark_5_3", "--B", "remark_5_3", "--k", "2")[0] == EXIT_POSITIVE
    code, rep, _ = call("poly", "--A", "1in3", "--B", "eqn(3,1)", "--enumerate", "3", "--collisions")
    assert code == EXIT_POSITIVE and rep["result"]["count"] == 27
    code, rep, _ = call("poly", "--A", "1in3", "--B", "eqn(3,1)", "--enumerate", "4", "--enum-cap", "10")
    assert code == EXIT_INCONCLUSIVE and "resource_limit" in rep["result"]


def test_derive():
    code, rep, _ = call("derive", "--structure", "1in3", "--target", "1,1,0")
    assert code == EXIT_POSITIVE and rep["result"]["valid"] and rep["result"]["depth"] == 2
    code, rep, _ = call("derive", "--structure", "1in3")
    assert code == EXIT_POSITIVE and rep["result"]["complete"]
    assert call("derive", "--structure", "remark_5_3", "--target", "1,1,0")[0] == EXIT_NEGATIVE
    assert call("derive", "--structure", "1in3", "--n", "2")[0] == EXIT_DATA


def test_catalog():
    code, rep, _ = call("catalog")
    assert code == EXIT_POSITIVE and "one_in_three" in rep["result"]["keys"]
    code, rep, _ = call("catalog", "one_in_three")
    assert rep["result"]["structure"]["relations"][0]["tuples"] == [[0, 0, 1], [0, 1, 0], [1, 0, 0]]


def test_usage_and_data_errors(tmp_path):
    assert call("bogus")[0] == EXIT_USAGE
    assert call("classify", "--A", "1in3")[0] == EXIT_USAGE
    assert call("analyze", "--structure", "no_such_key")[0] == EXIT_DATA
    bad = tmp_path / "bad.json"
    bad.write_text('{"domain": ["0"], "relations": [}')
    code, rep, err = call("analyze", "--structure", str(bad))
    assert code == EXIT_DATA and rep is None and "line 1" in err
    assert call("classify", "--A", "1in3", "--B", "remark_5_3")[0] == EXIT_DATA


def test_file_beats_catalog_key(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "nae").write_text(serialize_structure(one_in_three()))
    code, rep, err = call("analyze", "--structure", "nae")
    assert code == EXIT_POSITIVE and "warning" in err
    assert rep["inputs"]["structure"]["sha256"] == call("analyze", "--structure", "1in3")[1]["inputs"]["structure"]["sha256"]


def test_output_is_byte_stable():
    a = io.StringIO()
    b = io.StringIO()
    run(["classify", "--A", "1in3", "--B", "eqn(3,1)", "--verbose"], a, io.StringIO())
    run(["classify", "--A", "1in3", "--B", "eqn(3,1)"], b, io.StringIO())
    assert a.getvalue() == b.getvalue()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pcsp", "analyze", "--structure", "nae"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == EXIT_POSITIVE
    assert json.loads(proc.stdout)["command"] == "analyze"
