import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floqnf.cli import main
from floqnf.errors import InputError
from floqnf.io import dumps, read_json, system_from_dict, to_jsonable, validate_report, write_csv

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"
REFERENCE = FIXTURES / "11_reference_manufactured.json"


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def reference_system_doc():
    return json.loads(REFERENCE.read_text())["system"]


def test_non_finite_input_names_path(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"n": 2, "T": 1.0, "kind": "trig", "A0": [[0, NaN], [0, 0]]}')
    with pytest.raises(InputError, match=r"\$\.A0\[0\]\[1\]"):
        read_json(p)


def test_shape_error_names_path():
    doc = {"n": 2, "T": 1.0, "kind": "trig", "A0": [[0.0, 1.0], [0.0]]}
    with pytest.raises(InputError, match=r"\$\.A0"):
        system_from_dict(doc)


def test_schema_error_names_path():
    with pytest.raises(InputError, match=r"\$\.T"):
        system_from_dict({"n": 2, "T": -1.0, "kind": "trig", "A0": [[0.0, 0.0], [0.0, 0.0]]})


@settings(max_examples=50, deadline=None)
@given(x=st.floats(allow_nan=False, allow_infinity=False))
def test_report_floats_round_trip(x):
    assert json.loads(dumps({"x": x, "z": complex(x, -x)})) == {"x": x, "z": [x, -x]}


def test_to_jsonable_drops_non_finite():
    assert to_jsonable([np.inf, np.float64(1.5), np.int64(3)]) == [None, 1.5, 3]


def test_csv_format(tmp_path):
    p = tmp_path / "a.csv"
    write_csv(p, ["t", "x"], [[0.0, 0.1], [1.0, 1e-17]])
    raw = p.read_bytes()
    assert b"\r" not in raw
    assert raw.decode().splitlines() == ["t,x", "0.0,0.1", "1.0,1e-17"]


def test_analyze_reference(capsys):
    code, out, _ = run(capsys, "analyze", REFERENCE)
    rep = json.loads(out)
    validate_report(rep)
    assert code == 0 and rep["a_index"] == 2 and rep["existence"]["exists"] is False


def test_analyze_is_deterministic(capsys):
    def strip(d):
        if isinstance(d, dict):
            return {k: strip(v) for k, v in d.items() if k != "timings"}
        if isinstance(d, list):
            return [strip(v) for v in d]
        return d

    a = strip(json.loads(run(capsys, "analyze", REFERENCE)[1]))
    b = strip(json.loads(run(capsys, "analyze", REFERENCE)[1]))
    assert a == b


def test_analyze_nan_exit_2(tmp_path, capsys):
    p = tmp_path / "nan.json"
    p.write_text('{"n": 2, "T": 1.0, "kind": "trig", "A0": [[0, 1], [NaN, 0]]}')
    code, _, err = run(capsys, "analyze", p)
    assert code == 2 and "$.A0[1][0]" in err


def test_bad_env_tolerance(monkeypatch, capsys):
    monkeypatch.setenv("FLOQ_TOL", "1e-1")
    assert run(capsys, "analyze", REFERENCE)[0] == 2


def test_normal_form_outputs(tmp_path, capsys):
    code, out, _ = run(capsys, "normal-form", REFERENCE, "--grid", 16, "--out", tmp_path / "o")
    assert code == 0
    rep = json.loads(out)
    validate_report(rep)
    assert rep["d"] == 2
    assert json.loads((tmp_path / "o" / "report.json").read_text()) == rep
    lines = (tmp_path / "o" / "q_samples.csv").read_text().splitlines()
    assert len(lines) == 18


def test_orbit_frame_planar(tmp_path, capsys):
    field = write(tmp_path, "f.json", {"n": 2, "builtin": "planar_cycle"})
    code, out, _ = run(capsys, "orbit-frame", field, "--z0", "1.1,0", "--T0", 6.2, "--out", tmp_path / "o")
    rep = json.loads(out)
    validate_report(rep)
    assert code == 0 and rep["d"] == 0 and rep["frame"]["q0"] == 0
    assert abs(rep["frame"]["H1"][0][0] + 2.0) <= 1e-4
    assert (tmp_path / "o" / "trajectory.csv").exists()


def test_orbit_frame_twisted(tmp_path, capsys):
    field = write(tmp_path, "f.json", {"n": 3, "builtin": "twisted_cycle"})
    code, out, _ = run(capsys, "orbit-frame", field, "--z0", "1,0,0", "--T0", 6.3)
    assert code == 0 and json.loads(out)["d"] == 2


def test_orbit_frame_missing_z0(tmp_path, capsys):
    field = write(tmp_path, "f.json", {"n": 2, "builtin": "planar_cycle"})
    assert run(capsys, "orbit-frame", field, "--T0", 6.2)[0] == 2


def test_orbit_frame_no_convergence(tmp_path, capsys):
    # a linear centre-free field has no periodic orbit near the guess
    field = write(tmp_path, "f.json", {"n": 2, "polynomial": [[[1.0, [1, 0]]], [[1.0, [0, 0]]]]})
    assert run(capsys, "orbit-frame", field, "--z0", "1,0", "--T0", 1.0)[0] == 4


def test_verify_empty_dir(tmp_path, capsys):
    assert run(capsys, "verify", tmp_path)[0] == 2


def test_verify_perturbed_fixture_names_check(tmp_path, capsys):
    doc = json.loads((FIXTURES / "01_const_diag_1_2.json").read_text())
    doc["expect"]["monodromy"][0][0] += 1e-3
    write(tmp_path, "01.json", doc)
    shutil.copy(FIXTURES / "02_zero_system.json", tmp_path)
    code, out, err = run(capsys, "verify", tmp_path, "--fixtures-only")
    assert code == 1
    rep = json.loads(out)
    failed = [c["name"] for f in rep["fixtures"] for c in f["checks"] if not c["passed"]]
    assert failed == ["monodromy"]
    assert "monodromy" in err


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "floqnf.cli", "analyze", str(REFERENCE)],
                         capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["a_index"] == 2
