import csv
import io
import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from siklos import verify
from siklos.cli import fmt, main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def lines(text):
    return text.strip().splitlines()


# curvature -------------------------------------------------------------


def test_curvature_ads_connection():
    code, out = run("curvature", "--H", "0", "--point", "0,0,1,0")
    assert code == 0
    gammas = [l.strip() for l in lines(out) if l.strip().startswith("Gamma^")]
    assert gammas == [
        "Gamma^1_13 = -1",
        "Gamma^2_23 = -1",
        "Gamma^3_12 = 1",
        "Gamma^3_33 = -1",
        "Gamma^3_44 = 1",
        "Gamma^4_34 = -1",
    ]
    assert "constant curvature: true" in out


def test_curvature_kaigorodov_preset():
    code, out = run("curvature", "--H.catalog", "kaigorodov", "--point", "[0.5, 0.1, 1.7, -0.3]")
    assert code == 0
    assert "einstein: true" in lines(out)[-3]


def test_curvature_f1():
    code, out = run("curvature", "--H", "x3^4", "--point", "0,0,1,0")
    assert "f1 = 10" in lines(out)
    assert "f2 = 8" in lines(out) and "f3 = -2" in lines(out) and "f4 = -4" in lines(out)
    assert "  R^3_232 = 5" in lines(out)


def test_curvature_json():
    code, out = run("curvature", "--H", "x3^3", "--json")
    data = json.loads(out)
    assert data["predicates"]["einstein"] is True
    assert data["f"] == {"f1": 5.0, "f2": 3.0, "f3": -1.0, "f4": -3.0}
    assert {"k": 3, "i": 1, "j": 2, "value": 1.0} in data["christoffel"]


def test_curvature_chart_error():
    code, _ = run("curvature", "--point", "0,0,0,0")
    assert code == 3


# classify --------------------------------------------------------------


def test_classify_cor35():
    code, out = run("classify", "--family", "cor3.5", "--H", "x3^2*sin(x2)", "--samples", "10")
    assert code == 0
    assert "totally geodesic: true" in lines(out)


def test_classify_case6():
    code, out = run("classify", "--family", "thm4.3-case6", "--immersion.params", '{"k": 2, "epsilon": 1}', "--samples", "10")
    assert code == 0
    assert "parallel: true" in lines(out)
    trace = [l for l in lines(out) if l.startswith("|tr h| = ")][0]
    assert float(trace.split()[3]) == pytest.approx(1.0, abs=1e-6)
    assert "expected verdicts hold: true" in lines(out)


def test_classify_exprs_not_totally_geodesic():
    code, out = run("classify", "--exprs", "u1,u2,u3,u2^3", "--H", "x3^2", "--samples", "10")
    assert code == 0
    assert "totally geodesic: false" in lines(out)


def test_classify_json_and_dotted_params():
    code, out = run(
        "classify", "--family", "thm4.2-fam1", "--immersion.params.theta", "0.5", "--beta", "2", "--samples", "5", "--json"
    )
    data = json.loads(out)
    assert code == 0 and data["expected_hold"] is True
    assert data["abs_trace"] == pytest.approx(np.cos(0.5) / 2, abs=1e-6)


def test_classify_failed_expectation_exit_1():
    code, out = run("classify", "--family", "thm3.4", "--samples", "5", "--tolerances.tol_p", "1e-20")
    assert code == 1
    assert "expected verdicts hold: false" in out


def test_classify_sampling_error(capsys):
    code, _ = run("classify", "--exprs", "u1,u2,u3-5,u2", "--H", "x3")
    assert code == 4
    assert "offending point" in capsys.readouterr().err


def test_classify_config_errors(tmp_path):
    assert run("classify", "--family", "nope")[0] == 2
    assert run("classify", "--family", "thm4.3-case6", "--H", "x3^2")[0] == 2
    assert run("classify", "--exprs", "u1,u2,u3")[0] == 2
    assert run("classify", "--exprs", "u1,u2,u3,x9")[0] == 2
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"H": {"expr": "x3", "catalog": "kaigorodov"}, "immersion": {"family": "cor3.5"}}))
    assert run("classify", "--config", str(cfg))[0] == 2
    cfg.write_text("{not json")
    assert run("classify", "--config", str(cfg))[0] == 2
    assert run("classify", "--unknown.field", "1")[0] == 2


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"beta": 3.0, "samples": 4, "immersion": {"family": "thm4.2-fam2"}, "output": "json"}))
    code, out = run("classify", "--config", str(cfg), "--beta", "0.5")
    data = json.loads(out)
    assert code == 0 and data["beta"] == 0.5 and data["samples"] == 4
    assert data["abs_trace"] == pytest.approx(2.0)


# verify-paper ------------------------------------------------------------


def test_verify_only_prefix():
    code, out = run("verify-paper", "--only", "thm4.2", "--samples", "5")
    assert code == 0
    assert [l.split()[1] for l in lines(out)[:-1]] == ["thm4.2-fam1", "thm4.2-fam2"]
    assert lines(out)[-1] == "2 passed / 0 failed"


def test_verify_json_schema_and_determinism():
    args = ("verify-paper", "--only", "predicates", "--only", "thm4.3-case6", "--samples", "5", "--json", "--seed", "3")
    code, out = run(*args)
    assert code == 0
    jsonschema.validate(json.loads(out), verify.REPORT_SCHEMA)
    assert run(*args)[1] == out


def test_verify_failure_exit_code():
    code, out = run("verify-paper", "--only", "thm3.4", "--tolerances.tol_p", "1e-20", "--samples", "5")
    assert code == 1
    assert out.startswith("FAIL thm3.4")


# geodesic ----------------------------------------------------------------


def _csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=float)


def test_geodesic_confinement_column():
    code, out = run("geodesic", "--H", "x3^2", "--p0", "0,0.3,1.2,1.6", "--v0", "0.3,0.5,0.2,1.0", "--confine", "cor3.5")
    assert code == 0
    header, data = _csv(out)
    assert header == ["t", "x1", "x2", "x3", "x4", "norm-drift", "distance"]
    assert len(data) == 1001
    assert data[:, 6].max() < 1e-6
    assert data[:, 5].max() < 1e-6


def test_geodesic_along_d1():
    code, out = run("geodesic", "--p0", "0,0.2,1.4,0", "--v0", "1,0,0,0", "--dt", "0.01")
    header, data = _csv(out)
    assert header == ["t", "x1", "x2", "x3", "x4", "norm-drift"]
    assert np.all(data[:, 3] == 1.4)


def test_geodesic_errors(capsys):
    assert run("geodesic", "--p0", "0,0,1,0", "--v0", "1,0,0,0", "--dt", "0")[0] == 2
    assert "StepError" in capsys.readouterr().err
    assert run("geodesic", "--p0", "0,0,0.1,0", "--v0", "0,0,-1,0", "--dt", "0.5", "--t-end", "2")[0] == 5
    assert run("geodesic", "--p0", "0,0,1", "--v0", "1,0,0,0")[0] == 2
    assert run("geodesic", "--p0", "0,0,1,0")[0] == 2


# formatting and entry points ------------------------------------------


def test_nine_significant_digits():
    assert fmt(1 / 3) == "0.333333333"
    assert fmt(10.0) == "10"
    assert fmt(-0.0) == "0"
    assert fmt(123456789012.0) == "1.23456789e+11"


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "siklos", "curvature", "--H", "x3^4"], capture_output=True, text=True, check=False
    )
    assert res.returncode == 0
    assert "f1 = 10" in res.stdout


def test_identical_stdout_across_processes():
    cmd = [sys.executable, "-m", "siklos", "verify-paper", "--only", "thm4.3-case6", "--json", "--seed", "5"]
    a = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    assert a == b
