import cmath
import inspect
import json
import subprocess
import sys
from math import pi

import pytest

from bpsdeform import acceptance, cli, errors
from bpsdeform.hyperelliptic import Curve


@pytest.fixture
def files(tmp_path):
    ws = [cmath.exp(2j * cmath.pi * k / 6) for k in range(6)]

    def put(name, obj):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(p)

    return {
        "curve": put("curve.json", {"weierstrass": [[w.real, w.imag] for w in ws]}),
        "curve_p": put("curve_p.json", {"P": [[-1, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [1, 0]]}),
        "paired": put("paired.json", [{"x": [0.3, 0.2], "sheet": 1}, {"x": [0.3, 0.2], "sheet": -1}]),
        "generic": put("generic.json", [{"x": [0.3, 0.2], "sheet": 1}, {"x": [-0.4, 0.1], "sheet": 1}]),
        "one": put("one.json", [{"x": [0.3, 0.2], "mult": 1}]),
        "chart2": put("chart2.json", {"m": 2}),
        "chart3": put("chart3.json", {"m": 3}),
        "alpha1": put("alpha1.json", [[1, 0]]),
        "alphaz": put("alphaz.json", {"coeffs": [[0, 0], [1, 0]], "order": 1}),
        "zero": put("zero.json", {"a11": [[0, 0]], "a12": [[0, 0]], "a21": [[0, 0]]}),
        "sys": put("sys.json", {"a11": [[0.3, 0], [1, 0]], "a12": [[0, 1]], "a21": [[1, 0], [0.5, 0]]}),
        "path": put("path.json", {"waypoints": [[0.3, 0], [0, 0.3], [-0.3, 0], [0, -0.3]], "sheet": 1,
                                  "closed": True}),
        "bad": put("bad.json", '{"P": [[1, 0],\n  [2, 0]'),
    }


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_canonical_command(capsys, files):
    assert run_json(capsys, "canonical", files["curve"], files["paired"]) == \
        (0, {"canonical": True, "dim": 2, "degree": 2})
    code, out = run_json(capsys, "canonical", files["curve_p"], files["generic"])
    assert code == 0 and out["canonical"] is False and out["dim"] == 1
    code, out = run_json(capsys, "canonical", files["curve"], files["one"])
    assert out["canonical"] is False and out["reason"] == "degree"


def test_contract_command(capsys, files):
    code, out = run_json(capsys, "contract", files["chart2"], files["alpha1"], "1")
    assert code == 0 and out["value"] == pytest.approx([0, pi])
    code, out = run_json(capsys, "contract", files["chart3"], files["alphaz"], "2", "--mode", "quadrature")
    assert out["value"] == pytest.approx([0, 4 * pi / 3], abs=1e-6)
    code, out = run_json(capsys, "contract", files["chart2"], files["alpha1"], "1",
                         "--mode", "quadrature", "--r1", "0.2", "--r2", "0.5")
    assert out["value"] == pytest.approx([0, pi], abs=1e-6)


def test_critical_command(capsys, files):
    code, out = run_json(capsys, "critical", files["curve"], files["paired"])
    assert code == 0 and out["kernel_dim"] == 1 and out["equations_satisfied"] is True
    assert out["critical_line"]["pair_residual"] < 1e-10


def test_rank_command(capsys):
    code, out = run_json(capsys, "rank", "--g", "3", "--k", "3", "--samples", "100")
    assert code == 0 and out["min_rank"] == out["max_rank"] == 3


def test_sl2_commands(capsys, files):
    code, out = run_json(capsys, "sl2-monodromy", files["curve"], files["zero"], files["path"])
    assert code == 0 and out["matrix"] == [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]
    code, out = run_json(capsys, "sl2-branch", files["curve"], files["sys"], "--c", "1,0.5j")
    assert code == 0 and out["degree"] == 2
    code, out = run_json(capsys, "sl2-eigen", files["curve"], files["sys"], "--c", "1,0.5j")
    assert code == 0 and out["max_residual"] < 1e-8


def test_pairing_csv(capsys, files):
    code, out = run(capsys, "pairing", files["curve"], files["paired"])
    rows = out.strip().split("\n")
    assert code == 0 and len(rows) == 3
    cells = [r.split(",") for r in rows]
    assert all(len(r) == 2 and r[0] == r[1] for r in cells)
    assert all(cell.endswith("i") for r in cells for cell in r)
    v = complex(cells[0][0].replace("i", "j"))
    assert abs(v) > 0


def test_parse_errors_exit_1(capsys, files):
    code, out = run_json(capsys, "canonical", files["bad"], files["paired"])
    assert code == 1 and out["error"] == "parse_error" and "bad.json:2:" in out["detail"]
    code, out = run_json(capsys, "canonical", files["curve"])
    assert code == 1 and out["error"] == "parse_error"
    code, out = run_json(capsys, "contract", files["chart2"], files["alpha1"], "one")
    assert code == 1


def test_domain_errors_exit_2(capsys, files):
    code, out = run_json(capsys, "sl2-branch", files["curve"], files["zero"], "--c", "1,0")
    assert code == 2 and out == {"error": "zero_theta", "detail": out["detail"]}
    code, out = run_json(capsys, "critical", files["curve"], files["one"])
    assert code == 0
    code, out = run_json(capsys, "contract", files["chart2"], files["alpha1"], "0.5")
    assert code == 0
    code, out = run_json(capsys, "contract", files["chart2"], files["alpha1"], "0.5", "--mode", "quadrature",
                         "--r1", "0.8", "--r2", "0.5")
    assert code == 2 and out["error"] == "invalid_input"


def test_env_tolerance(capsys, files, monkeypatch):
    monkeypatch.setenv("BPS_TOL", "nonsense")
    code, out = run_json(capsys, "rank", "--g", "2", "--k", "1", "--samples", "2")
    assert code == 1
    monkeypatch.setenv("BPS_TOL", "1e-6")
    assert cli.build_parser(cli._env_tol()).parse_args(["rank", "--k", "1"]).tol == 1e-6


def test_outputs_deterministic(files):
    cmd = [sys.executable, "-m", "bpsdeform", "rank", "--g", "2", "--k", "2", "--samples", "20", "--seed", "9"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b
    cmd = [sys.executable, "-m", "bpsdeform", "pairing", files["curve"], files["generic"]]
    assert subprocess.run(cmd, capture_output=True).stdout == subprocess.run(cmd, capture_output=True).stdout


def test_error_codes_distinct():
    classes = [c for _, c in inspect.getmembers(errors, inspect.isclass) if issubclass(c, errors.BPSError)]
    codes = [c.code for c in classes]
    assert len(codes) == len(set(codes)) and len(codes) >= 20


def test_selftest_flag(capsys, monkeypatch):
    fake = [acceptance.CriterionResult(1, "x", True, "ok")]
    monkeypatch.setattr(acceptance, "run_all", lambda: fake)
    assert cli.main(["--selftest"]) == 0
    fake[0].passed = False
    assert cli.main(["--selftest"]) == 2
