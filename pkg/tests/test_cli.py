import csv
import json
import math

import pytest

from fucik_lab.cli import emit_curve_plotdata, main, output_name, parse_number

TWO_PHASE_CFG = {
    "weights_m": {"period": 1, "breakpoints": [0, 0.5, 1], "values": [1, 3]},
    "weights_n": {"period": 1, "breakpoints": [0, 1], "values": [1]},
    "ell": 1,
    "k_list": [1, 2],
    "t_list": [0.5, 1],
    "signs": ["+", "-"],
    "epsilon_list": [0.25, 0.125, 0.0625],
    "tol": 1e-12,
}


def write_cfg(tmp_path, **over):
    cfg = dict(TWO_PHASE_CFG, out_dir=str(tmp_path / "out"), **over)
    p = tmp_path / "exp.json"
    p.write_text(json.dumps(cfg))
    return str(p)


def lambdas(out):
    return [float(line.rsplit("lambda=", 1)[1]) for line in out.splitlines() if "lambda=" in line]


def test_solve_classical(capsys):
    assert main(["solve", "--k", "2", "--t", "1", "--sign", "+", "--const-weights", "1,1", "--ell", "pi"]) == 0
    (lam,) = lambdas(capsys.readouterr().out)
    assert lam == pytest.approx(4.0, rel=1e-11)


def test_solve_minus_sign(capsys):
    assert main(["solve", "--k", "2", "--t", "4", "--sign", "-", "--const-weights", "1,1", "--ell", "pi"]) == 0
    assert lambdas(capsys.readouterr().out) == [pytest.approx(9 / 4, rel=1e-11)]


@pytest.mark.parametrize("argv, field", [
    (["solve", "--t", "0", "--const-weights", "1,1"], "t"),
    (["solve", "--t", "1e5", "--const-weights", "1,1"], "t"),
    (["solve", "--k", "0", "--const-weights", "1,1"], "k"),
    (["solve", "--epsilon", "-1", "--const-weights", "1,1"], "epsilon"),
    (["solve", "--ell", "abc", "--const-weights", "1,1"], "ell"),
    (["solve", "--const-weights", "1,0"], "const-weights"),
    (["solve"], "config"),
])
def test_validation_errors(capsys, argv, field):
    assert main(argv) == 1
    assert capsys.readouterr().err.startswith(f"error: {field}")


def test_unknown_verb():
    assert main(["plot"]) == 1


def test_config_errors(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(dict(TWO_PHASE_CFG, weight_m={})))
    assert main(["homog", "--config", str(p)]) == 1
    assert "unknown keys ['weight_m']" in capsys.readouterr().err
    p.write_text("{not json")
    assert main(["homog", "--config", str(p)]) == 1
    assert "malformed" in capsys.readouterr().err
    assert main(["homog", "--config", str(tmp_path / "missing.json")]) == 1
    bad = dict(TWO_PHASE_CFG)
    bad["weights_m"] = {"period": 1, "breakpoints": [0, 0.5, 1], "values": [1, -3]}
    p.write_text(json.dumps(bad))
    assert main(["solve", "--config", str(p)]) == 1
    assert "weights_m.values" in capsys.readouterr().err
    p.write_text(json.dumps(dict(TWO_PHASE_CFG, t_list=[])))
    assert main(["curve", "--config", str(p), "--out-dir", str(tmp_path)]) == 1
    assert "t:" in capsys.readouterr().err


def test_parse_number():
    assert parse_number("pi", "x") == math.pi
    assert parse_number("2pi", "x") == 2 * math.pi
    assert parse_number("2*pi", "x") == 2 * math.pi
    assert parse_number("pi/2", "x") == math.pi / 2
    assert parse_number("0.25", "x") == 0.25
    assert parse_number(3, "x") == 3.0
    with pytest.raises(ValueError):
        parse_number("pie", "x")
    with pytest.raises(ValueError):
        parse_number(True, "x")


def test_output_name():
    assert output_name("curve", 2, "+", None, 0.125) == "curve_2_p_all_0.125.csv"
    assert output_name("homog") == "homog_all_all_all_all.csv"


def test_homog_writes_rates_and_summary(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    assert main(["homog", "--config", cfg]) == 0
    out = tmp_path / "out"
    rows = list(csv.DictReader(open(out / "homog_all_all_all_all.csv")))
    assert list(rows[0]) == ["k", "sign", "t", "epsilon", "lambda_eps", "lambda_0", "abs_err", "slope", "C_emp"]
    assert len(rows) == 2 * 2 * 2 * 3
    summary = json.loads((out / "summary.json").read_text())
    assert summary["complete"] and len(summary["series"]) == 8


def test_homog_deterministic(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["homog", "--config", cfg]) == 0
    first = (tmp_path / "out" / "homog_all_all_all_all.csv").read_bytes()
    assert main(["homog", "--config", cfg]) == 0
    assert (tmp_path / "out" / "homog_all_all_all_all.csv").read_bytes() == first


def test_curve_default_grid(tmp_path):
    assert main(["curve", "--k", "1", "--sign", "+", "--const-weights", "2,1",
                 "--out-dir", str(tmp_path)]) == 0
    rows = list(csv.reader(open(tmp_path / output_name("curve", 1, "+", None, 1.0))))
    assert rows[0] == ["k", "sign", "t", "lambda", "alpha", "beta"]
    assert len(rows) == 34
    alphas = {float(r[4]) for r in rows[1:]}
    assert max(alphas) - min(alphas) <= 1e-11 * max(alphas)
    assert min(alphas) == pytest.approx(math.pi ** 2 / 2, rel=1e-11)


def test_curve_from_config(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["curve", "--config", cfg, "--epsilon", "0.125", "--k", "2"]) == 0
    files = sorted(p.name for p in (tmp_path / "out").iterdir())
    assert files == ["curve_2_m_all_0.125.csv", "curve_2_p_all_0.125.csv"]


def test_emit_curve_rejects_empty(tmp_path):
    with pytest.raises(ValueError):
        emit_curve_plotdata([], tmp_path / "x.csv")


def test_nodal_and_check_bounds(tmp_path, capsys):
    cfg = write_cfg(tmp_path, k_list=[2, 4])
    assert main(["nodal", "--config", cfg, "--epsilon", "0.0625", "--t", "0.5", "--sign", "+"]) == 0
    rows = list(csv.reader(open(tmp_path / "out" / output_name("nodal", 4, "+", 0.5, 0.0625))))
    assert rows[0] == ["k", "sign", "t", "epsilon", "domain_index", "left", "right", "sign_of_u", "length"]
    assert len(rows) == 5
    assert main(["check-bounds", "--config", cfg]) == 0
    assert "violations=0" in capsys.readouterr().out
    rows = list(csv.DictReader(open(tmp_path / "out" / output_name("check-bounds"))))
    assert len(rows) == 3 * 2 * 2 * 2
    assert all(r["in_bracket"] == "true" and r["equal_lengths"] == "true" for r in rows)


def test_solve_writes_trajectory(tmp_path, capsys):
    assert main(["solve", "--k", "3", "--t", "2", "--sign", "+", "--const-weights", "1,1",
                 "--out-dir", str(tmp_path)]) == 0
    rows = list(csv.reader(open(tmp_path / output_name("solve", 3, "+", 2.0, 1.0))))
    assert rows[0] == ["x", "u", "du"] and float(rows[-1][0]) == 1.0


def test_solver_failure_exit_code(tmp_path, monkeypatch, capsys):
    import fucik_lab.cli as cli
    from fucik_lab.spectrum import SolverError

    def boom(*a, **k):
        raise SolverError("no convergence")

    monkeypatch.setattr(cli.spectrum, "solve_half_eigenvalue", boom)
    assert main(["solve", "--const-weights", "1,1"]) == 2
    assert "FAILED" in capsys.readouterr().err
