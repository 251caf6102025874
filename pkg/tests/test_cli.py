import csv
import json
import math

import pytest

from tlcurv.cli import RunConfig, flrw_demo, main, run_check

VERDICT_KEYS = {"condition", "K", "side", "samples", "seed", "tol", "pass", "worst_margin", "witness"}


def test_flat_suite_exit_zero(tmp_path, capsys):
    report = tmp_path / "r.json"
    code = main(["check", "--spacetime", "minkowski4", "--K", "0", "--side", "below", "--conditions", "all",
                 "--samples", "100", "--seed", "7", "--report", str(report)])
    assert code == 0
    data = json.loads(report.read_text())
    assert data["schema_version"] == 1
    assert set(data) >= {"schema_version", "config", "verdicts", "engine", "timings_ms"}
    assert [v["condition"] for v in data["verdicts"]] == [
        "triangle", "monotonicity", "angle", "hinge", "causal_triangle", "convexity"]
    for v in data["verdicts"]:
        assert set(v) == VERDICT_KEYS and v["seed"] == 7
        assert abs(v["worst_margin"]) <= 1e-7
    assert "PASS" in capsys.readouterr().out


def test_de_sitter_below_zero_exit_one(tmp_path):
    report = tmp_path / "r.json"
    code = main(["check", "--spacetime", "model+1", "--K", "0", "--side", "below", "--conditions", "triangle",
                 "--samples", "100", "--seed", "7", "--report", str(report)])
    assert code == 1
    (v,) = json.loads(report.read_text())["verdicts"]
    assert not v["pass"] and v["worst_margin"] < 0
    assert set(v["witness"]["points"]) >= {"p", "q", "r"}


def test_malformed_chart_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 2, "metric": [["-1", "0"], ["0", "cosh(x0 +* 2)"]]}')
    assert main(["check", "--spacetime", str(bad), "--conditions", "triangle", "--samples", "5"]) == 2
    err = capsys.readouterr().err
    assert "line 1" in err and "'*'" in err


@pytest.mark.parametrize("argv", [
    ["check", "--spacetime", "kerr7"],
    ["check", "--spacetime", "minkowski2", "--samples", "0"],
    ["check", "--spacetime", "minkowski2", "--conditions", "quadrilateral"],
    ["check", "--spacetime", "minkowski2", "--tol", "-1"],
])
def test_errors_exit_two(argv):
    assert main(argv) == 2


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["check", "--spacetime", "minkowski2", "--side", "left"])
    assert exc.value.code == 2


def test_config_round_trip_reproduces_verdicts():
    cfg = RunConfig("model-1", K=0.0, side="above", conditions=("hinge", "convexity"), samples=40, seed=3)
    first = run_check(cfg)
    again = run_check(RunConfig(**first["config"]))
    assert [v["pass"] for v in again["verdicts"]] == [v["pass"] for v in first["verdicts"]]
    assert [v["worst_margin"] for v in again["verdicts"]] == [v["worst_margin"] for v in first["verdicts"]]


def test_report_is_strict_json(tmp_path):
    path = tmp_path / "sub" / "r.json"
    run_check(RunConfig("model+1", K=1.0, conditions=("monotonicity",), samples=20, report_path=str(path)))
    json.loads(path.read_text(), parse_constant=lambda c: pytest.fail(f"non-standard constant {c}"))


def test_csv_emission(tmp_path):
    out = tmp_path / "m.csv"
    run_check(RunConfig("minkowski2", conditions=("triangle", "jacobi_t4"), samples=10, emit_csv=str(out)))
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["condition", "K", "side", "sample", "column", "margin"]
    tri = [r for r in rows[1:] if r[0] == "triangle"]
    assert len(tri) == 10 * 5
    assert all(math.isfinite(float(r[5])) for r in rows[1:])
    assert any(r[0] == "jacobi_t4" for r in rows[1:])


def test_extra_checks_through_cli():
    report = run_check(RunConfig("model+1", K=1.0, conditions=("hessian", "dalembert", "jacobi_t4", "smooth_scan"),
                                 samples=30))
    names = [(v["condition"], v["witness"].get("part")) for v in report["verdicts"]]
    assert names[:2] == [("hessian", "timelike_tau"), ("hessian", "signed_distance_all_v")]
    assert [n for n, _ in names[2:]] == ["dalembert", "jacobi_t4", "smooth_scan"]
    assert all(v["pass"] for v in report["verdicts"])


def test_run_config_validation():
    assert RunConfig("minkowski2", conditions="triangle, hinge").conditions == ("triangle", "hinge")
    assert RunConfig("minkowski2", conditions=("all", "triangle")).expanded()[0] == "triangle"
    assert len(RunConfig("minkowski2").expanded()) == 6
    with pytest.raises(ValueError):
        RunConfig("minkowski2", conditions=())
    with pytest.raises(ValueError):
        RunConfig("minkowski2", side="left")


def test_flrw_demo_fluid(tmp_path):
    path = tmp_path / "flrw.json"
    report = flrw_demo("fluid_consistent", path, planes=2000)
    fl = json.loads(path.read_text())["flrw"]
    assert fl == json.loads(json.dumps(report["flrw"]))
    assert fl["f0"] == 1.0 and fl["fp0"] == 0.25
    assert fl["rho"] < 0 and fl["rho_sign"] == -1
    assert abs(fl["p_plus_rho"]) <= 1e-6 and fl["p_equals_minus_rho"]
    assert fl["sup_timelike_curvature"] <= 1e-6
    assert fl["spacelike_curvature_t0"] == pytest.approx(-0.9375, abs=1e-4)
    assert fl["timelike_above_by_0"] is True and fl["agh_below_by_0"] is False


def test_flrw_demo_literal_measures_only(capsys):
    assert main(["flrw-demo", "--variant", "paper_literal", "--planes", "500"]) == 0
    out = capsys.readouterr().out
    assert "p_plus_rho" in out
    report = flrw_demo("paper_literal", planes=500)
    fl = report["flrw"]
    assert fl["f0"] == 1.0 and fl["fp0"] == 0.25
    assert not fl["p_equals_minus_rho"]
    assert math.isfinite(fl["sup_timelike_curvature"])
