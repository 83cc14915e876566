import json

import pytest

from grccrtd.cli import main, parse_sweep


def _report(path):
    return json.loads((path / "report.json").read_text())


def test_solve_case3(tmp_path):
    assert main(["solve", "--fixture", "case3", "--out", str(tmp_path)]) == 0
    rep = _report(tmp_path)
    assert rep["status"] == "optimal"
    assert rep["manifest"]["backend"]
    assert (tmp_path / "dispatch.csv").read_text().startswith("gen,bus,p_pu,alpha")


def test_cone_backend(tmp_path):
    assert main(["solve", "--fixture", "case3", "--formulation", "cone", "--out", str(tmp_path)]) == 0
    assert _report(tmp_path)["backend"] == "cone"


def test_missing_file_is_parse_error(tmp_path, capsys):
    code = main(["solve", "--case", str(tmp_path / "nope.m"), "--config", str(tmp_path / "c.yaml")])
    assert code == 3
    assert "no such file" in capsys.readouterr().err


def test_certification_exit(tmp_path):
    code = main(["solve", "--fixture", "case5", "--require-certified", "--out", str(tmp_path)])
    rep = _report(tmp_path)
    assert code == (0 if rep["certification"]["passed"] else 6)


def test_empty_sweep_is_usage_error(tmp_path):
    assert main(["sweep", "--fixture", "case3", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "--fixture", "case3", "--sweep", "gamma1="]) == 2
    assert main(["sweep", "--fixture", "case3", "--sweep", "beta=1,2"]) == 2


def test_parse_sweep():
    assert parse_sweep(["wind_farms=3..5"]) == [("wind_farms", [3, 4, 5])]
    assert parse_sweep(["gamma1=0,0.1"]) == [("gamma1", [0.0, 0.1])]
    with pytest.raises(ValueError):
        parse_sweep(["gamma1=0.1", "gamma1=0.2"])


def test_compare_ordering(tmp_path):
    assert main(["compare", "--fixture", "case3", "--out", str(tmp_path)]) == 0
    assert _report(tmp_path)["comparison"]["ordering_holds"] is True


def test_sweep_writes_points(tmp_path):
    assert main(["sweep", "--fixture", "case3", "--sweep", "gamma1=0,0.1", "--workers", "1",
                 "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "gamma1,status,objective,certified" and len(lines) == 3


def test_validate_with_solution(tmp_path):
    sol = tmp_path / "sol"
    assert main(["solve", "--fixture", "case3", "--formulation", "cone", "--out", str(sol)]) == 0
    out = tmp_path / "val"
    assert main(["validate", "--fixture", "case3", "--seed", "1", "--samples", "500", "--family", "laplace",
                 "--moments", "nominal", "--solution", str(sol / "report.json"), "--out", str(out)]) == 0
    grid = _report(out)["grid"]
    assert len(grid) == 1 and grid[0]["dispatch"] == "solution"


def test_validate_rejects_bad_solution(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert main(["validate", "--fixture", "case3", "--seed", "1", "--solution", str(bad)]) == 3


@pytest.mark.parametrize("argv", [
    ["compare", "--fixture", "case5"],
    ["sweep", "--fixture", "case3", "--sweep", "gamma1=0,0.05,0.1"],
    ["validate", "--fixture", "case3", "--seed", "7", "--samples", "3000"],
])
def test_tables_are_reproducible(argv, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--out", str(a), "--workers", "1"]) == 0
    assert main(argv + ["--out", str(b), "--workers", "3"]) == 0
    timing = {"compare_timings.csv", "sweep_timings.csv"}
    for f in a.glob("*.csv"):
        if f.name not in timing:
            assert f.read_bytes() == (b / f.name).read_bytes(), f.name
