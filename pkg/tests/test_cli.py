import json

import numpy as np
import pytest

from cycloproj.cli import main, parse_grid
from cycloproj.subspaces import lines_system


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_grid():
    g = parse_grid("0:1:0.05")
    assert len(g) == 21 and g[0] == 0 and g[-1] == 1 and g[3] == 0.15
    assert parse_grid("0.1,0.5,0.9") == [0.1, 0.5, 0.9]
    assert parse_grid("0.2:0.2:0.1") == [0.2]
    with pytest.raises(ValueError):
        parse_grid("1:0:0.1")


def test_solve_json(capsys):
    code, out, _ = run(capsys, "solve", "--n", "3", "--c", "0.2", "--starts", "8", "--seed", "42")
    assert code == 0
    d = json.loads(out)
    assert d["f_estimate"] == pytest.approx(0.16, abs=1e-6) and d["seed"] == 42


def test_solve_zero_and_small_c(capsys):
    code, out, _ = run(capsys, "solve", "--n", "2", "--c", "0.0")
    d = json.loads(out)
    assert code == 0 and d["f_estimate"] == 0 and d["optimum"] == [[1, 0], [0, 1]]
    code, out, _ = run(capsys, "solve", "--n", "4", "--c", "0.05", "--format", "csv")
    header, row = out.splitlines()
    vals = dict(zip(header.split(","), row.split(",")))
    assert float(vals["f_estimate"]) == pytest.approx(3.375e-3, abs=1e-6)


def test_solve_is_byte_deterministic(capsys):
    _, a, _ = run(capsys, "solve", "--n", "4", "--c", "0.3")
    _, b, _ = run(capsys, "solve", "--n", "4", "--c", "0.3")
    assert a == b


def test_bad_input_exit_code(capsys):
    code, _, err = run(capsys, "solve", "--n", "1", "--c", "0.5")
    assert code == 2 and "n" in err
    code, _, _ = run(capsys, "solve", "--n", "3")
    assert code == 2


def test_table_rows(capsys, tmp_path):
    code, out, err = run(capsys, "table", "--n", "3", "--grid", "0:1:0.05")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 22
    assert all(line.split(",")[2] for line in lines[1:])
    assert "b_tilde" in err and "f - (1 - a_n (1 - c))" in err
    code, out, _ = run(capsys, "table", "--n", "2", "--grid", "1.0")
    assert out.splitlines()[1] == "2,1,1,,1,1,1,1,1"
    path = tmp_path / "t.json"
    run(capsys, "table", "--n", "2", "--grid", "0.5", "--format", "json", "--out", str(path))
    assert json.loads(path.read_text())[0]["f_closed"] == 0.5


def test_table_with_solver(capsys):
    code, out, _ = run(capsys, "table", "--n", "4", "--grid", "0.1,0.5,0.9", "--with-solver")
    for line in out.splitlines()[1:]:
        cells = line.split(",")
        f, lb, ub = float(cells[3]), float(cells[4]), float(cells[5])
        assert lb <= f <= ub + 1e-6


def test_simulate_two_lines(capsys, tmp_path):
    sys_path, x_path = tmp_path / "s.json", tmp_path / "x.json"
    lines_system([0, np.pi / 3]).save(sys_path)
    x_path.write_text(json.dumps([1, 0]))
    code, out, err = run(capsys, "simulate", "--system", str(sys_path), "--x0", str(x_path), "--sweeps", "5")
    assert code == 0 and "c_F" in err and "c_D" in err and "predicted rate" in err
    rows = [r.split(",") for r in out.splitlines()[1:]]
    for k, row in enumerate(rows[1:], start=1):
        assert float(row[1]) == pytest.approx(0.5 ** (2 * k - 1), abs=1e-14)


def test_simulate_intersection_start(capsys, tmp_path):
    sys_path, x_path = tmp_path / "s.json", tmp_path / "x.json"
    lines_system([0.0, 0.0, 0.0]).save(sys_path)
    x_path.write_text(json.dumps([[2.0, 0], [0, 0]]))
    _, out, _ = run(capsys, "simulate", "--system", str(sys_path), "--x0", str(x_path), "--sweeps", "3")
    assert all(float(r.split(",")[1]) == 0 for r in out.splitlines()[1:])


def test_simulate_witness_from_solve(capsys, tmp_path):
    w = tmp_path / "w.json"
    run(capsys, "solve", "--n", "3", "--c", "0.5", "--system", str(w))
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(5):
        x = tmp_path / "x.json"
        x.write_text(json.dumps(rng.normal(size=3).tolist()))
        _, out, _ = run(capsys, "simulate", "--system", str(w), "--x0", str(x), "--sweeps", "1")
        worst = max(worst, float(out.splitlines()[2].split(",")[2]))
    assert worst <= 0.5 + 1e-7


def test_verify_only_and_fault(capsys):
    code, out, _ = run(capsys, "verify", "--only", "functional-equation", "--n", "3")
    assert code == 0 and out.startswith("PASS functional-equation")
    code, out, _ = run(capsys, "verify", "--only", "small-c", "--n", "3", "--fault", "clip")
    assert code == 1 and "FAIL small-c" in out
    code, out, _ = run(capsys, "verify", "--only", "path-laplacian", "--fault", "laplacian")
    assert code == 1
