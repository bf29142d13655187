import csv
import io
import json

import pytest

from arbodom.cli import CSV_COLUMNS, ExperimentConfig, InvalidConfig, main, rows_to_csv, sweep
from arbodom.graph import loads_graph


def run_cli(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def write_config(path, **overrides):
    cfg = {
        "generator": {"family": "arboricity", "n": 10, "alpha": 2, "weight_max": 8},
        "algorithm": {"name": "det", "eps": "1/2"},
        "seeds": [0, 3],
        "trials": 1,
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return path


def test_gen_star(tmp_path, capsys):
    out = tmp_path / "star.txt"
    code, _, _ = run_cli(["gen", "--family", "star", "--delta", 4, "-o", out], capsys)
    assert code == 0
    assert loads_graph(out.read_text()).n == 5


def test_gen_tree_single_node(tmp_path, capsys):
    out = tmp_path / "t.txt"
    assert run_cli(["gen", "--family", "tree", "--n", 1, "-o", out], capsys)[0] == 0
    assert loads_graph(out.read_text()).n == 1


def test_gen_lower_bound_writes_roles(tmp_path, capsys):
    out = tmp_path / "h.txt"
    code, _, err = run_cli(["gen", "--family", "lower-bound", "--base", "K4", "-o", out], capsys)
    assert code == 0
    assert loads_graph(out.read_text()).n == 94
    assert (tmp_path / "h.txt.roles").read_text().startswith("# base 4 6 3\n")
    assert "94 nodes" in err


def test_lb_construct_from_file(tmp_path, capsys):
    base = tmp_path / "k3.txt"
    run_cli(["gen", "--family", "complete", "--n", 3, "-o", base], capsys)
    out = tmp_path / "h.txt"
    assert run_cli(["lb-construct", "--base", base, "-o", out], capsys)[0] == 0
    assert loads_graph(out.read_text()).m == 36


def test_run_and_verify(tmp_path, capsys):
    g = tmp_path / "g.txt"
    run_cli(["gen", "--family", "arboricity", "--n", 12, "--alpha", 2, "--weight-max", 8, "--seed", 4, "-o", g], capsys)
    res = tmp_path / "r.json"
    assert run_cli(["run", "--graph", g, "--algo", "det", "--eps", "1/10", "-o", res], capsys)[0] == 0
    code, out, _ = run_cli(["verify", g, res], capsys)
    assert code == 0 and "FAIL" not in out

    data = json.loads(res.read_text())
    dropped = dict(data, members=data["members"][1:])
    (tmp_path / "bad1.json").write_text(json.dumps(dropped))
    code, out, _ = run_cli(["verify", g, tmp_path / "bad1.json"], capsys)
    assert code == 1 and "FAIL" in out

    inflated = json.loads(res.read_text())
    inflated["certificate"]["tau"][0] *= 1000
    (tmp_path / "bad2.json").write_text(json.dumps(inflated))
    code, out, _ = run_cli(["verify", g, tmp_path / "bad2.json"], capsys)
    assert code == 1 and "FAIL certificate-feasible" in out


def test_run_trials_csv(tmp_path, capsys):
    g = tmp_path / "g.txt"
    run_cli(["gen", "--family", "star", "--delta", 4, "-o", g], capsys)
    code, out, _ = run_cli(["run", "--graph", g, "--algo", "rand", "--trials", 5], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 5 and set(rows[0]) == {"seed", "weight", "rounds", "max_c"}


def test_usage_errors(tmp_path, capsys):
    g = tmp_path / "g.txt"
    run_cli(["gen", "--family", "star", "--delta", 4, "-o", g], capsys)
    assert run_cli(["run", "--graph", g, "--eps", "0.5"], capsys)[0] == 2
    assert run_cli(["run", "--graph", tmp_path / "missing.txt"], capsys)[0] == 2
    assert run_cli(["run"], capsys)[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_config_validation():
    with pytest.raises(InvalidConfig):
        ExperimentConfig.from_json({"generator": {"family": "nope"}, "algorithm": {"name": "det"}})
    with pytest.raises(InvalidConfig):
        ExperimentConfig.from_json({"generator": {"family": "star"}, "algorithm": {"name": "det", "eps": "0.1"}})
    with pytest.raises(InvalidConfig):
        ExperimentConfig.from_json({"algorithm": {"name": "det"}})


def test_empty_seed_range_gives_header_only(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", seeds=[5, 5])
    code, out, _ = run_cli(["run", "--config", cfg], capsys)
    assert code == 0 and out == ",".join(CSV_COLUMNS) + "\n"


def test_sweep_rows(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json")
    out = tmp_path / "o.csv"
    assert run_cli(["run", "--config", cfg, "-o", out], capsys)[0] == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["seed"] for r in rows] == ["0", "1", "2"]
    assert all(r["within_bound"] == "1" and not r["error"] for r in rows)


def test_errors_are_recorded_per_row(tmp_path):
    cfg = ExperimentConfig.from_json({
        "generator": {"family": "arboricity", "n": 8, "alpha": 1, "weight_max": 8},
        "algorithm": {"name": "unweighted", "eps": "1/2"},
        "seeds": [0, 2],
    })
    rows = sweep(cfg)
    assert len(rows) == 2 and all(r["error"].startswith("NonUnitWeights") for r in rows)


def test_threads_do_not_change_output(tmp_path, monkeypatch):
    cfg = ExperimentConfig.from_json({
        "generator": {"family": "arboricity", "n": 12, "alpha": 3, "weight_max": 1},
        "algorithm": {"name": "rand", "t": 2},
        "seeds": [0, 6],
        "trials": 3,
    })
    monkeypatch.setenv("ARBODOM_THREADS", "1")
    serial = rows_to_csv(sweep(cfg))
    monkeypatch.setenv("ARBODOM_THREADS", "4")
    assert rows_to_csv(sweep(cfg)) == serial


def test_bench(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json")
    code, out, _ = run_cli(["bench", "--config", cfg], capsys)
    assert code == 0 and "rows=3" in out
