import csv
import json
import math

import pytest

from robustcounter.cli import main, parse_grid_spec
from robustcounter.fixtures import demo_instance, demo_lp, one_row_uncertain
from robustcounter.model import export_text, import_text
from robustcounter.sitesel import write_instance
from robustcounter.solver import solve
from robustcounter.uncertainty import format_annotations


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "demo_lp.txt").write_text(export_text(demo_lp()))
    model, uset = one_row_uncertain()
    (tmp_path / "one_row.txt").write_text(export_text(model))
    (tmp_path / "one_row.unc").write_text(format_annotations(uset, model))
    write_instance(demo_instance(), tmp_path / "hk_demo")
    return tmp_path


def test_solve_optimal_exit_zero(workdir, capsys):
    rc = main(["solve", str(workdir / "demo_lp.txt")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "status: optimal" in out
    assert "objective: 12.000000" in out


def test_solve_infeasible_exit_two(workdir, capsys):
    (workdir / "bad.txt").write_text(
        "#vars\nx continuous 0 inf\n#obj\nmax 1*x\n#cons\nc: 1*x <= -1\n")
    assert main(["solve", str(workdir / "bad.txt")]) == 2


def test_solve_unbounded_exit_three(workdir):
    (workdir / "unb.txt").write_text(
        "#vars\nx continuous 0 inf\n#obj\nmax 1*x\n#cons\n")
    assert main(["solve", str(workdir / "unb.txt")]) == 3


def test_solve_garbage_exit_one(workdir, capsys):
    (workdir / "garbage.txt").write_text("this is not a model\n")
    rc = main(["solve", str(workdir / "garbage.txt")])
    err = capsys.readouterr().err
    assert rc == 1
    assert "line 1" in err


def test_solve_json_mirror(workdir, capsys):
    rc = main(["solve", str(workdir / "demo_lp.txt"), "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert rc == 0
    assert payload["status"] == "optimal"
    assert payload["objective"] == pytest.approx(12.0)
    assert payload["values"]["x"] == pytest.approx(4.0)


def test_robustify_writes_reparseable_counterpart(workdir, capsys):
    out = workdir / "one_row_irc.txt"
    rc = main(["robustify", str(workdir / "one_row.txt"),
               str(workdir / "one_row.unc"), "--mode", "irc",
               "--eps", "0.1", "--delta", "0", "-o", str(out)])
    assert rc == 0
    reparsed = import_text(out.read_text())
    sol = solve(reparsed)
    assert sol.objective == pytest.approx(9.0 / 1.1, abs=1e-9)


def test_robustify_idempotent(workdir):
    out1, out2 = workdir / "a.txt", workdir / "b.txt"
    args = ["robustify", str(workdir / "one_row.txt"), str(workdir / "one_row.unc"),
            "--mode", "rc", "--eps", "0.1", "--kappa", "0.14"]
    assert main(args + ["-o", str(out1)]) == 0
    assert main(args + ["-o", str(out2)]) == 0
    assert out1.read_text() == out2.read_text()


def test_robustify_rc_cone_scale(workdir):
    out = workdir / "rc.txt"
    kappa = math.exp(-2.0)
    assert main(["robustify", str(workdir / "one_row.txt"),
                 str(workdir / "one_row.unc"), "--mode", "rc",
                 "--eps", "0.1", "--kappa", repr(kappa), "-o", str(out)]) == 0
    model = import_text(out.read_text())
    cone = model.constraint_by_label("cap__rc").cone
    assert cone.scale == pytest.approx(0.1 * 2.0, rel=1e-9)


def test_robustify_unknown_label_exit_one(workdir, capsys):
    (workdir / "bad.unc").write_text("nosuch x(bounded)\n")
    rc = main(["robustify", str(workdir / "one_row.txt"),
               str(workdir / "bad.unc"), "-o", str(workdir / "o.txt")])
    assert rc == 1
    assert "nosuch" in capsys.readouterr().err


def test_pipeline_consistency_matches_in_process(workdir):
    """robustify-to-file, reparse, solve == in-process robustify + solve."""
    from robustcounter.robustify import symmetric_robust_counterpart

    out = workdir / "rc.txt"
    assert main(["robustify", str(workdir / "one_row.txt"),
                 str(workdir / "one_row.unc"), "--mode", "rc",
                 "--eps", "0.1", "--delta", "0.05", "--kappa", "0.14",
                 "-o", str(out)]) == 0
    file_obj = solve(import_text(out.read_text())).objective
    model, uset = one_row_uncertain()
    memory_obj = solve(
        symmetric_robust_counterpart(model, uset, 0.1, 0.05, 0.14).model
    ).objective
    assert file_obj == pytest.approx(memory_obj, abs=1e-9)


def test_sitesel_nominal(workdir, capsys):
    rc = main(["sitesel", str(workdir / "hk_demo"), "--mode", "nominal"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "open sites" in out
    assert "budget used" in out


def test_sitesel_irc_infeasible_exit_two(workdir):
    rc = main(["sitesel", str(workdir / "hk_demo"), "--mode", "irc",
               "--eps", "0.6"])
    assert rc == 2


def test_sitesel_missing_file_exit_one(workdir, capsys):
    (workdir / "hk_demo" / "prob.csv").unlink()
    assert main(["sitesel", str(workdir / "hk_demo")]) == 1
    assert "prob.csv" in capsys.readouterr().err


def test_sitesel_json(workdir, capsys):
    rc = main(["sitesel", str(workdir / "hk_demo"), "--mode", "irc",
               "--eps", "0.05", "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert rc == 0
    assert set(payload) >= {"status", "objective", "open_sites", "budget_used"}


def test_grid_spec_parsing():
    grid = parse_grid_spec(["eps=0:0.05:0.1", "delta=0,0.1", "kappa=1"])
    eps_values = sorted({p[0] for p in grid})
    assert eps_values == [0.0, 0.05, 0.1]
    assert len(grid) == 6
    with pytest.raises(ValueError):
        parse_grid_spec([])
    with pytest.raises(ValueError):
        parse_grid_spec(["nonsense"])
    with pytest.raises(ValueError):
        parse_grid_spec(["gamma=1"])


def test_sweep_model_file(workdir, capsys):
    out = workdir / "sweep.csv"
    rc = main(["sweep", str(workdir / "one_row.txt"), "eps=0,0.05,0.1",
               "--annotations", str(workdir / "one_row.unc"),
               "--mode", "irc", "-o", str(out)])
    assert rc == 0
    rows = list(csv.DictReader(out.open()))
    # the grid already contains the nominal point (eps=0, defaults 0/1)
    assert len(rows) == 3
    assert (float(rows[0]["epsilon"]), float(rows[0]["kappa"])) == (0.0, 1.0)
    objs = [float(r["objective"]) for r in rows]
    assert all(a >= b - 1e-9 for a, b in zip(objs, objs[1:]))


def test_sweep_infeasible_cell_flagged_not_fatal(workdir):
    out = workdir / "sweep.csv"
    rc = main(["sweep", str(workdir / "hk_demo"), "eps=0,0.6", "--mode", "irc",
               "-o", str(out)])
    assert rc == 0
    rows = list(csv.DictReader(out.open()))
    statuses = {float(r["epsilon"]): r["status"] for r in rows}
    assert statuses[0.6] == "infeasible"
    assert statuses[0.0] == "optimal"


def test_sweep_bad_grid_exit_one(workdir):
    assert main(["sweep", str(workdir / "hk_demo"), "eps=oops",
                 "-o", str(workdir / "s.csv")]) == 1


def test_validate_corner_certified(workdir, tmp_path, capsys):
    sol_path = workdir / "sol.json"
    irc_path = workdir / "irc.txt"
    assert main(["robustify", str(workdir / "one_row.txt"),
                 str(workdir / "one_row.unc"), "--mode", "irc",
                 "--eps", "0.1", "-o", str(irc_path)]) == 0
    capsys.readouterr()  # discard the robustify report
    assert main(["solve", str(irc_path), "--json"]) == 0
    sol_path.write_text(capsys.readouterr().out)
    rc = main(["validate", str(workdir / "one_row.txt"),
               str(workdir / "one_row.unc"), "--solution", str(sol_path),
               "--eps", "0.1", "--corner"])
    assert rc == 0


def test_validate_nominal_not_certified(workdir, capsys):
    # without --solution the model's own optimum is validated
    rc = main(["validate", str(workdir / "one_row.txt"),
               str(workdir / "one_row.unc"), "--eps", "0.1", "--corner"])
    out = capsys.readouterr().out
    assert rc == 2
    assert "certified: no" in out


def test_validate_mc_reports_frequency(workdir, capsys):
    rc = main(["validate", str(workdir / "one_row.txt"),
               str(workdir / "one_row.unc"), "--eps", "0.1", "--mc", "5000",
               "--seed", "42", "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert rc == 0
    assert payload["samples"] == 5000
    assert 0.0 <= payload["frequency"] <= 1.0


def test_seed_env_default(workdir, monkeypatch, capsys):
    monkeypatch.setenv("ROBUSTCOUNTER_SEED", "777")
    rc = main(["validate", str(workdir / "one_row.txt"),
               str(workdir / "one_row.unc"), "--eps", "0.1", "--mc", "2000",
               "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert rc == 0
    assert payload["seed"] == 777


def test_usage_error_exit_one():
    assert main(["frobnicate"]) == 1


def test_sweep_parallel_matches_serial(workdir):
    args = ["sweep", str(workdir / "hk_demo"), "eps=0,0.05", "kappa=1,0.5",
            "--mode", "rc"]
    assert main(args + ["-o", str(workdir / "s1.csv")]) == 0
    assert main(args + ["--jobs", "2", "-o", str(workdir / "s2.csv")]) == 0
    assert (workdir / "s1.csv").read_text() == (workdir / "s2.csv").read_text()


def test_solve_node_limit_exit_four(workdir):
    write_instance(demo_instance(), workdir / "big")
    from robustcounter.model import export_text
    from robustcounter.sitesel import build_rc, load_instance

    model = build_rc(load_instance(workdir / "big"), 0.05, 0.0, 0.14)
    (workdir / "big_rc.txt").write_text(export_text(model))
    assert main(["solve", str(workdir / "big_rc.txt"), "--max-nodes", "1"]) == 4
