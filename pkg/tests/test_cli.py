import json
import os

import numpy as np
import pytest

from saddleflow import cli, experiments
from saddleflow.config import ConfigError, load_config, validate
from saddleflow.experiments import (TrajectoryRecord, build_experiment, cached_reference,
                                    run_experiment)
from saddleflow.plotting import loglog_svg

CORE = {
    "experiment": "core", "seed": 0,
    "instance": {"family": "quadratic", "p": 2, "q": 2},
    "flow": {"r": 2, "delta": 1e-3},
    "integrator": {"t_end": 20, "samples": 40, "rtol": 1e-7},
}
DISTOPT = {
    "experiment": "distopt", "seed": 1,
    "instance": {"n": 3, "p": 2, "m_i": 3},
    "integrator": {"t_end": 5, "samples": 20, "rtol": 1e-6, "atol": 1e-8},
    "oracle": {"tol": 1e-8},
}


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(tmp_path, cfg, out="out", env=None, monkeypatch=None):
    path = write(tmp_path, cfg)
    outdir = tmp_path / out
    code = cli.main(["run", path, "-o", str(outdir), "-q"])
    return code, outdir


# ---------------------------------------------------------------- config


@pytest.mark.parametrize("bad", [
    {"experiment": "core", "colour": 1},
    {"experiment": "core", "flow": {"r": 2, "beta": 1}},
    {"experiment": "core", "instance": {"p": 2, "rank": 3}},
    {"experiment": "distopt", "instance": {"n1": 3}},
    {"experiment": "heat"},
    {"seed": 1},
    {"experiment": "core", "flow": {"r": 1.0}},
    {"experiment": "core", "integrator": {"rtol": -1}},
    {"experiment": "core", "integrator": {"samples": [1.0, 0.5, 2.0]}},
    {"experiment": "core", "instance": {"F": {"A": [[1]], "b": [0]}}},
    {"experiment": "zerosum", "instance": {"family": "quadratic"}},
])
def test_validate_rejects(bad):
    with pytest.raises(ConfigError):
        validate(bad)


def test_validate_accepts_examples():
    here = os.path.dirname(__file__)
    for name in ("core", "distopt", "zerosum"):
        cfg = load_config(os.path.join(here, "..", "configs", f"{name}.json"), env={})
        assert cfg["experiment"] == name


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(str(arr))


def test_seed_override(tmp_path):
    path = write(tmp_path, CORE)
    assert load_config(path, env={"SADDLEFLOW_SEED": "17"})["seed"] == 17
    assert load_config(path, env={})["seed"] == 0
    with pytest.raises(ConfigError):
        load_config(path, env={"SADDLEFLOW_SEED": "abc"})


def test_toml_front_end(tmp_path):
    pytest.importorskip("tomli")
    path = tmp_path / "cfg.toml"
    path.write_text('experiment = "core"\nseed = 3\n[integrator]\nt_end = 5.0\n')
    assert load_config(str(path), env={})["seed"] == 3


# ---------------------------------------------------------------- experiments


def test_core_columns_and_summary(tmp_path):
    code, out = run(tmp_path, CORE)
    assert code == 0
    acc = TrajectoryRecord.from_csv(out / "accelerated.csv")
    base = TrajectoryRecord.from_csv(out / "baseline.csv")
    assert list(acc.columns) == ["t", "gap", "lyapunov", "feas_x", "feas_y"]
    assert list(base.columns) == ["t", "gap", "feas_x", "feas_y"]
    assert np.all(np.diff(acc.times) > 0)
    assert all(np.all(np.isfinite(c)) for c in acc.columns.values())
    summary = json.loads((out / "summary.json").read_text())
    assert summary["oracle"]["method"] == "analytic_kkt"
    assert summary["slope_accelerated"] < summary["slope_baseline"]
    inst = json.loads((out / "instance.json").read_text())
    assert len(inst["data"]["H"]) == 2


def test_distopt_columns(tmp_path):
    code, out = run(tmp_path, DISTOPT)
    assert code == 0
    acc = TrajectoryRecord.from_csv(out / "accelerated.csv")
    assert list(acc.columns) == ["t", "gap", "lyapunov", "feas_x", "feas_y", "consensus1",
                                 "subopt"]
    assert np.all(acc.columns["feas_x"] <= 1e-8)
    inst = json.loads((out / "instance.json").read_text())
    assert "graph" in inst["data"] and "features" in inst["data"]


def test_zerosum_columns():
    cfg = {"experiment": "zerosum", "seed": 2, "baseline": False,
           "integrator": {"t_end": 2, "samples": 10, "rtol": 1e-6}}
    exp = build_experiment(validate(cfg))
    recs = run_experiment(exp, experiments.solve_reference(exp))
    assert list(recs) == ["accelerated"]
    assert {"consensus1", "consensus2", "subopt"} <= set(recs["accelerated"].columns)


def test_reproducible_bytes_and_seed_env(tmp_path, monkeypatch):
    _, a = run(tmp_path, CORE, "a")
    _, b = run(tmp_path, CORE, "b")
    for name in ("accelerated.csv", "baseline.csv", "summary.json", "instance.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    monkeypatch.setenv("SADDLEFLOW_SEED", "5")
    _, c = run(tmp_path, CORE, "c")
    assert (a / "accelerated.csv").read_bytes() != (c / "accelerated.csv").read_bytes()
    assert json.loads((c / "summary.json").read_text())["seed"] == 5


def test_workers_do_not_change_output(tmp_path):
    exp = build_experiment(validate(dict(CORE)))
    ref = experiments.solve_reference(exp)
    serial = run_experiment(exp, ref, workers=1)
    threaded = run_experiment(exp, ref, workers=2)
    for m in serial:
        for k in serial[m].columns:
            assert np.array_equal(serial[m].columns[k], threaded[m].columns[k])


def test_csv_round_trip_is_exact(tmp_path):
    vals = np.array([1 / 3, 1e-300, 2.5e17, np.pi])
    rec = TrajectoryRecord("x", {"t": np.arange(1.0, 5.0), "gap": vals})
    rec.to_csv(tmp_path / "r.csv")
    back = TrajectoryRecord.from_csv(tmp_path / "r.csv")
    assert np.array_equal(back.columns["gap"], vals)


def test_reference_cache(tmp_path, monkeypatch):
    exp = build_experiment(validate(dict(DISTOPT)))
    path = tmp_path / "reference.json"
    ref = cached_reference(exp, path)

    def boom(_):
        raise AssertionError("cache miss")

    monkeypatch.setattr(experiments, "solve_reference", boom)
    again = cached_reference(exp, path)
    assert np.array_equal(again.x_star, ref.x_star)
    other = build_experiment(validate(dict(DISTOPT, seed=2)))
    with pytest.raises(AssertionError):
        cached_reference(other, path)


def test_explicit_and_constrained_core(tmp_path):
    cfg = {"experiment": "core", "instance": {
        "F": {"A": [[1.0]], "b": [-1.0]}, "G": {"A": [[1.0]], "b": [-1.0]}, "H": [[1.0]]},
        "integrator": {"t_end": 5, "samples": 10}}
    exp = build_experiment(validate(cfg))
    ref = experiments.solve_reference(exp)
    assert np.allclose([ref.x_star[0], ref.y_star[0]], [0.0, 1.0])
    cfg = {"experiment": "core", "seed": 3, "instance": {
        "p": 3, "q": 2, "X": {"mirror": "entropy", "dim": 3},
        "Y": {"mirror": "euclidean", "set": {"kind": "ball", "center": [0, 0], "radius": 0.5}}},
        "integrator": {"t_end": 5, "samples": 10, "rtol": 1e-6}}
    code, out = run(tmp_path, cfg)
    assert code == 0
    acc = TrajectoryRecord.from_csv(out / "accelerated.csv")
    assert np.all(acc.columns["feas_x"] <= 1e-8) and np.all(acc.columns["feas_y"] <= 1e-8)


# ---------------------------------------------------------------- exit codes


def test_malformed_json_exit_2_without_outputs(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{")
    out = tmp_path / "never"
    assert cli.main(["run", str(path), "-o", str(out)]) == 2
    assert not out.exists()
    assert cli.main(["run", write(tmp_path, {"experiment": "core", "extra": 1}),
                     "-o", str(out)]) == 2
    assert not out.exists()


def test_oracle_failure_exit_3(tmp_path):
    code, _ = run(tmp_path, dict(DISTOPT, oracle={"tol": 1e-12, "max_iter": 3}))
    assert code == 3


def test_blow_up_exit_4_with_partial_csv(tmp_path):
    cfg = dict(CORE, integrator={"t_end": 20, "samples": 40, "max_steps": 60})
    code, out = run(tmp_path, cfg)
    assert code == 4
    acc = TrajectoryRecord.from_csv(out / "accelerated.csv")
    assert 0 < acc.times.shape[0] < 40
    summary = json.loads((out / "summary.json").read_text())
    assert "DivergenceError" in summary["flows"]["accelerated"]["error"]


# ---------------------------------------------------------------- plot and rate


def test_plot_and_rate(tmp_path, capsys):
    _, out = run(tmp_path, CORE)
    svg = tmp_path / "fig.svg"
    csvs = [str(out / "accelerated.csv"), str(out / "baseline.csv")]
    assert cli.main(["plot", *csvs, "-o", str(svg)]) == 0
    text = svg.read_text()
    assert text.count('class="curve"') == 2 and text.count('class="guide"') == 2
    svg2 = tmp_path / "fig2.svg"
    cli.main(["plot", *csvs, "-o", str(svg2)])
    assert svg2.read_bytes() == svg.read_bytes()
    cli.main(["plot", csvs[0], "-o", str(svg2)])
    assert svg2.read_text().count('class="curve"') == 1

    capsys.readouterr()
    assert cli.main(["rate", csvs[0], "--column", "gap"]) == 0
    fit = json.loads(capsys.readouterr().out)
    summary = json.loads((out / "summary.json").read_text())
    assert fit["slope"] == pytest.approx(summary["slope_accelerated"], rel=1e-12)


def test_plot_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert cli.main(["plot", str(empty), "-o", str(tmp_path / "x.svg")]) == 2
    nogap = tmp_path / "nogap.csv"
    nogap.write_text("t,subopt\n1.0,2.0\n2.0,1.0\n")
    assert cli.main(["plot", str(nogap), "-o", str(tmp_path / "x.svg")]) == 2
    assert cli.main(["rate", str(nogap), "--column", "gap"]) == 2
    assert not (tmp_path / "x.svg").exists()


def test_loglog_svg_guides_pass_through_anchor():
    t = np.geomspace(1, 100, 10)
    svg = loglog_svg([("a", t, t ** -2.0)])
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    with pytest.raises(ValueError):
        loglog_svg([("a", [1.0], [1.0])])
