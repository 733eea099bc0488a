import json
import subprocess
import sys

import numpy as np
import pytest

from plrg import cli, harness
from plrg.errors import InvalidParameterError, NumericError
from plrg.graphon import GraphonGrid
from plrg.harness import ExperimentConfig, emit_plot_data, run


def _cfg(tmp_path, **kw):
    base = dict(experiment="regimes", gamma=(1.5, 2.0, 3.0), output_dir=str(tmp_path))
    base.update(kw)
    return ExperimentConfig(**base)


def test_regimes_csv(tmp_path):
    assert run(_cfg(tmp_path)) == 0
    lines = (tmp_path / "regimes.csv").read_text().splitlines()
    assert lines[0] == ",".join(harness.CSV_COLUMNS)
    assert [ln.split(",")[1] for ln in lines[1:]] == ["sub-critical", "super-critical", "super-critical"]
    man = json.loads((tmp_path / "regimes.manifest.json").read_text())
    assert man["seed"] == 0 and man["version"] and "wall_time_s" in man
    assert man["config"]["gamma"] == [1.5, 2.0, 3.0]


@pytest.mark.parametrize("bad", [
    dict(experiment="nope"), dict(reps=0), dict(n_list=()), dict(x_grid=(0.5, 1.0)), dict(seed=-1),
    dict(method="fancy"), dict(threads=0),
])
def test_invalid_config_exit_1(tmp_path, bad):
    base = dict(experiment="regimes", output_dir=str(tmp_path))
    base.update(bad)
    assert run(base) == 1


def test_region_error_is_config_error(tmp_path):
    assert run(_cfg(tmp_path, experiment="supercritical", gamma=(1.5,), reps=10)) == 1


def test_numeric_failure_exit_2(tmp_path, monkeypatch):
    def boom(cfg):
        raise NumericError("no bracket")
    monkeypatch.setitem(harness.RUNNERS, "regimes", boom)
    assert run(_cfg(tmp_path)) == 2


def test_check_failure_exit_3(tmp_path):
    # 30 replicates cannot pin a variance to 15%
    cfg = _cfg(tmp_path, experiment="height", gamma=(1.0,), n_list=(10**4,), reps=30)
    assert run(cfg, check=False) == 0
    assert run(cfg, check=True) == 3


@pytest.mark.parametrize("experiment,kw", [
    ("motifs", dict(alpha=1.5, gamma=(1.5,), n_list=(500,), reps=3000, method="importance")),
    ("edges_vertices", dict(gamma=(1.2,), n_list=(256, 512, 1024), reps=50)),
    ("supercritical", dict(gamma=(2.5,), n_list=(1000,), reps=3000)),
    ("graphex", dict(n_list=(2, 3), reps=50)),
    ("height", dict(gamma=(1.0,), n_list=(10**4,), reps=40)),
    ("graphon", dict(alpha=1.5, gamma=(1.5,), n_list=(300, 1000), reps=20)),
    ("bernoulli", dict(gamma=(3.0,), n_list=(500,), reps=200)),
    ("regimes", dict(gamma=(1.5, 3.0))),
])
def test_every_experiment_byte_identical_across_threads(tmp_path, experiment, kw):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(ExperimentConfig(experiment=experiment, output_dir=str(a), threads=1, seed=5, **kw)) == 0
    assert run(ExperimentConfig(experiment=experiment, output_dir=str(b), threads=4, seed=5, **kw)) == 0
    assert (a / f"{experiment}.csv").read_bytes() == (b / f"{experiment}.csv").read_bytes()
    man = json.loads((a / f"{experiment}.manifest.json").read_text())
    # regimes is analytic and draws nothing
    assert bool(man["sub_seeds"]) == (experiment != "regimes")


def test_height_rows_and_plot_files(tmp_path):
    cfg = _cfg(tmp_path, experiment="height", gamma=(1.0,), n_list=(10**4,), reps=20)
    run(cfg)
    rows = (tmp_path / "height.csv").read_text().splitlines()
    assert any(r.split(",")[1].startswith("cov(") for r in rows)
    cov = tmp_path / "height_cov_gamma1.0_n10000.csv"
    assert cov.read_text().splitlines()[0] == "x,y,emp_cov,target_cov,n,reps"
    assert (tmp_path / "height_boundary_gamma1.0_n10000.boundary.txt").exists()


def test_emit_plot_data(tmp_path):
    w = GraphonGrid(np.eye(3))
    (p,) = emit_plot_data(w, "graphon_heatmap", tmp_path, "w")
    assert np.loadtxt(p).shape == (3, 3)
    with pytest.raises(InvalidParameterError):
        emit_plot_data(w, "pie_chart", tmp_path)
    with pytest.raises(InvalidParameterError):
        emit_plot_data(w, "cov_matrix", tmp_path)


def test_config_file_and_cli(tmp_path, monkeypatch):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"experiment": "regimes", "gamma": [1.5, 3.0], "output_dir": str(tmp_path / "o")}))
    assert cli.main(["run", "--config", str(conf)]) == 0
    assert (tmp_path / "o" / "regimes.csv").exists()
    conf.write_text(json.dumps({"experiment": "regimes", "colour": 1}))
    assert cli.main(["run", "--config", str(conf)]) == 1
    monkeypatch.setenv("PLRG_SEED", "77")
    assert cli.build_parser().parse_args(["regimes"]).seed == 77
    out = tmp_path / "cli"
    assert cli.main(["regimes", "--gamma", "1.5,2,3", "--out", str(out), "--check"]) == 0
    assert len((out / "regimes.csv").read_text().splitlines()) == 4


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "plrg", "regimes", "--gamma", "3", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "regimes.csv").exists()
