import filecmp
import json
import os
import shutil
import subprocess
import sys

import numpy as np
import pytest

from ulamnet import io
from ulamnet.cli import main
from ulamnet.config import PRESETS, ExperimentConfig, preset_config
from ulamnet.maps import MapSpec

SMALL_RUNS = {
    "build": ["build", "--n", "40", "--nc", "500"],
    "links": ["links", "--n", "300", "--nc", "200"],
    "pagerank": ["pagerank", "--n", "200", "--nc", "500", "--alpha", "1", "0.85"],
    "trajectory": ["pagerank", "--n", "200", "--alpha", "1", "--method", "trajectory",
                   "--t-iters", "20000", "--burn-in", "100", "--n-traj", "4"],
    "spectrum": ["spectrum", "--n", "150", "--nc", "500", "--alpha", "1", "--vectors"],
    "leading": ["spectrum", "--n", "400", "--nc", "500", "--alpha", "1", "--k", "3", "--vectors"],
    "gapstudy": ["gapstudy", "--n", "100", "200", "--nc", "500"],
    "scan": ["scan", "--a", "0.9", "0.96", "--alpha", "0.8", "1", "--n", "200", "--nc", "300"],
}


def run(tmp_path, args, name="out"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, out


def snapshot(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "timing.json"}


@pytest.mark.parametrize("name", sorted(PRESETS))
@pytest.mark.parametrize("full", [False, True])
def test_presets_valid_and_round_trip(name, full):
    cfg = preset_config(name, full)
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    assert cfg.command in {"build", "links", "pagerank", "spectrum", "gapstudy", "scan"}


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"command": "build", "bogus": 1})


def test_config_hash_ignores_output_dir():
    a = ExperimentConfig("build", output_dir="x")
    b = ExperimentConfig("build", output_dir="y")
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != ExperimentConfig("build", seed=1).config_hash()


@pytest.mark.parametrize("name", sorted(SMALL_RUNS))
def test_commands_are_byte_reproducible(tmp_path, name):
    code, out = run(tmp_path, SMALL_RUNS[name])
    assert code == 0
    first = snapshot(out)
    shutil.rmtree(out)
    code, out = run(tmp_path, SMALL_RUNS[name])
    assert code == 0
    assert snapshot(out) == first
    assert (out / "timing.json").exists() or name in {"links", "gapstudy", "scan"}


def test_fig2_preset(tmp_path):
    code, out = run(tmp_path, ["build", "--preset", "fig2"])
    assert code == 0
    net = io.read_network(out / "network_n50.ulam")
    assert net.n_cells == 50
    meta = json.loads((out / "network_n50.json").read_text())
    assert meta["nc"] == 1_000_000 and meta["seed"] == 42 and meta["map"]["model"] == "f1"


def test_validation_exit_code(tmp_path, capsys):
    assert run(tmp_path, ["build", "--n", "1"])[0] == 2
    assert run(tmp_path, ["pagerank", "--preset", "fig2"])[0] == 2
    assert run(tmp_path, ["spectrum", "--n", "5000", "--nc", "10"])[0] == 2
    assert run(tmp_path, ["pagerank", "--n", "50", "--alpha", "0.5", "--method", "trajectory"])[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["build", "--map", "f7"])
    assert exc.value.code == 2


def test_nonconvergence_exit_code(tmp_path):
    code, out = run(tmp_path, ["pagerank", "--n", "300", "--nc", "500", "--alpha", "1",
                               "--method", "power", "--max-iter", "3"])
    assert code == 3
    rec = json.loads((out / "rank_z2_n300_a1.json").read_text())
    assert rec["meta"]["converged"] is False


def test_pagerank_alpha_zero_uniform(tmp_path):
    code, out = run(tmp_path, ["pagerank", "--n", "100", "--nc", "100", "--alpha", "0"])
    assert code == 0
    p = io.read_rank(out / "rank_z2_n100_a0.csv")
    assert np.allclose(p, 0.01)
    header, _ = io.read_csv(out / "rank_z2_n100_a0.csv")
    assert header == ["rank", "cell", "probability"]
    assert (out / "rank_z2_n100_a0.csv").read_text().startswith("# config_sha256=")


def test_spectrum_leading_eigenvalue(tmp_path):
    code, out = run(tmp_path, ["spectrum", "--n", "400", "--nc", "1000", "--alpha", "1", "--k", "1"])
    assert code == 0
    header, rows = io.read_csv(out / "spectrum_n400_a1.csv")
    assert header == ["re", "im", "gamma", "par"]
    assert abs(float(rows[0][0]) - 1) <= 1e-9
    header, _ = io.read_csv(out / "dos_n400_a1.csv")
    assert header == ["gamma_lo", "gamma_hi", "density"]


def test_scan_output(tmp_path):
    code, out = run(tmp_path, SMALL_RUNS["scan"])
    header, rows = io.read_csv(out / "scan.csv")
    assert header == ["a", "alpha", "par", "beta"]
    assert len(rows) == 4
    single = run(tmp_path, ["scan", "--a", "0.9", "--alpha", "0.8", "--n", "100", "--nc", "100"],
                 "single")[1]
    assert len(io.read_csv(single / "scan.csv")[1]) == 1


def test_network_file_input(tmp_path):
    _, built = run(tmp_path, ["build", "--n", "60", "--nc", "300"], "b")
    code, out = run(tmp_path, ["pagerank", "--n", "60", "--alpha", "0.85",
                               "--network", str(built / "network_n60.ulam")])
    assert code == 0
    code2, out2 = run(tmp_path, ["pagerank", "--n", "60", "--nc", "300", "--alpha", "0.85"], "c")
    assert np.allclose(io.read_rank(out / "rank_z2_n60_a0.85.csv"),
                       io.read_rank(out2 / "rank_z2_n60_a0.85.csv"), atol=1e-15)


def test_links_and_gap_outputs(tmp_path):
    code, out = run(tmp_path, SMALL_RUNS["links"])
    rec = json.loads((out / "links_fit_n300.json").read_text())
    assert rec["theory"]["mu_out"] == pytest.approx(2.25)
    code, out = run(tmp_path, SMALL_RUNS["gapstudy"], "g")
    header, rows = io.read_csv(out / "gap.csv")
    assert header == ["n", "gap", "gap_times_n"] and len(rows) == 2
    assert "slope" in json.loads((out / "gap_fit.json").read_text())


@pytest.mark.parametrize("name", ["trajectory", "leading", "scan", "spectrum"])
def test_thread_count_independence(tmp_path, name):
    outs = []
    for threads in (1, 4):
        out = tmp_path / f"t{threads}"
        env = dict(os.environ, OMP_NUM_THREADS=str(threads), OPENBLAS_NUM_THREADS=str(threads),
                   NUMBA_NUM_THREADS=str(threads))
        res = subprocess.run([sys.executable, "-m", "ulamnet.cli", *SMALL_RUNS[name],
                              "--threads", str(threads), "--out", "out"],
                             cwd=tmp_path, env=env, capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        shutil.move(str(tmp_path / "out"), out)
        outs.append(snapshot(out))
    assert outs[0] == outs[1]
