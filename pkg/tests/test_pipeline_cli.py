import csv
import hashlib
from pathlib import Path

import pytest

from beamrec import cli, pipeline
from beamrec.config import load_config
from beamrec.database import grid_from_area, position_label
from beamrec.scene import reference_coordinates

SMALL_CONFIG = """
[area]
x0 = 10.0
x_end = 30.0
y0 = -10.0
y_end = 10.0
ref_grid_n = 9

[scene]
seed = 5
n_clusters = 3
n_paths = 3
spread_min_m = 4.0
spread_max_m = 8.0

[codebook]
n_x = 3
n_y = 3
c_theta = 4
c_phi = 4

[survey]
k_op = 0.3 0.6
top_fraction = 0.5
seed = 2

[evaluate]
n_tr_fractions = 0.2 0.5
se_n_tr = 3
se_k_op = 0.6
p_t_dbm = 20 30

[recommend]
n_tr = 3

[smc_stage1]
max_iter = 150

[smc_stage2]
max_iter = 150
"""


@pytest.fixture()
def small_config(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL_CONFIG + f"\n[run]\nout_dir = {tmp_path / 'out'}\n")
    return path


def file_hashes(directory):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(Path(directory).glob("*.csv"))}


def test_run_writes_all_artifacts(small_config, tmp_path):
    cfg = load_config(small_config)
    out = tmp_path / "out"
    written = pipeline.run(cfg, out)
    names = {Path(p).name for p in written}
    assert names == {
        "scene.txt",
        "measurements_kop30.csv", "measurements_kop60.csv",
        "completed_kop30.csv", "completed_kop60.csv",
        "recommendations_kop30.csv", "recommendations_kop60.csv",
        "results_ppl.csv", "results_se.csv",
    }
    for p in written:
        assert Path(p).exists()


def test_run_is_byte_deterministic(small_config, tmp_path):
    cfg = load_config(small_config)
    pipeline.run(cfg, tmp_path / "a")
    pipeline.run(cfg, tmp_path / "b")
    assert file_hashes(tmp_path / "a") == file_hashes(tmp_path / "b")
    assert (tmp_path / "a" / "scene.txt").read_bytes() == \
        (tmp_path / "b" / "scene.txt").read_bytes()


def test_stage_requires_predecessor(small_config, tmp_path):
    cfg = load_config(small_config)
    out = tmp_path / "fresh"
    with pytest.raises(FileNotFoundError, match="scene.txt"):
        pipeline.stage_survey(cfg, out)
    with pytest.raises(FileNotFoundError, match="measurements_kop30"):
        pipeline.stage_complete(cfg, out)


def test_stages_compose(small_config, tmp_path):
    cfg = load_config(small_config)
    out = tmp_path / "staged"
    pipeline.stage_scene_gen(cfg, out)
    pipeline.stage_survey(cfg, out)
    pipeline.stage_complete(cfg, out)
    pipeline.stage_recommend(cfg, out)
    pipeline.stage_evaluate(cfg, out)
    assert (out / "results_ppl.csv").exists()

    # staged execution equals the one-shot run byte for byte
    one_shot = tmp_path / "oneshot"
    pipeline.run(cfg, one_shot)
    assert file_hashes(out) == file_hashes(one_shot)


def test_recommendations_cover_every_position(small_config, tmp_path):
    cfg = load_config(small_config)
    out = tmp_path / "out"
    pipeline.run(cfg, out)
    grid = grid_from_area(cfg.area, cfg.delta_s)
    with open(out / "recommendations_kop30.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    positions = {(int(r["p_x"]), int(r["p_y"])) for r in rows}
    assert positions == set(grid.all_labels())
    for r in rows:
        assert r["source"] == "tensor-completion"
    per_position = {}
    for r in rows:
        per_position.setdefault((r["p_x"], r["p_y"]), []).append(int(r["rank"]))
    assert all(sorted(v) == [1, 2, 3] for v in per_position.values())


def test_results_have_expected_sweeps(small_config, tmp_path):
    cfg = load_config(small_config)
    out = tmp_path / "out"
    pipeline.run(cfg, out)
    with open(out / "results_ppl.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["method"] for r in rows} == {
        "tensor-completion", "fingerprint", "exhaustive"}
    assert {float(r["k_op"]) for r in rows} == {0.3, 0.6}
    assert {float(r["n_tr_fraction"]) for r in rows} == {0.2, 0.5}
    for r in rows:
        assert 0.0 <= float(r["p_pl"]) <= 1.0
        if r["method"] == "exhaustive":
            assert float(r["p_pl"]) == 0.0
    with open(out / "results_se.csv", newline="") as fh:
        se_rows = list(csv.DictReader(fh))
    assert {float(r["p_t_dbm"]) for r in se_rows} == {20.0, 30.0}
    assert all(float(r["se_bps_hz"]) > 0 for r in se_rows)


def test_eval_coords_are_unobserved_positions_only(small_config):
    cfg = load_config(small_config)
    grid = grid_from_area(cfg.area, cfg.delta_s)
    refs = reference_coordinates(cfg.area)
    observed = {(1, 1), (2, 3)}
    coords = pipeline._eval_coords(refs, grid, observed)
    assert coords  # something left to evaluate
    for g in coords:
        assert position_label(grid, g) not in observed
    expected = sum(1 for g in refs if position_label(grid, g) not in observed)
    assert len(coords) == expected


def test_run_cleans_up_on_failure(small_config, tmp_path):
    cfg = load_config(small_config)
    from dataclasses import replace
    bad = replace(cfg, evaluate=replace(cfg.evaluate, se_k_op=0.9))
    out = tmp_path / "failing"
    with pytest.raises(pipeline.StageError, match="evaluate"):
        pipeline.run(bad, out)
    assert list(out.glob("*.csv")) == []
    assert not (out / "scene.txt").exists()


def test_cli_full_run_and_exit_codes(small_config, tmp_path, capsys):
    out = tmp_path / "cli_out"
    assert cli.main(["run", "--config", str(small_config),
                     "--out", str(out)]) == 0
    assert (out / "results_se.csv").exists()
    captured = capsys.readouterr()
    assert "results_ppl.csv" in captured.out


def test_cli_missing_predecessor_names_stage_and_file(small_config, tmp_path,
                                                      capsys):
    out = tmp_path / "cli_stage"
    code = cli.main(["survey", "--config", str(small_config),
                     "--out", str(out)])
    captured = capsys.readouterr()
    assert code == 1
    assert "survey" in captured.err
    assert "scene.txt" in captured.err


def test_cli_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[nonsense]\nx = 1\n")
    assert cli.main(["run", "--config", str(bad)]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_seed_override_changes_scene(small_config, tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert cli.main(["scene-gen", "--config", str(small_config),
                     "--out", str(out_a), "--seed", "100"]) == 0
    assert cli.main(["scene-gen", "--config", str(small_config),
                     "--out", str(out_b), "--seed", "200"]) == 0
    assert (out_a / "scene.txt").read_text() != \
        (out_b / "scene.txt").read_text()


def test_cli_workers_flag_keeps_outputs_identical(small_config, tmp_path):
    serial = tmp_path / "serial"
    threaded = tmp_path / "threaded"
    assert cli.main(["run", "--config", str(small_config),
                     "--out", str(serial)]) == 0
    assert cli.main(["run", "--config", str(small_config),
                     "--out", str(threaded), "--workers", "3"]) == 0
    assert file_hashes(serial) == file_hashes(threaded)


def test_cli_plot_writes_figures(small_config, tmp_path):
    out = tmp_path / "plots"
    assert cli.main(["run", "--config", str(small_config), "--out", str(out),
                     "--plot"]) == 0
    assert (out / "ppl_vs_fraction.png").exists()
    assert (out / "se_vs_pt.png").exists()


def test_tc_beats_exhaustive_throughput_at_small_scale(small_config,
                                                       tmp_path):
    cfg = load_config(small_config)
    out = tmp_path / "out"
    pipeline.run(cfg, out)
    with open(out / "results_se.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    by_power = {}
    for r in rows:
        by_power.setdefault(float(r["p_t_dbm"]), {})[r["method"]] = \
            float(r["se_bps_hz"])
    for p_t, methods in by_power.items():
        assert methods["tensor-completion"] > methods["exhaustive"]
