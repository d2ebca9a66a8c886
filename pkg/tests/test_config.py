import pytest

from beamrec.config import ConfigError, ExperimentConfig, load_config


def test_defaults_are_full_scale():
    cfg = ExperimentConfig()
    assert (cfg.area.x0, cfg.area.x_end) == (10.0, 60.0)
    assert (cfg.area.y0, cfg.area.y_end) == (-25.0, 25.0)
    assert cfg.area.ref_grid_n == 51
    assert cfg.delta_s == 5.0
    assert (cfg.c_theta, cfg.c_phi) == (16, 16)
    assert (cfg.geometry.n_x, cfg.geometry.n_y) == (16, 16)
    assert cfg.survey.top_fraction == 0.1
    assert cfg.survey.k_ops == (0.2, 0.4)
    assert cfg.link.bandwidth_hz == 1.76e9
    assert cfg.link.carrier_hz == 58.68e9
    assert cfg.timing.microslot_s == 10e-6
    assert cfg.timing.frame_s == 5e-3


def test_load_config_overrides(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("""
[grid]
delta_s = 2.5

[codebook]
n_x = 8
n_y = 4
c_theta = 8
c_phi = 8

[survey]
k_op = 0.1 0.3 0.5
seed = 99

[smc_stage2]
gamma = 2.5
max_iter = 77

[run]
out_dir = /tmp/nowhere
workers = 3
""")
    cfg = load_config(path)
    assert cfg.delta_s == 2.5
    assert (cfg.geometry.n_x, cfg.geometry.n_y) == (8, 4)
    assert cfg.survey.k_ops == (0.1, 0.3, 0.5)
    assert cfg.survey.seed == 99
    assert cfg.smc_stage2.gamma == 2.5
    assert cfg.smc_stage2.max_iter == 77
    assert cfg.smc_stage1.gamma == 1.0  # untouched stage keeps defaults
    assert cfg.out_dir == "/tmp/nowhere"
    assert cfg.workers == 3


def test_load_config_inline_comments(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("[grid]\ndelta_s = 4.0  # coarse grid\n")
    assert load_config(path).delta_s == 4.0


def test_unknown_section_is_error(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("[gird]\ndelta_s = 4.0\n")
    with pytest.raises(ConfigError, match="gird"):
        load_config(path)


def test_unknown_field_is_error(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("[grid]\ndelta = 4.0\n")
    with pytest.raises(ConfigError, match="delta"):
        load_config(path)


def test_bad_value_names_section_and_field(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("[survey]\ntop_fraction = lots\n")
    with pytest.raises(ConfigError, match=r"\[survey\] top_fraction"):
        load_config(path)


def test_bad_bool_is_error(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("[scene]\ninclude_los = maybe\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_invalid_parameter_combination_is_config_error(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("[smc_stage1]\nlam = 0.0\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_with_seed_overrides_both_streams():
    cfg = ExperimentConfig().with_seed(123)
    assert cfg.scene.seed == 123
    assert cfg.survey.seed == 124
