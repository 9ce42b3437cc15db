"""
Unit tests for key = value configuration files, presets and merge order
"""
import math

import pytest

from src.errors import ConfigError
from src.models.experiment import PRESETS, build_config, load_config, parse_key_values


def test_parse_key_values_skips_comments():
    text = """
    # fig1 run
    K = 1.0
    Delta = -0.2   # negative detuning

    portrait_pumps = 1, 3
    """
    assert parse_key_values(text) == {"K": "1.0", "Delta": "-0.2", "portrait_pumps": "1, 3"}


@pytest.mark.parametrize("text", ["K 1.0", "= 3", "K = 1\nK = 2"])
def test_parse_key_values_errors(text):
    with pytest.raises(ConfigError):
        parse_key_values(text)


def test_merge_order():
    """Test defaults < preset < experiment defaults < file < overrides"""
    config = build_config(
        "fig3",
        {"xi0": "0.4", "seed": "5"},
        preset="desk",
        overrides={"seed": 9, "output_dir": None},
        defaults={"seed": 1, "output_dir": "out", "two_mode_cutoff": 3},
    )
    assert config.xi0 == 0.4
    assert config.seed == 9
    assert config.output_dir == "out"
    assert config.two_mode_cutoff == PRESETS["desk"]["two_mode_cutoff"]
    assert config.J == [[0.0, 1.0], [1.0, 0.0]]


def test_presets_differ():
    desk = build_config("fig4")
    paper = build_config("fig4", preset="paper")
    assert desk.instances == 50 and paper.instances == 100
    assert desk.n_traj < paper.n_traj
    assert desk.xi0 == 0.25
    assert desk.bench_leakage_tolerance == 5e-2


def test_lists_and_row_major_couplings():
    config = build_config("fig1", {"portrait_pumps": "0.5, 2", "J": "0 1 1 0", "models": "cCIM, qQbM"})
    assert config.portrait_pumps == [0.5, 2.0]
    assert config.J == [[0.0, 1.0], [1.0, 0.0]]
    assert config.models == ["cCIM", "qQbM"]
    with pytest.raises(ConfigError, match="square"):
        build_config("fig1", {"J": "0 1 1"})


def test_kind_requires_its_keys():
    """Test a declared model block must be complete"""
    with pytest.raises(ConfigError, match="missing required key\\(s\\): xi0, J"):
        build_config("fig3", {"kind": "qbm", "K": "1", "Delta": "1"})
    with pytest.raises(ConfigError, match="unknown model kind"):
        build_config("fig1", {"kind": "laser"})
    config = build_config("fig1", {"kind": "opo", "kappa": "0.5", "kappa2": "2"})
    assert config.model_spec("opo").kappa == 0.5


def test_unknown_and_invalid_values():
    with pytest.raises(ConfigError, match="unknown experiment"):
        build_config("fig9")
    with pytest.raises(ConfigError, match="unknown preset"):
        build_config("fig1", preset="huge")
    with pytest.raises(ConfigError, match="invalid configuration"):
        build_config("fig1", {"colour": "blue"})
    with pytest.raises(ConfigError, match="t_final"):
        build_config("fig1", {"t_final": "-1"})


def test_model_spec_keeps_only_relevant_keys():
    config = build_config("fig2", {"cutoff": "20"})
    kpo = config.model_spec("kpo", Delta=-1.0)
    assert kpo.Delta == -1.0
    assert kpo.kappa is None
    assert kpo.cutoff == 20
    opo = config.model_spec("opo")
    assert opo.K is None and opo.kappa2 == 1.0


def test_gates_defaults():
    config = build_config("gates")
    assert config.Delta == 0.0
    assert config.uzz_angle == pytest.approx(math.pi / 4)
    assert config.snapshot()["experiment"] == "gates"


def test_load_config_from_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("circuit_preset = scaled\nphi_dc = 0.3\n")
    config = load_config("circuit", path)
    assert config.circuit_preset == "scaled"
    assert config.phi_dc == 0.3
    with pytest.raises(ConfigError, match="not found"):
        load_config("circuit", tmp_path / "missing.cfg")
