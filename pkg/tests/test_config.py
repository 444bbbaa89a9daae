import pathlib

import pytest

from atcopt import config, exception, modes

k_example_dir = pathlib.Path(__file__).resolve().parent.parent/"docs"/"examples"


def test_defaults_valid():
    cfg = config.StudyConfig()
    config.validate_config(cfg)
    assert cfg.reference_radius() == 4*16**2
    assert cfg.reference_radius([6]) == 4*36
    assert cfg.domains(4, kappa=2).r_c == 64
    assert not cfg.potential.site_model().is_homogeneous


def test_config_from_dict():
    cfg = config.config_from_dict({
        "potential": {"homogeneous": True, "weights": [1, 0.2]},
        "geometry": {"ladder": [6, 8], "kappa": 1},
        "solver": {"init": "predictor", "max_outer": 5, "tol_outer": 1e-6},
        "study": {"analysis_ladder": [], "workers": 3},
    })
    assert cfg.potential.site_model().is_homogeneous
    assert cfg.potential.weights == (1.0, 0.2)
    assert cfg.geometry.ladder == (6, 8)
    assert cfg.solver.init is modes.ControlInit.kContinuumPredictor
    assert cfg.solver.max_outer == 5
    assert cfg.study.analysis_ladder == ()
    assert cfg.study.workers == 3
    assert cfg.mesh == config.MeshConfig()


@pytest.mark.parametrize(
    "mapping, message",
    [
        ({"output": {}}, "unknown config section [output]"),
        ({"geometry": 3}, "config section [geometry] is not a table"),
        ({"solver": {"tolerance": 1e-8}}, "unknown key 'tolerance' in section [solver]"),
        ({"geometry": {"psi_a": 4.5}}, "[geometry] psi_a = 4.5"),
        ({"solver": {"max_outer": True}}, "[solver] max_outer = True"),
        ({"potential": {"homogeneous": "yes"}}, "[potential] homogeneous = 'yes'"),
        ({"solver": {"init": "random"}}, "[solver] init = 'random'"),
        ({"geometry": {"ladder": [6, 4]}}, "ladder entry R_core = 4: r_core^kappa > psi_a violated"),
        ({"study": {"analysis_ladder": [1]}}, "ladder entry R_core = 1"),
        ({"geometry": {"ladder": []}}, "geometry ladder is empty"),
        ({"mesh": {"grading_exponent": 2.0}}, "grading_exponent must lie in [1, 2)"),
        ({"study": {"reference_factor": 0}}, "reference_factor must be at least 1"),
        ({"potential": {"weights": [1.0]}}, "[potential]: 1 shell weights given for 2 shells"),
        ({"potential": {"stiffness": -1.0}}, "[potential]: Morse stiffness must be positive"),
    ],
)
def test_config_errors(mapping, message):
    with pytest.raises(exception.ConfigError) as info:
        config.config_from_dict(mapping)
    assert message in str(info.value)
    assert info.value.exit_code == 2


def test_load_config(tmp_path):
    path = tmp_path/"study.toml"
    path.write_text("[geometry]\nladder = [8]\n\n[study]\nseed = 7\n")
    cfg = config.load_config(path)
    assert cfg.geometry.ladder == (8,)
    assert cfg.study.seed == 7


def test_load_config_errors(tmp_path):
    with pytest.raises(exception.ConfigError, match="cannot read config"):
        config.load_config(tmp_path/"missing.toml")
    path = tmp_path/"broken.toml"
    path.write_text("[geometry\nladder = 8\n")
    with pytest.raises(exception.ConfigError, match="malformed config"):
        config.load_config(path)


@pytest.mark.parametrize("name", ["study.toml", "small.toml", "homogeneous.toml", "norms.toml"])
def test_example_configs(name):
    cfg = config.load_config(k_example_dir/name)
    assert cfg.study.out.endswith("-out")
