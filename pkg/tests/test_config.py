import pytest

from hybrid_sac.config import build_run_config, load_run_config, parse_yaml
from hybrid_sac.errors import ConfigError


def _write(tmp_path, text):
    path = tmp_path / "run.yaml"
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults_without_a_file():
    config = load_run_config(command="train")
    assert config.env == "platform_lite"
    assert config.seeds == (0,)
    assert config.agent.preset == "desk"
    assert config.agent.batch_size == 256
    assert config.divlab.alphas == (0.5, 1.0, 2.0, 8.0)


def test_file_values_and_flag_overrides(tmp_path):
    path = _write(
        tmp_path,
        "env: Grid-World\n"
        "seeds: 7\n"
        "agent:\n"
        "  gamma: 0.9\n"
        "  hidden_sizes: [32, 16]\n"
        "divlab:\n"
        "  means: [[-1.0, 0.0], [1.0, 0.0]]\n"
        "  stds: [0.3, 0.3]\n",
    )
    config = load_run_config(path, command="train")
    assert config.env == "grid_world"
    assert config.seeds == (7,)
    assert config.agent.gamma == 0.9
    assert config.agent.hidden_sizes == (32, 16)
    assert config.divlab.means == ((-1.0, 0.0), (1.0, 0.0))

    overridden = load_run_config(path, command="train", seeds=(3, 4), out=str(tmp_path))
    assert overridden.seeds == (3, 4)
    assert overridden.out == str(tmp_path)


def test_presets_fill_agent_settings(tmp_path):
    config = load_run_config(_write(tmp_path, "preset: roboschool\nagent:\n  batch_size: 64\n"), command="train")
    assert config.agent.preset == "roboschool"
    assert config.agent.batch_size == 64
    assert config.agent.hidden_sizes == (256, 256)
    assert config.agent.auto_tune_alpha is False

    assert load_run_config(command="train", preset="roboschool").agent.init_alpha == 0.05
    with pytest.raises(ConfigError) as exc:
        load_run_config(command="train", preset="atari")
    assert exc.value.key == "preset"


def test_unknown_key_names_its_path_and_line(tmp_path):
    path = _write(tmp_path, "env: grid_world\nseeds: 7\nagent:\n  gamma: 0.9\n  colour: red\n")
    with pytest.raises(ConfigError) as exc:
        load_run_config(path, command="train")
    assert exc.value.key == "agent.colour"
    assert exc.value.line == 5
    assert "line 5" in str(exc.value)

    with pytest.raises(ConfigError) as exc:
        load_run_config(_write(tmp_path, "verbose: true\n"), command="train")
    assert exc.value.key == "verbose"
    assert exc.value.line == 1


def test_invalid_values_point_at_the_offending_line(tmp_path):
    with pytest.raises(ConfigError) as exc:
        load_run_config(_write(tmp_path, "env: grid_world\nagent:\n  gamma: 2.0\n"), command="train")
    assert exc.value.key == "agent.gamma"
    assert exc.value.line == 3

    with pytest.raises(ConfigError) as exc:
        load_run_config(_write(tmp_path, "seeds: [1, 2]\nenv: cart_pole\n"), command="train")
    assert exc.value.key == "env"
    assert exc.value.line == 2

    with pytest.raises(ConfigError) as exc:
        load_run_config(_write(tmp_path, "seeds: [1, 1]\n"), command="train")
    assert exc.value.key == "seeds"


def test_malformed_yaml_reports_a_line():
    with pytest.raises(ConfigError) as exc:
        parse_yaml("env: grid_world\nagent: [1, 2\n")
    assert exc.value.line is not None
    assert "malformed YAML" in str(exc.value)

    with pytest.raises(ConfigError):
        parse_yaml("- just\n- a list\n")
    assert parse_yaml("") == ({}, {})


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="does not exist"):
        load_run_config(tmp_path / "absent.yaml")


def test_digest_ignores_seeds_output_and_workers():
    config = build_run_config({"env": "grid_world"}, command="train")
    same = config.replace(seeds=(5, 6), out="elsewhere", workers=4)
    assert same.digest == config.digest
    assert len(config.digest) == 64

    changed = build_run_config({"env": "grid_world", "agent": {"gamma": 0.95}}, command="train")
    assert changed.digest != config.digest
