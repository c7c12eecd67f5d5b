"""Unit tests for run configuration loading."""

import pytest

from src.config import ARCHIVE_FILE, ConfigError, RunConfig, load_config, parse_overrides, parse_value


class TestParseValue:
    """Tests for typed value parsing."""

    def test_scalars(self):
        assert parse_value("rounds", "7") == 7
        assert parse_value("tau", "0.5") == 0.5
        assert parse_value("mode", "fed") == "fed"

    @pytest.mark.parametrize("raw,expected", [("true", True), ("ON", True), ("0", False), ("no", False)])
    def test_bools(self, raw, expected):
        assert parse_value("replication", raw) is expected

    def test_lists(self):
        assert parse_value("sizes", "10, 20,40") == (10, 20, 40)
        assert parse_value("minsup_sweep", "0.1,0.25") == (0.1, 0.25)
        assert parse_value("modes", "none") == ("none",)

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as exc:
            parse_value("colour", "red")
        assert exc.value.key == "colour"

    def test_bad_number(self):
        with pytest.raises(ConfigError, match="rounds"):
            parse_value("rounds", "many")

    def test_bad_bool(self):
        with pytest.raises(ConfigError, match="true/false"):
            parse_value("autoscale", "maybe")

    def test_overrides(self):
        assert parse_overrides(["a=1", "b = x=y"]) == {"a": "1", "b": " x=y"}
        with pytest.raises(ConfigError):
            parse_overrides(["novalue"])


class TestLoadConfig:
    """Tests for defaults, files and overrides."""

    def test_defaults(self):
        config = load_config()
        assert config.rounds == 10
        assert config.modes == ("simifed", "fed", "none")
        assert config.sim_config().mttr_base_min == 0.21

    def test_file_then_overrides(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("rounds=3\ntau=0.8\n# comment\nsizes=10,20\n")
        config = load_config(path, {"rounds": "5"})
        assert config.rounds == 5
        assert config.tau == 0.8
        assert config.sizes == (10, 20)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.env")

    def test_invalid_mode(self):
        with pytest.raises(ConfigError, match="mode"):
            load_config(overrides={"mode": "none"})

    def test_invalid_combination(self):
        with pytest.raises(ConfigError, match="Invalid configuration"):
            load_config(overrides={"horizons": "52"})

    def test_archive_reloads_identically(self, tmp_path):
        config = load_config(overrides={"seed": "7", "sizes": "10", "pattern_guidance": "false"})
        path = config.archive(tmp_path)
        assert path.name == ARCHIVE_FILE
        assert load_config(path) == config

    def test_out_dir_from_environment(self, monkeypatch):
        monkeypatch.setenv("SFDTM_OUT_DIR", "/tmp/elsewhere")
        assert RunConfig().out == "/tmp/elsewhere"

    def test_derived_configs(self):
        config = load_config(overrides={"epochs": "3", "sim_hidden_size": "4", "hidden_size": "6"})
        assert config.training_config().epochs == 3
        assert config.federation_config().hidden_size == 6
        assert config.sim_config().hidden_size == 4
