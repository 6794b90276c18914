import json

import pytest

from drtt.config import (
    ConfigError,
    config_hash,
    criterion_defaults,
    load_config_file,
    resolve,
)


class TestCriterionDefaults:
    def test_zh_en(self):
        assert criterion_defaults("zh", "en") == (0.01, 0.5)

    def test_en_de_and_en_fr(self):
        assert criterion_defaults("en", "de") == (0.5, 0.5)
        assert criterion_defaults("en", "fr") == (0.5, 0.5)

    def test_unknown_pair_falls_back(self):
        assert criterion_defaults("sv", "fi") == (0.5, 0.5)


class TestResolve:
    def test_defaults_fill_in(self):
        cfg = resolve()
        assert cfg["generate"]["c"] == 0.2
        assert cfg["generate"]["k"] == 1
        assert cfg["generate"]["beta"] == 0.5

    def test_language_pair_defaults_applied(self):
        cfg = resolve({"langs": {"src": "zh", "tgt": "en"}})
        assert cfg["generate"]["beta"] == 0.01
        assert cfg["generate"]["gamma"] == 0.5

    def test_explicit_beta_wins_over_pair_default(self):
        cfg = resolve({"langs": {"src": "zh", "tgt": "en"}, "generate": {"beta": 0.3}})
        assert cfg["generate"]["beta"] == 0.3

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="unknown config section 'typo'"):
            resolve({"typo": {}})

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config key 'generate.betta'"):
            resolve({"generate": {"betta": 0.1}})

    def test_type_checked(self):
        with pytest.raises(ConfigError, match="generate.k"):
            resolve({"generate": {"k": "one"}})

    def test_flag_overrides_win_over_file(self):
        cfg = resolve({"generate": {"c": 0.4}}, {("generate", "c"): 0.9})
        assert cfg["generate"]["c"] == 0.9

    def test_none_overrides_ignored(self):
        cfg = resolve({"generate": {"c": 0.4}}, {("generate", "c"): None})
        assert cfg["generate"]["c"] == 0.4

    def test_env_overrides_backends(self, monkeypatch):
        monkeypatch.setenv("DRTT_BACKEND_MMLM", "tcp:somehost:9")
        cfg = resolve({"backends": {"mmlm": "mock:identity"}})
        assert cfg["backends"]["mmlm"] == "tcp:somehost:9"


class TestLoadConfigFile:
    def test_toml(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text('[generate]\nbeta = 0.25\n')
        assert load_config_file(path) == {"generate": {"beta": 0.25}}

    def test_manifest_json(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"command": "generate", "config": {"generate": {"k": 2}}}))
        assert load_config_file(path) == {"generate": {"k": 2}}

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config_file(tmp_path / "nope.toml")

    def test_bad_toml(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text("this is [not toml\n")
        with pytest.raises(ConfigError):
            load_config_file(path)


class TestConfigHash:
    def test_stable_and_order_independent(self):
        a = config_hash({"x": 1, "y": [1, 2]})
        b = config_hash({"y": [1, 2], "x": 1})
        assert a == b
        assert len(a) == 64

    def test_differs_on_content(self):
        assert config_hash({"x": 1}) != config_hash({"x": 2})
