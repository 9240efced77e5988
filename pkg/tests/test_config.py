"""Configuration tree: defaults, strict keys, overrides, run.json round trip."""

import json

import pytest

from synlab.config import DEFAULT_CONFIG, config_from_dict, default_config_dict, load_config
from synlab.errors import ConfigurationError


class TestDefaults:
    def test_empty_dict_yields_stock_setup(self):
        cfg = config_from_dict({})
        assert cfg.raw == DEFAULT_CONFIG
        assert cfg.protocol.epochs == 10000
        assert cfg.protocol.seed == 42
        syn = cfg.build_synapse()
        assert syn.n == 16
        assert syn.branches[0].alpha == pytest.approx(0.6)
        assert syn.branches[-1].alpha == pytest.approx(1.0)
        assert cfg.device_model.v_th_set == 1.0
        assert cfg.waveform_params.a_minus == 0.4

    def test_default_dict_is_a_copy(self):
        d = default_config_dict()
        d["protocol"]["epochs"] = 1
        assert DEFAULT_CONFIG["protocol"]["epochs"] == 10000


class TestStrictKeys:
    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigurationError, match="unknown configuration key: banana"):
            config_from_dict({"banana": 1})

    def test_unknown_nested_key(self):
        with pytest.raises(ConfigurationError, match="protocol.epoch$"):
            config_from_dict({"protocol": {"epoch": 5}})

    def test_section_must_be_object(self):
        with pytest.raises(ConfigurationError):
            config_from_dict({"device": 3})


class TestValues:
    def test_partial_override(self):
        cfg = config_from_dict({"protocol": {"epochs": 123}, "synapse": {"n": 4}})
        assert cfg.protocol.epochs == 123
        assert cfg.build_synapse().n == 4
        assert cfg.protocol.seed == 42  # untouched default

    def test_invalid_values_surface_as_config_errors(self):
        with pytest.raises(ConfigurationError):
            config_from_dict({"waveform": {"a_plus": -1.0}})
        with pytest.raises(ConfigurationError):
            config_from_dict({"device": {"sigma_set": 0.0}})
        with pytest.raises(ConfigurationError):
            config_from_dict({"protocol": {"epochs": 0}})
        with pytest.raises(ConfigurationError):
            config_from_dict({"protocol": {"epochs": 1.5}})
        with pytest.raises(ConfigurationError):
            config_from_dict({"device": {"gate_below_threshold": "yes"}})

    def test_explicit_alphas(self):
        cfg = config_from_dict({"synapse": {"n": 3, "alphas": [0.5, 0.75, 1.0]}})
        syn = cfg.build_synapse()
        assert [b.alpha for b in syn.branches] == [0.5, 0.75, 1.0]

    def test_alphas_length_mismatch(self):
        with pytest.raises(ConfigurationError, match="alphas"):
            config_from_dict({"synapse": {"alphas": [0.5, 1.0]}})

    def test_delays(self):
        cfg = config_from_dict({"synapse": {"n": 2, "delays": [0.0, 0.3]}})
        assert [b.delay for b in cfg.build_synapse().branches] == [0.0, 0.3]
        with pytest.raises(ConfigurationError):
            config_from_dict({"synapse": {"n": 2, "delays": [0.1]}})

    def test_attenuate_side(self):
        cfg = config_from_dict({"synapse": {"attenuate_side": "post"}})
        assert cfg.build_synapse().attenuate_side == "post"
        with pytest.raises(ConfigurationError):
            config_from_dict({"synapse": {"attenuate_side": "none"}})

    def test_bernoulli_policy_round_trips(self):
        cfg = config_from_dict({"protocol": {"init_policy": "bernoulli:0.3"}})
        assert cfg.protocol.init_policy == "bernoulli:0.3"

    def test_fit_section(self):
        cfg = config_from_dict({"fit": {"set_domain": [2, 4], "target": "mean"}})
        assert cfg.fit_options.set_domain == (2.0, 4.0)
        assert cfg.fit_options.target == "mean"
        with pytest.raises(ConfigurationError):
            config_from_dict({"fit": {"set_domain": [1, 2, 3]}})


class TestOverridesAndVariants:
    def test_with_overrides(self):
        cfg = config_from_dict({}).with_overrides(epochs=7, seed=9, figure_mode=True)
        assert cfg.protocol.epochs == 7
        assert cfg.protocol.seed == 9
        assert cfg.protocol.figure_mode is True

    def test_flat_baseline(self):
        flat = config_from_dict({}).flat_baseline()
        syn = flat.build_synapse()
        assert all(b.alpha == 1.0 for b in syn.branches)
        assert flat.raw["synapse"]["alpha_min"] == 1.0


class TestLoadConfig:
    def test_none_gives_defaults(self):
        assert load_config(None).raw == DEFAULT_CONFIG

    def test_bare_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"protocol": {"seed": 5}}))
        assert load_config(path).protocol.seed == 5

    def test_run_json_wrapper(self, tmp_path):
        inner = default_config_dict()
        inner["protocol"]["seed"] = 77
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"config": inner, "seed": 77, "wall_time_s": 1.0, "threads": 2}))
        cfg = load_config(path)
        assert cfg.protocol.seed == 77
        assert cfg.raw == inner

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "nope.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        with pytest.raises(ConfigurationError):
            load_config(path)
