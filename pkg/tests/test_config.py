import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from inertial_phasefield.config import Config, ConfigError, load_config, parse_config

from conftest import small_config


class TestDefaults:
    def test_default_values(self):
        cfg = Config()
        p = cfg.build_params()
        assert cfg.geometry.length == 1.0
        assert (p.tau, p.eta, p.eps, p.lam) == (0.5, 0.5, 0.1, 0.1)
        assert cfg.sweep is None and cfg.seed == 0

    def test_empty_json(self):
        assert parse_config("{}").to_dict() == Config().to_dict()

    def test_lambda_key(self):
        cfg = parse_config('{"params": {"lambda": 0.25}}')
        assert cfg.build_params().lam == 0.25
        assert cfg.to_dict()["params"]["lambda"] == 0.25


class TestErrors:
    def test_unknown_key_path(self):
        with pytest.raises(ConfigError) as info:
            parse_config('{"params": {"gamma": 1}}')
        assert info.value.path == "params.gamma"

    def test_unknown_section(self):
        with pytest.raises(ConfigError, match="mesh"):
            parse_config('{"mesh": {}}')

    def test_bad_json_line(self):
        with pytest.raises(ConfigError, match="line 3"):
            parse_config('{\n  "seed": 1,\n  "params": }\n')

    def test_invalid_lambda(self):
        with pytest.raises(ConfigError) as info:
            parse_config('{"params": {"lambda": 0}}')
        assert info.value.path == "params.lambda"
        assert "lambda must be > 0" in str(info.value)

    def test_horizon_multiple_of_dt(self):
        with pytest.raises(ConfigError, match="scheme"):
            parse_config('{"scheme": {"T": 0.1, "dt": 0.03}}')

    def test_unknown_scheme(self):
        with pytest.raises(ConfigError):
            parse_config('{"scheme": {"name": "euler"}}')

    def test_unknown_profile_option(self):
        with pytest.raises(ConfigError) as info:
            parse_config('{"data": {"phi0": {"kind": "cosine", "wavelength": 2}}}')
        assert info.value.path.startswith("data.phi0")

    def test_bad_sweep(self):
        with pytest.raises(ConfigError):
            parse_config('{"sweep": {"param": "lambda", "values": [0.1, 0.2]}}')

    def test_load_reports_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"geometry": {"n_cells": 1}}')
        with pytest.raises(ConfigError) as info:
            load_config(path)
        assert str(path) in str(info.value)
        assert info.value.path.startswith("geometry")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "nope.json")


class TestRoundTrip:
    def test_manifest_accepted(self):
        cfg = small_config(eta=0.25)
        text = json.dumps({"code_version": "x", "config": cfg.to_dict()})
        assert parse_config(text).to_dict() == cfg.to_dict()

    @given(st.sampled_from([0.0, 0.25, 2.0]), st.floats(1e-3, 1.0), st.integers(0, 1000),
           st.sampled_from(["lambda", "eps", "eta", "tau"]))
    def test_dict_round_trip(self, tau, eps, seed, param):
        cfg = Config.from_dict({"params": {"tau": tau, "eps": eps}, "seed": seed,
                                "sweep": {"param": param, "values": [0.5, 0.25, 0.125]}})
        again = Config.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert again.to_dict() == cfg.to_dict()

    def test_problem_seeds(self):
        d = {"data": {"phi0": {"kind": "noise"}, "theta0": {"kind": "noise"}}}
        a = Config.from_dict(d).problem()
        b = Config.from_dict(d).problem()
        assert np.array_equal(a.phi0, b.phi0)
        assert not np.array_equal(a.phi0 - a.phi0.mean(), a.theta0 - a.theta0.mean())
