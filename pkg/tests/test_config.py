"""Tests for wrench_grammar.config module."""

import argparse
import json
import logging

import pytest

from wrench_grammar.config import (
    CLASSIFIER_PROFILES,
    DEFAULT_SEED,
    EVAL_PROTOCOLS,
    ClassifierProfile,
    MondrianConfig,
    RunConfig,
    apply_cli_overrides,
    default_classifier_name,
    get_classifier_profile,
    get_eval_protocol,
    list_classifier_names,
    list_protocol_names,
    load_run_config,
    resolve_run_config,
    resolve_svm_config,
)
from wrench_grammar.errors import UsageError


class TestClassifierProfiles:
    def test_all_expected_profiles_present(self):
        assert set(CLASSIFIER_PROFILES) == {"svm-rbf", "svm-linear", "svm-poly", "mondrian"}

    def test_svm_profiles_carry_their_kernel(self):
        for name in ("svm-rbf", "svm-linear", "svm-poly"):
            profile = CLASSIFIER_PROFILES[name]
            assert profile.family == "svm"
            assert profile.svm.kernel == name.removeprefix("svm-")
            assert profile.svm.C == 1.0

    def test_mondrian_defaults(self):
        profile = CLASSIFIER_PROFILES["mondrian"]
        assert profile.family == "mondrian"
        assert profile.mondrian.n_trees == 100
        assert profile.mondrian.lifetime is None

    def test_get_returns_profile(self):
        assert isinstance(get_classifier_profile("mondrian"), ClassifierProfile)

    def test_unknown_raises_key_error(self):
        with pytest.raises(KeyError, match="Unknown classifier 'knn'"):
            get_classifier_profile("knn")

    def test_error_lists_available(self):
        with pytest.raises(KeyError, match="Available"):
            get_classifier_profile("nope")

    def test_list_names(self):
        assert list_classifier_names() == list(CLASSIFIER_PROFILES)

    def test_default_follows_kernel(self):
        config = RunConfig()
        config.svm.kernel = "poly"
        assert default_classifier_name(config) == "svm-poly"

    def test_resolve_svm_keeps_run_parameters(self):
        config = RunConfig()
        config.svm.C = 10.0
        svm = resolve_svm_config(get_classifier_profile("svm-linear"), config)
        assert svm.kernel == "linear"
        assert svm.C == 10.0
        assert config.svm.kernel == "rbf"

    def test_resolve_svm_rejects_forest(self):
        with pytest.raises(UsageError):
            resolve_svm_config(get_classifier_profile("mondrian"), RunConfig())


class TestEvalProtocols:
    def test_names(self):
        assert list_protocol_names() == ["sim-one-arm", "real-one-arm", "sim-two-arm"]

    def test_counts_add_up(self):
        for protocol in EVAL_PROTOCOLS.values():
            assert protocol.n_train + protocol.n_validation == protocol.n_trials

    def test_unknown(self):
        with pytest.raises(KeyError, match="Unknown protocol"):
            get_eval_protocol("lab")


class TestMondrianConfig:
    def test_infinite_lifetime(self):
        assert MondrianConfig().lifetime_value == float("inf")

    def test_finite_lifetime(self):
        assert MondrianConfig(lifetime=2).lifetime_value == 2.0


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig()
        assert config.seed == DEFAULT_SEED
        assert config.levels == ["primitive", "mc", "llb"]
        assert config.segmentation.r2_min == 0.70
        assert (config.bands.cut_small, config.bands.cut_med, config.bands.cut_big) == (
            0.25,
            0.50,
            0.75,
        )
        assert config.filtering.amp_ratio == 5.0
        assert config.filtering.max_cycles == 3

    def test_dict_round_trip(self):
        config = RunConfig(seed=7, levels=["llb"])
        config.mondrian.lifetime = 3.5
        assert RunConfig.from_dict(config.to_dict()) == config

    def test_from_dict_ignores_unknown_section_keys(self):
        config = RunConfig.from_dict({"svm": {"C": 2.0, "shrinking": True}})
        assert config.svm.C == 2.0

    def test_encoding_view(self):
        config = RunConfig()
        config.filtering.amp_ratio = 8.0
        assert config.encoding.filtering.amp_ratio == 8.0


class TestLoadRunConfig:
    def test_none_gives_defaults(self):
        assert load_run_config(None) == RunConfig()

    def test_reads_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"seed": 3, "svm": {"kernel": "linear"}}))
        config = load_run_config(path)
        assert config.seed == 3
        assert config.svm.kernel == "linear"

    def test_missing_file(self, tmp_path):
        with pytest.raises(UsageError, match="not found"):
            load_run_config(tmp_path / "nope.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{seed: 1")
        with pytest.raises(UsageError, match="not valid JSON"):
            load_run_config(path)

    def test_invalid_values(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"segmentation": {"r2_min": 1.5}}))
        with pytest.raises(UsageError, match="r2_min"):
            load_run_config(path)

    def test_unknown_key_warns(self, tmp_path, caplog, monkeypatch):
        monkeypatch.setattr(logging.getLogger("wrench_grammar"), "propagate", True)
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"colour": "blue", "seed": 5}))
        with caplog.at_level(logging.WARNING, logger="wrench_grammar.config"):
            config = load_run_config(path)
        assert config.seed == 5
        assert "Unknown config key 'colour'" in caplog.text


class TestCliOverrides:
    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"seed": 3, "mondrian": {"n_trees": 10}}))
        args = argparse.Namespace(config=str(path), seed=9, trees=None)
        config = resolve_run_config(args)
        assert config.seed == 9
        assert config.mondrian.n_trees == 10

    def test_none_leaves_value(self):
        config = apply_cli_overrides(RunConfig(), argparse.Namespace(C=None, kernel="poly"))
        assert config.svm.C == 1.0
        assert config.svm.kernel == "poly"

    def test_lists_and_switches(self):
        args = argparse.Namespace(
            levels="mc, llb", classifiers="mondrian", no_refine_breakpoints=True
        )
        config = apply_cli_overrides(RunConfig(), args)
        assert config.levels == ["mc", "llb"]
        assert config.evaluation.classifiers == ["mondrian"]
        assert config.segmentation.refine_breakpoints is False

    def test_invalid_override_rejected(self):
        with pytest.raises(UsageError, match="level"):
            resolve_run_config(argparse.Namespace(levels="words"))
