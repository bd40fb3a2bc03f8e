"""Tests for wrench_grammar.validators module."""

import copy

import pytest

from wrench_grammar.config import RunConfig
from wrench_grammar.primitives import Calibration, GradientThresholds
from wrench_grammar.runtime import with_header
from wrench_grammar.signal_io import AXES
from wrench_grammar.synth import DEFAULT_PROFILE
from wrench_grammar.validators import (
    ValidationResult,
    validate_calibration,
    validate_phase_table,
    validate_profile,
    validate_run_config,
)


class TestValidationResult:
    def test_ok_when_no_errors(self):
        assert ValidationResult().ok is True

    def test_not_ok_with_errors(self):
        r = ValidationResult()
        r.add_error("bad thing")
        assert r.ok is False

    def test_add_warning_does_not_break_ok(self):
        r = ValidationResult()
        r.add_warning("minor concern")
        assert r.ok is True
        assert len(r.warnings) == 1

    def test_merge_combines_errors_and_warnings(self):
        a = ValidationResult()
        a.add_error("error-a")
        a.add_warning("warn-a")
        b = ValidationResult()
        b.add_error("error-b")
        a.merge(b)
        assert a.errors == ["error-a", "error-b"]
        assert a.warnings == ["warn-a"]


# ─── Run Config ──────────────────────────────────────────────────


class TestValidateRunConfig:
    def test_defaults_are_valid(self):
        result = validate_run_config(RunConfig().to_dict())
        assert result.ok, result.errors

    def test_not_an_object(self):
        assert not validate_run_config([1, 2]).ok

    def test_unknown_key_warns(self):
        result = validate_run_config({"colour": "red"})
        assert result.ok
        assert "colour" in result.warnings[0]

    @pytest.mark.parametrize(
        "data, fragment",
        [
            ({"seed": "x"}, "seed"),
            ({"jobs": 0}, "jobs"),
            ({"levels": []}, "levels"),
            ({"levels": ["word"]}, "Invalid level"),
            ({"segmentation": {"r2_min": 1.0}}, "r2_min"),
            ({"segmentation": {"min_window": 1}}, "min_window"),
            ({"bands": {"cut_small": 0.6}}, "band cuts"),
            ({"bands": {"scope": "axis"}}, "scope"),
            ({"filtering": {"amp_ratio": 1.0}}, "amp_ratio"),
            ({"filtering": {"max_cycles": 0}}, "max_cycles"),
            ({"svm": {"kernel": "sigmoid"}}, "Invalid kernel"),
            ({"svm": {"C": 0}}, "svm.C"),
            ({"svm": {"gamma": -1}}, "gamma"),
            ({"mondrian": {"n_trees": 0}}, "n_trees"),
            ({"mondrian": {"lifetime": 0}}, "lifetime"),
            ({"mondrian": {"batch_semantics": "chunks"}}, "batch_semantics"),
            ({"evaluation": {"protocol": "lab"}}, "Unknown protocol"),
            ({"evaluation": {"classifiers": ["knn"]}}, "Unknown classifier"),
            ({"evaluation": {"n_train": 0}}, "n_train"),
            ({"svm": "fast"}, "'svm' must be an object"),
        ],
    )
    def test_invalid(self, data, fragment):
        result = validate_run_config(data)
        assert not result.ok
        assert any(fragment in e for e in result.errors), result.errors

    def test_collects_every_error(self):
        result = validate_run_config({"jobs": 0, "svm": {"C": -1}})
        assert len(result.errors) == 2


# ─── Phase Tables ────────────────────────────────────────────────


class TestValidatePhaseTable:
    def test_valid(self):
        rows = [("approach", 0.0, 1.0), ("rotation", 1.0, 2.0)]
        assert validate_phase_table(rows).ok

    def test_empty(self):
        assert not validate_phase_table([]).ok

    def test_unknown_and_repeated(self):
        result = validate_phase_table([("grasp", 0.0, 1.0), ("grasp", 1.0, 2.0)])
        assert any("Unknown phase" in e for e in result.errors)
        assert any("twice" in e for e in result.errors)

    def test_non_positive_window(self):
        assert not validate_phase_table([("approach", 1.0, 1.0)]).ok

    def test_overlap(self):
        result = validate_phase_table([("approach", 0.0, 1.5), ("rotation", 1.0, 2.0)])
        assert any("before the previous one ends" in e for e in result.errors)

    def test_gap_only_warns(self):
        result = validate_phase_table([("approach", 0.0, 1.0), ("rotation", 1.5, 2.0)])
        assert result.ok
        assert len(result.warnings) == 1


# ─── Task Profiles ───────────────────────────────────────────────


class TestValidateProfile:
    def test_default_profile_is_valid(self):
        result = validate_profile(DEFAULT_PROFILE)
        assert result.ok, result.errors

    def test_needs_insertion_impulse(self):
        data = copy.deepcopy(DEFAULT_PROFILE)
        data["phases"][2]["axes"]["Fz"] = [{"kind": "ramp", "delta": -5.0}]
        result = validate_profile(data)
        assert any("impulse" in e for e in result.errors)

    def test_phase_order(self):
        data = copy.deepcopy(DEFAULT_PROFILE)
        data["phases"].reverse()
        assert not validate_profile(data).ok

    def test_non_positive_duration(self):
        data = copy.deepcopy(DEFAULT_PROFILE)
        data["phases"][0]["duration"] = [0.0, 1.0]
        assert any("duration must be positive" in e for e in validate_profile(data).errors)

    def test_unordered_range(self):
        data = copy.deepcopy(DEFAULT_PROFILE)
        data["noise"]["Fx"] = [0.3, 0.1]
        assert not validate_profile(data).ok

    def test_unknown_template(self):
        data = copy.deepcopy(DEFAULT_PROFILE)
        data["phases"][1]["axes"]["Fy"] = [{"kind": "square"}]
        assert any("square" in e for e in validate_profile(data).errors)

    def test_bad_rate_and_axis(self):
        data = copy.deepcopy(DEFAULT_PROFILE)
        data["sampling_rate"] = 0
        data["dominant_axis"] = "Fw"
        result = validate_profile(data)
        assert len(result.errors) >= 2


# ─── Calibration Files ───────────────────────────────────────────


class TestValidateCalibration:
    def _doc(self):
        calibration = Calibration(
            scope="per-axis", axes=dict.fromkeys(AXES, GradientThresholds(0.1, 10.0))
        )
        return with_header("calibration", calibration.to_dict())

    def test_valid(self):
        assert validate_calibration(self._doc()).ok

    def test_missing_header(self):
        doc = self._doc()
        del doc["format"]
        assert not validate_calibration(doc).ok

    def test_non_numeric_entry(self):
        doc = self._doc()
        doc["axes"]["Fx"]["g_max"] = "big"
        assert any("axes.Fx.g_max" in e for e in validate_calibration(doc).errors)

    def test_unknown_axis(self):
        doc = self._doc()
        doc["axes"]["Fw"] = doc["axes"]["Fx"]
        assert not validate_calibration(doc).ok
