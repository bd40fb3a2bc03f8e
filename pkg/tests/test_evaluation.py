"""Tests for wrench_grammar.evaluation module."""

import math

import numpy as np
import pytest

from wrench_grammar.config import RunConfig
from wrench_grammar.errors import DataError, InsufficientTrials, UsageError
from wrench_grammar.evaluation import (
    CurvePoint,
    CurveResult,
    classifier_names,
    curves_frame,
    effective_protocol,
    prepare_eval,
    run_evaluation,
    split_groups,
    steady_state,
    write_curves_csv,
)
from wrench_grammar.signal_io import PHASES
from wrench_grammar.synth import default_profile, generate_dataset


def _config(**evaluation) -> RunConfig:
    config = RunConfig()
    config.mondrian.n_trees = 3
    config.evaluation.classifiers = ["svm-linear", "mondrian"]
    for key, value in evaluation.items():
        setattr(config.evaluation, key, value)
    return config


def _curve(name: str, accuracies, start: int = 1) -> CurveResult:
    points = [
        CurvePoint(step=i, train_trials=start + i, train_samples=4 * (start + i), accuracy=a)
        for i, a in enumerate(accuracies)
    ]
    return CurveResult(classifier=name, points=points)


@pytest.fixture(scope="module")
def small_trials():
    return generate_dataset(default_profile(), n_trials=6, base_seed=42)


# ─── Protocols and Splits ────────────────────────────────────────


class TestProtocol:
    @pytest.mark.parametrize(
        "name, n_train, n_validation, arms",
        [
            ("sim-one-arm", 30, 8, 1),
            ("real-one-arm", 36, 10, 1),
            ("sim-two-arm", 14, 6, 2),
        ],
    )
    def test_named_protocols(self, name, n_train, n_validation, arms):
        protocol = effective_protocol(_config(protocol=name))
        assert (protocol.n_train, protocol.n_validation, protocol.arms) == (n_train, n_validation, arms)
        assert protocol.n_trials == n_train + n_validation

    def test_overrides(self):
        protocol = effective_protocol(_config(n_train=5, n_validation=2))
        assert protocol.n_trials == 7
        assert protocol.mondrian_start == 3

    def test_unknown(self):
        with pytest.raises(UsageError, match="Available"):
            effective_protocol(_config(protocol="nope"))


class TestSplitGroups:
    def test_in_order(self):
        train, validation = split_groups([(i,) for i in range(6)], 4, 2)
        assert train == [(0,), (1,), (2,), (3,)]
        assert validation == [(4,), (5,)]

    def test_shuffle_is_seeded(self):
        groups = [(i,) for i in range(10)]
        a = split_groups(groups, 6, 4, shuffle=True, seed=3)
        b = split_groups(groups, 6, 4, shuffle=True, seed=3)
        assert a == b
        assert sorted(a[0] + a[1]) == groups

    @pytest.mark.parametrize("n_train, n_validation", [(5, 2), (3, 0)])
    def test_insufficient(self, n_train, n_validation):
        with pytest.raises(InsufficientTrials):
            split_groups([(i,) for i in range(6)], n_train, n_validation)


# ─── Curves ──────────────────────────────────────────────────────


class TestSteadyState:
    def test_last_window(self):
        assert steady_state(_curve("c", [0.0, 0.0, 1.0, 1.0]), last=2) == 1.0

    def test_skips_undefined(self):
        assert steady_state(_curve("c", [0.5, math.nan, 1.0])) == pytest.approx(0.75)

    def test_all_undefined(self):
        assert math.isnan(steady_state(_curve("c", [math.nan])))


class TestReports:
    def test_classifier_names(self):
        names = classifier_names(_config(), kernels=["linear", "rbf"])
        assert names == ["svm-linear", "mondrian", "svm-rbf"]

    def test_frame_aligns_on_samples(self):
        frame = curves_frame([_curve("svm", [0.5, 0.6, 0.7]), _curve("mf", [0.8], start=3)])
        assert list(frame.columns) == ["train_samples", "svm", "mf"]
        assert list(frame["train_samples"]) == [4, 8, 12]
        assert math.isnan(frame["mf"][0])
        assert frame["mf"][2] == 0.8

    def test_csv(self, tmp_path):
        path = tmp_path / "curve.csv"
        write_curves_csv([_curve("svm", [0.5, math.nan])], path)
        assert path.read_text() == "train_samples,svm\n4,0.500000\n8,\n"


# ─── End to End ──────────────────────────────────────────────────


class TestEvaluation:
    def test_split_uses_training_trials(self, small_trials):
        config = _config(n_train=4, n_validation=2)
        data = prepare_eval(small_trials, effective_protocol(config), config)
        assert data.train_ids == ["trial_000", "trial_001", "trial_002", "trial_003"]
        assert data.validation_ids == ["trial_004", "trial_005"]
        assert len(data.train) == 4 * len(PHASES)
        assert data.validation.dimension == data.train.dimension

    def test_arm_count_must_match(self, small_trials):
        config = _config(protocol="sim-two-arm", n_train=4, n_validation=2)
        with pytest.raises(DataError, match="arm"):
            prepare_eval(small_trials, effective_protocol(config), config)

    def test_small_run(self, small_trials):
        report = run_evaluation(small_trials, _config(n_train=4, n_validation=2))
        svm, mondrian = report.curves
        assert [p.train_trials for p in svm.points] == [1, 2, 3, 4]
        assert [p.train_trials for p in mondrian.points] == [3, 4]
        assert [p.train_samples for p in mondrian.points] == [12, 16]
        for curve in report.curves:
            defined = [a for a in curve.accuracies if not math.isnan(a)]
            assert defined
            assert all(0.0 <= a <= 1.0 for a in defined)
        assert set(report.headline()) == {"svm-linear", "mondrian"}

    def test_deterministic(self, small_trials):
        config = _config(n_train=4, n_validation=2)
        a = run_evaluation(small_trials, config)
        b = run_evaluation(small_trials, config)
        for left, right in zip(a.curves, b.curves, strict=True):
            np.testing.assert_array_equal(left.accuracies, right.accuracies)


    def test_curve_csv_is_byte_identical_across_runs(self, small_trials, tmp_path):
        config = _config(n_train=4, n_validation=2)
        write_curves_csv(run_evaluation(small_trials, config).curves, tmp_path / "a.csv")
        write_curves_csv(run_evaluation(small_trials, config).curves, tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


@pytest.mark.slow
class TestSimulatedProtocols:
    """Full-size runs with the default classifier settings (100 trees)."""

    @pytest.mark.parametrize(
        ("protocol", "n_trials", "arms"),
        [("sim-one-arm", 38, 1), ("sim-two-arm", 20, 2)],
    )
    def test_steady_state_accuracy(self, protocol, n_trials, arms):
        trials = generate_dataset(default_profile(), n_trials=n_trials, base_seed=42, arms=arms)
        config = RunConfig()
        config.evaluation.protocol = protocol
        assert config.mondrian.n_trees == 100
        headline = run_evaluation(trials, config).headline()
        assert set(headline) == {"svm-rbf", "mondrian"}
        assert headline["svm-rbf"] >= 0.90
        assert headline["mondrian"] >= 0.90

    def test_full_run_csv_is_byte_identical(self, tmp_path):
        trials = generate_dataset(default_profile(), n_trials=38, base_seed=42)
        config = RunConfig()
        write_curves_csv(run_evaluation(trials, config).curves, tmp_path / "a.csv")
        write_curves_csv(run_evaluation(trials, config).curves, tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
