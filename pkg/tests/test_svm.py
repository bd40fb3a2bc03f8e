"""Tests for wrench_grammar.svm module."""

import logging

import numpy as np
import pytest

from wrench_grammar.errors import DegenerateFeatures, DimensionMismatch, SingleClass, UntrainedModel
from wrench_grammar.svm import (
    Kernel,
    PairwiseMachine,
    SvmModel,
    decision_function,
    fit_svm,
    functional_margin,
    geometric_margin,
    kkt_residuals,
    load_svm,
    predict_many,
    predict_svm,
    save_svm,
    vote,
)

LINEAR = Kernel(kind="linear")


def _separable():
    X = np.array([[x1, x2] for x1 in (-2.0, 2.0) for x2 in (-1.0, 0.0, 1.0)])
    y = np.array([0, 0, 0, 1, 1, 1])
    return X, y


def _clusters(n_per_class: int = 10, seed: int = 0):
    rng = np.random.default_rng(seed)
    centres = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0], [5.0, 5.0]])
    X = np.vstack([c + rng.normal(0.0, 0.5, (n_per_class, 2)) for c in centres])
    y = np.repeat(np.arange(4), n_per_class)
    return X, y


def _model(classes, machines) -> SvmModel:
    return SvmModel(
        kernel=LINEAR,
        C=1.0,
        classes=tuple(classes),
        machines=machines,
        n_features=1,
        keep=np.array([0]),
        mean=np.zeros(1),
        scale=np.ones(1),
    )


def _machine(pos: int, neg: int, rho: float = 0.0) -> PairwiseMachine:
    return PairwiseMachine(pos, neg, np.array([[1.0]]), np.array([1.0]), rho)


# ─── Margins ─────────────────────────────────────────────────────


class TestMargins:
    def test_functional_margin(self):
        machine = _machine(0, 1)
        assert functional_margin(machine, LINEAR, np.array([2.0]), 1) == pytest.approx(2.0)
        assert functional_margin(machine, LINEAR, np.array([2.0]), -1) == pytest.approx(-2.0)

    def test_functional_margin_needs_machine(self):
        with pytest.raises(UntrainedModel):
            functional_margin(None, LINEAR, np.array([1.0]), 1)

    def test_separable_geometric_margin(self):
        X, y = _separable()
        model = fit_svm(X, y, LINEAR, C=1000.0, standardize=False)
        [machine] = model.machines
        assert geometric_margin(machine) == pytest.approx(2.0, rel=0.01)
        assert np.array_equal(predict_many(model, X), y)
        assert all(gap <= 1e-3 for gap in kkt_residuals(model))

    def test_support_vectors_sit_on_the_margin(self):
        X, y = _separable()
        model = fit_svm(X, y, LINEAR, C=1000.0, standardize=False)
        [machine] = model.machines
        y_pm = np.where(y == machine.positive, 1, -1)
        margins = [functional_margin(machine, LINEAR, x, t) for x, t in zip(X, y_pm, strict=True)]
        assert min(margins) == pytest.approx(1.0, abs=0.01)


# ─── Multi-Class Voting ──────────────────────────────────────────


class TestVote:
    def test_one_machine_per_pair(self):
        X, y = _clusters()
        model = fit_svm(X, y, Kernel(kind="rbf"), C=10.0)
        assert len(model.machines) == 6
        winners, votes = vote(model, decision_function(model, X))
        assert np.all(votes.sum(axis=1) == 6)
        assert np.mean(winners == y) >= 0.95

    def test_tie_broken_by_decision_strength(self):
        model = _model([0, 1, 2], [_machine(0, 1), _machine(0, 2), _machine(1, 2)])
        winners, votes = vote(model, np.array([[1.0, -0.5, 0.2]]))
        assert list(votes[0]) == [1, 1, 1]
        assert winners[0] == 0

    def test_exact_tie_goes_to_lowest_class(self):
        model = _model([0, 1, 2], [_machine(0, 1), _machine(0, 2), _machine(1, 2)])
        winners, _ = vote(model, np.array([[1.0, -1.0, 1.0]]))
        assert winners[0] == 0

    def test_predict_one(self):
        X, y = _clusters()
        model = fit_svm(X, y, Kernel(kind="poly"), C=10.0)
        label, votes = predict_svm(model, X[-1])
        assert label == 3
        assert votes.sum() == 6


# ─── Training Edge Cases ─────────────────────────────────────────


class TestFit:
    def test_single_class(self):
        with pytest.raises(SingleClass):
            fit_svm(np.eye(3), np.zeros(3, dtype=int))

    def test_degenerate_features(self):
        with pytest.raises(DegenerateFeatures):
            fit_svm(np.ones((4, 3)), np.array([0, 0, 1, 1]))

    def test_constant_dimension_dropped(self):
        X, y = _separable()
        X = np.column_stack([X, np.full(len(X), 7.0)])
        model = fit_svm(X, y, LINEAR, C=10.0)
        assert model.dropped == 1
        assert np.array_equal(predict_many(model, X), y)

    def test_dropped_dimension_is_a_warning(self, caplog, monkeypatch):
        monkeypatch.setattr(logging.getLogger("wrench_grammar"), "propagate", True)
        X, y = _separable()
        X = np.column_stack([X, np.zeros(len(X))])
        with caplog.at_level(logging.WARNING, logger="wrench_grammar.svm"):
            fit_svm(X, y, LINEAR)
        [record] = [r for r in caplog.records if "zero-variance" in r.getMessage()]
        assert record.levelno == logging.WARNING

    def test_dimension_mismatch(self):
        X, y = _separable()
        model = fit_svm(X, y, LINEAR)
        with pytest.raises(DimensionMismatch):
            predict_many(model, np.zeros((1, 3)))

    def test_scale_gamma_resolved(self):
        X, y = _clusters()
        model = fit_svm(X, y, Kernel(kind="rbf", gamma="scale"))
        assert isinstance(model.kernel.gamma, float)
        assert model.kernel.gamma > 0

    def test_save_and_load(self, tmp_path):
        X, y = _clusters()
        model = fit_svm(X, y, Kernel(kind="rbf"), C=5.0)
        loaded = load_svm(save_svm(model, tmp_path / "svm.json"))
        np.testing.assert_array_equal(predict_many(loaded, X), predict_many(model, X))
        assert loaded.classes == model.classes
