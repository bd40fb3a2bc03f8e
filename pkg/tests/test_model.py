"""Tests for wrench_grammar.model module."""

import numpy as np
import pytest

from wrench_grammar.config import RunConfig
from wrench_grammar.errors import DimensionMismatch, InvariantViolation, ModelFormatError, UsageError
from wrench_grammar.grammar import LEVELS, GrammarMatrix, Level, group_matrices, vectorize
from wrench_grammar.model import check_forest, load_model, save_model, train_model
from wrench_grammar.runtime import with_header, write_json_atomic
from wrench_grammar.signal_io import AXES, PHASES, Arm
from wrench_grammar.svm import Kernel, predict_many, train_svm

# Each phase gets its own word at every level, with a little per-trial variety.
PHASE_WORDS = {
    Level.PRIMITIVE: ("const", "spos", "nimp", "sneg"),
    Level.MC: ("k", "i", "c", "d"),
    Level.LLB: ("FX", "PS", "CT", "PL"),
}


def _phase_matrix(index: int) -> GrammarMatrix:
    words = {}
    for level in LEVELS:
        for axis_no, axis in enumerate(AXES):
            for phase in PHASES:
                word = PHASE_WORDS[level][phase.index]
                n = 1 + (index + axis_no) % 3
                words[(level, axis, phase)] = (word,) * n
    return GrammarMatrix(trial_id=f"trial_{index:03d}", arm=Arm.RIGHT, words=words)


@pytest.fixture
def dataset():
    return vectorize(group_matrices([_phase_matrix(i) for i in range(6)]))


@pytest.fixture
def config():
    config = RunConfig()
    config.mondrian.n_trees = 5
    return config


class TestTrainModel:
    @pytest.mark.parametrize("classifier", ["svm-rbf", "svm-linear", "svm-poly", "mondrian"])
    def test_learns_separable_phases(self, dataset, config, classifier):
        bundle = train_model(dataset, classifier, config, seed=1)
        predicted, scores = bundle.predict(dataset.X)
        np.testing.assert_array_equal(predicted, dataset.y)
        assert scores.shape == (len(dataset), len(PHASES))

    def test_family(self, dataset, config):
        assert train_model(dataset, "mondrian", config, seed=1).family == "mondrian"
        assert train_model(dataset, "svm-rbf", config, seed=1).family == "svm"

    def test_mondrian_scores_are_probabilities(self, dataset, config):
        _, scores = train_model(dataset, "mondrian", config, seed=1).predict(dataset.X)
        np.testing.assert_allclose(scores.sum(axis=1), 1.0)

    def test_svm_scores_are_votes(self, dataset, config):
        _, scores = train_model(dataset, "svm-linear", config, seed=1).predict(dataset.X)
        assert np.all(scores.sum(axis=1) == 6)

    def test_unknown_classifier(self, dataset, config):
        with pytest.raises(UsageError, match="Unknown classifier"):
            train_model(dataset, "knn", config, seed=1)

    def test_dimension_mismatch(self, dataset, config):
        bundle = train_model(dataset, "mondrian", config, seed=1)
        with pytest.raises(DimensionMismatch):
            bundle.predict(np.zeros((1, dataset.dimension + 1)))

    def test_train_svm_on_dataset(self, dataset):
        model = train_svm(dataset, Kernel(kind="linear"), C=10.0)
        assert len(model.machines) == 6
        np.testing.assert_array_equal(predict_many(model, dataset.X), dataset.y)

    def test_forest_invariants(self, dataset, config):
        bundle = train_model(dataset, "mondrian", config, seed=1)
        check_forest(bundle.estimator)
        assert bundle.estimator.n_samples == len(dataset)

    def test_broken_forest_detected(self, dataset, config):
        forest = train_model(dataset, "mondrian", config, seed=1).estimator
        forest.trees[0].root.counts[0] += 1
        with pytest.raises(InvariantViolation):
            check_forest(forest)

    def test_batch_size_semantics(self, dataset, config):
        config.mondrian.batch_semantics = "size"
        config.mondrian.batch_size = 5
        by_size = train_model(dataset, "mondrian", config, seed=1)
        config.mondrian.batch_semantics = "count"
        by_count = train_model(dataset, "mondrian", config, seed=1)
        np.testing.assert_array_equal(
            by_size.predict(dataset.X)[1], by_count.predict(dataset.X)[1]
        )


class TestPersistence:
    @pytest.mark.parametrize("classifier", ["svm-rbf", "mondrian"])
    def test_save_and_load(self, tmp_path, dataset, config, classifier):
        bundle = train_model(dataset, classifier, config, seed=1)
        loaded = load_model(save_model(bundle, tmp_path / "model.json"))
        assert loaded.classifier == classifier
        assert loaded.layout.columns == bundle.layout.columns
        np.testing.assert_allclose(loaded.predict(dataset.X)[1], bundle.predict(dataset.X)[1])

    def test_deterministic_file(self, tmp_path, dataset, config):
        a = save_model(train_model(dataset, "mondrian", config, seed=1), tmp_path / "a.json")
        b = save_model(train_model(dataset, "mondrian", config, seed=1), tmp_path / "b.json")
        assert a.read_bytes() == b.read_bytes()

    def test_unknown_family(self, tmp_path):
        path = write_json_atomic(tmp_path / "m.json", with_header("model", {"family": "knn"}))
        with pytest.raises(ModelFormatError, match="family"):
            load_model(path)
