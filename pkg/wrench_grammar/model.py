"""
Trained phase classifiers behind one interface.

A ModelBundle ties an estimator (SVM or Mondrian forest) to the dataset
layout it was trained on, so ``predict`` can vectorise new grammars with
exactly the training columns.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .config import ClassifierProfile, RunConfig, get_classifier_profile, resolve_svm_config
from .errors import DimensionMismatch, InvariantViolation, ModelFormatError, UsageError
from .grammar import PHASE_CLASSES, DatasetLayout, PhaseDataset
from .mondrian import MondrianForest, check_tree
from .runtime import read_versioned_json, with_header, write_json_atomic
from .svm import SvmModel, decision_function, train_svm_with, vote

logger = logging.getLogger(__name__)

Estimator = SvmModel | MondrianForest


@dataclass
class ModelBundle:
    classifier: str
    layout: DatasetLayout
    estimator: Estimator

    @property
    def family(self) -> str:
        return "mondrian" if isinstance(self.estimator, MondrianForest) else "svm"

    def predict(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Predicted class per row plus per-class scores (votes or probabilities)."""
        if X.shape[1] != self.layout.dimension:
            raise DimensionMismatch(
                f"model expects {self.layout.dimension} features, got {X.shape[1]}"
            )
        if isinstance(self.estimator, MondrianForest):
            proba = self.estimator.predict_proba(X)
            return self.estimator.predict(X), proba
        winners, votes = vote(self.estimator, decision_function(self.estimator, X))
        return winners, votes.astype(np.float64)

    def to_dict(self) -> dict[str, Any]:
        return {
            "classifier": self.classifier,
            "family": self.family,
            "layout": self.layout.to_dict(),
            "estimator": self.estimator.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ModelBundle:
        family = data.get("family")
        if family == "svm":
            estimator: Estimator = SvmModel.from_dict(data["estimator"])
        elif family == "mondrian":
            estimator = MondrianForest.from_dict(data["estimator"])
        else:
            raise ModelFormatError(f"unknown model family {family!r}")
        return cls(
            classifier=str(data["classifier"]),
            layout=DatasetLayout.from_dict(data["layout"]),
            estimator=estimator,
        )


def class_indices() -> list[int]:
    return list(range(len(PHASE_CLASSES)))


def new_forest(config: RunConfig, seed: int) -> MondrianForest:
    return MondrianForest.from_config(class_indices(), config.mondrian, seed)


def fit_forest(forest: MondrianForest, ds: PhaseDataset, config: RunConfig) -> MondrianForest:
    """Feed *ds* to *forest* in the configured mini-batches."""
    mcfg = config.mondrian
    if mcfg.batch_semantics == "size":
        return forest.fit(ds.X, ds.y, batch_size=mcfg.batch_size)
    return forest.fit(ds.X, ds.y, n_batches=mcfg.n_batches)


def train_estimator(
    ds: PhaseDataset, profile: ClassifierProfile, config: RunConfig, seed: int
) -> Estimator:
    if profile.family == "svm":
        return train_svm_with(ds, resolve_svm_config(profile, config))
    if profile.family == "mondrian":
        return fit_forest(new_forest(config, seed), ds, config)
    raise UsageError(f"Classifier '{profile.name}' has unknown family '{profile.family}'")


def train_model(ds: PhaseDataset, classifier: str, config: RunConfig, seed: int) -> ModelBundle:
    """Train the named classifier on a phase dataset.

    Raises:
        UsageError: unknown classifier name.
    """
    try:
        profile = get_classifier_profile(classifier)
    except KeyError as e:
        raise UsageError(str(e.args[0])) from e
    estimator = train_estimator(ds, profile, config, seed)
    logger.info("trained %s on %d sample(s) × %d feature(s)", classifier, len(ds), ds.dimension)
    return ModelBundle(classifier=classifier, layout=ds.layout, estimator=estimator)


def check_forest(forest: MondrianForest) -> None:
    """Raise InvariantViolation listing every broken tree invariant."""
    problems = [f"tree {i}: {p}" for i, tree in enumerate(forest.trees) for p in check_tree(tree)]
    root_total = sum(int(t.root.counts.sum()) for t in forest.trees if t.root is not None)
    if forest.trees and root_total != forest.n_samples * len(forest.trees):
        problems.append("root counts do not match the number of fitted samples")
    if problems:
        raise InvariantViolation("; ".join(problems[:10]))


def save_model(bundle: ModelBundle, path: str | Path) -> Path:
    return write_json_atomic(path, with_header("model", bundle.to_dict()))


def load_model(path: str | Path) -> ModelBundle:
    return ModelBundle.from_dict(read_versioned_json(path, "model"))
