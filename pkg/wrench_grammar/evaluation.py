"""
Learning curves: validation accuracy as training trials are added.

The evaluation split is fixed up front. Thresholds are calibrated on the
training trials only, the feature layout is fitted on the full training
pool, and every curve step then trains on the first k training trials:

    SVM        retrained from scratch at every step, starting at 1 trial
    Mondrian   one forest grown with partial_fit, starting at 3 trials

Each trial contributes one sample per phase, so one step adds four samples.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .config import (
    EvalProtocol,
    RunConfig,
    get_classifier_profile,
    get_eval_protocol,
    resolve_svm_config,
)
from .errors import DataError, DegenerateFeatures, InsufficientTrials, SingleClass, UsageError
from .grammar import PhaseDataset, encode_trials, fit_layout, group_matrices, vectorize_with
from .model import fit_forest, new_forest
from .primitives import Calibration, calibrate_trials
from .runtime import write_text_atomic
from .signal_io import Trial, group_by_index
from .svm import predict_many, train_svm_with

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CurvePoint:
    step: int
    train_trials: int
    train_samples: int
    accuracy: float


@dataclass
class CurveResult:
    classifier: str
    points: list[CurvePoint] = field(default_factory=list)

    @property
    def accuracies(self) -> list[float]:
        return [p.accuracy for p in self.points]


@dataclass
class EvalData:
    """Calibrated, encoded and vectorised split of one evaluation run."""

    train: PhaseDataset
    validation: PhaseDataset
    calibration: Calibration
    train_ids: list[str]
    validation_ids: list[str]


@dataclass
class EvalReport:
    protocol: EvalProtocol
    data: EvalData
    curves: list[CurveResult]

    def headline(self) -> dict[str, float]:
        window = self.protocol.steady_state_window
        return {c.classifier: steady_state(c, window) for c in self.curves}


# ─── Split ───────────────────────────────────────────────────────


def effective_protocol(config: RunConfig) -> EvalProtocol:
    """The named protocol with the run's train/validation overrides applied."""
    try:
        protocol = get_eval_protocol(config.evaluation.protocol)
    except KeyError as e:
        raise UsageError(str(e.args[0])) from e
    n_train = config.evaluation.n_train or protocol.n_train
    n_validation = config.evaluation.n_validation or protocol.n_validation
    return EvalProtocol(
        name=protocol.name,
        n_trials=n_train + n_validation,
        n_train=n_train,
        n_validation=n_validation,
        arms=protocol.arms,
        svm_start=protocol.svm_start,
        mondrian_start=protocol.mondrian_start,
        step=protocol.step,
        steady_state_window=protocol.steady_state_window,
        description=protocol.description,
    )


def split_groups(
    groups: Sequence[tuple[Trial, ...]],
    n_train: int,
    n_validation: int,
    shuffle: bool = False,
    seed: int = 0,
) -> tuple[list[tuple[Trial, ...]], list[tuple[Trial, ...]]]:
    """First *n_train* trial indices train, the next *n_validation* validate.

    Raises:
        InsufficientTrials: fewer groups than the split asks for.
    """
    if n_validation < 1:
        raise InsufficientTrials("the validation split must hold at least one trial")
    if len(groups) < n_train + n_validation:
        raise InsufficientTrials(
            f"{len(groups)} trial(s) available; {n_train} train + {n_validation} validation needed"
        )
    order = list(range(len(groups)))
    if shuffle:
        order = [int(i) for i in np.random.default_rng(seed).permutation(len(groups))]
    picked = [groups[i] for i in order]
    return picked[:n_train], picked[n_train : n_train + n_validation]


def prepare_eval(trials: Sequence[Trial], protocol: EvalProtocol, config: RunConfig) -> EvalData:
    groups = group_by_index(list(trials))
    arms = {len(g) for g in groups}
    if arms != {protocol.arms}:
        raise DataError(
            f"protocol {protocol.name} expects {protocol.arms} arm(s) per trial, "
            f"found {sorted(arms)}"
        )
    train_groups, validation_groups = split_groups(
        groups,
        protocol.n_train,
        protocol.n_validation,
        shuffle=config.evaluation.shuffle,
        seed=config.seed,
    )
    train_trials = [t for g in train_groups for t in g]
    calibration = calibrate_trials(train_trials, config.segmentation, config.bands)

    encoding = config.encoding
    train_matrices = group_matrices(
        encode_trials(train_trials, calibration, encoding, config.jobs)
    )
    validation_matrices = group_matrices(
        encode_trials([t for g in validation_groups for t in g], calibration, encoding, config.jobs)
    )
    # group_matrices sorts by base id; keep the split order instead.
    train_order = [g[0].base_id for g in train_groups]
    by_id = {g[0].base_id: g for g in train_matrices}
    train_matrices = [by_id[i] for i in train_order]

    layout = fit_layout(train_matrices, config.levels, config.one_hot)
    return EvalData(
        train=vectorize_with(train_matrices, layout),
        validation=vectorize_with(validation_matrices, layout),
        calibration=calibration,
        train_ids=train_order,
        validation_ids=[g[0].base_id for g in validation_groups],
    )


# ─── Curves ──────────────────────────────────────────────────────


def accuracy(predicted: np.ndarray, truth: np.ndarray) -> float:
    if len(truth) == 0:
        return math.nan
    return float(np.mean(np.asarray(predicted) == np.asarray(truth)))


def _svm_curve(
    data: EvalData, protocol: EvalProtocol, name: str, config: RunConfig
) -> CurveResult:
    svm_config = resolve_svm_config(get_classifier_profile(name), config)
    curve = CurveResult(classifier=name)
    for step, k in enumerate(range(protocol.svm_start, protocol.n_train + 1, protocol.step)):
        ds = data.train.subset(data.train_ids[:k])
        try:
            model = train_svm_with(ds, svm_config)
            acc = accuracy(predict_many(model, data.validation.X), data.validation.y)
        except (SingleClass, DegenerateFeatures) as e:
            logger.warning("%s: step %d skipped: %s", name, step, e)
            acc = math.nan
        curve.points.append(CurvePoint(step, k, len(ds), acc))
        logger.debug("%s: %d trial(s) → accuracy %.4f", name, k, acc)
    return curve


def _mondrian_curve(
    data: EvalData, protocol: EvalProtocol, name: str, config: RunConfig, seed: int
) -> CurveResult:
    curve = CurveResult(classifier=name)
    start = min(protocol.mondrian_start, protocol.n_train)
    forest = fit_forest(new_forest(config, seed), data.train.subset(data.train_ids[:start]), config)
    seen = start
    for step, k in enumerate(range(start, protocol.n_train + 1, protocol.step)):
        if k > seen:
            added = data.train.subset(data.train_ids[seen:k])
            forest.partial_fit(added.X, added.y)
            seen = k
        acc = accuracy(forest.predict(data.validation.X), data.validation.y)
        curve.points.append(CurvePoint(step, k, forest.n_samples, acc))
        logger.debug("%s: %d trial(s) → accuracy %.4f", name, k, acc)
    return curve


def learning_curve(
    data: EvalData, protocol: EvalProtocol, classifier: str, config: RunConfig, seed: int
) -> CurveResult:
    """Validation accuracy per training size for one classifier profile."""
    try:
        profile = get_classifier_profile(classifier)
    except KeyError as e:
        raise UsageError(str(e.args[0])) from e
    if profile.family == "mondrian":
        curve = _mondrian_curve(data, protocol, classifier, config, seed)
    else:
        curve = _svm_curve(data, protocol, classifier, config)
    logger.info(
        "%s: %d step(s), steady-state accuracy %.4f",
        classifier,
        len(curve.points),
        steady_state(curve, protocol.steady_state_window),
    )
    return curve


def steady_state(curve: CurveResult, last: int = 5) -> float:
    """Mean accuracy over the last *last* defined steps."""
    values = [a for a in curve.accuracies if not math.isnan(a)][-last:]
    return float(np.mean(values)) if values else math.nan


def classifier_names(config: RunConfig, kernels: Sequence[str] = ()) -> list[str]:
    """Configured classifiers plus one SVM per extra kernel, without duplicates."""
    names = list(config.evaluation.classifiers)
    for kernel in kernels:
        name = f"svm-{kernel}"
        if name not in names:
            names.append(name)
    return names


def run_evaluation(
    trials: Sequence[Trial], config: RunConfig, kernels: Sequence[str] = ()
) -> EvalReport:
    protocol = effective_protocol(config)
    data = prepare_eval(trials, protocol, config)
    curves = [
        learning_curve(data, protocol, name, config, config.seed)
        for name in classifier_names(config, kernels)
    ]
    return EvalReport(protocol=protocol, data=data, curves=curves)


# ─── Reports ─────────────────────────────────────────────────────


def curves_frame(curves: Sequence[CurveResult]) -> pd.DataFrame:
    """Wide table: one row per training size, one accuracy column per classifier."""
    frame = pd.DataFrame({"train_samples": pd.Series(dtype=np.int64)})
    for curve in curves:
        column = pd.DataFrame(
            {
                "train_samples": [p.train_samples for p in curve.points],
                curve.classifier: [p.accuracy for p in curve.points],
            }
        )
        frame = frame.merge(column, on="train_samples", how="outer")
    return frame.sort_values("train_samples", kind="stable").reset_index(drop=True)


def write_curves_csv(curves: Sequence[CurveResult], path: str | Path) -> None:
    text = curves_frame(curves).to_csv(
        index=False, float_format="%.6f", na_rep="", lineterminator="\n"
    )
    write_text_atomic(path, text)
