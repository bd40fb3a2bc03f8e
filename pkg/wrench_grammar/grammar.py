"""
Grammar encoding and feature vectors.

A trial is encoded into a GrammarMatrix: for every (level, axis, phase) the
ordered words of the refined unit sequence at that level. For
classification, word sequences are stretched to a common width per
(arm, level, phase), mapped to ordinal ids through per-level codebooks, and
laid out in a fixed column order

    arm → level → axis → slot

so that every sample of a dataset shares one feature layout. One sample is
one (trial, phase) pair; its class is the phase.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import StrEnum
from itertools import repeat
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from .behaviors import LlbLabel, derive_behaviors
from .compositions import McLabel, compose
from .config import EncodingConfig
from .errors import DataError, EncodingError, InvariantViolation, NothingEncoded
from .primitives import Calibration, GradientLabel, GradientThresholds, extract_primitives
from .refinement import refine_trace
from .runtime import read_versioned_json, with_header, write_json_atomic, write_text_atomic
from .signal_io import AXES, PHASES, Arm, Axis, AxisSeries, PhaseId, Trial, iter_phase_series

logger = logging.getLogger(__name__)


class Level(StrEnum):
    PRIMITIVE = "primitive"
    MC = "mc"
    LLB = "llb"


LEVELS: tuple[Level, ...] = tuple(Level)

ALPHABETS: dict[Level, tuple[str, ...]] = {
    Level.PRIMITIVE: tuple(g.value for g in GradientLabel),
    Level.MC: tuple(m.value for m in McLabel),
    Level.LLB: tuple(b.value for b in LlbLabel),
}

PHASE_CLASSES: tuple[str, ...] = tuple(p.value for p in PHASES)

WordKey = tuple[Level, Axis, PhaseId]


# ─── Grammar Matrix ──────────────────────────────────────────────


@dataclass
class GrammarMatrix:
    """Word sequences of one trial record, keyed by (level, axis, phase)."""

    trial_id: str
    arm: Arm
    words: dict[WordKey, tuple[str, ...]] = field(default_factory=dict)

    @property
    def base_id(self) -> str:
        suffix = f"_{self.arm.value}"
        if self.trial_id.endswith(suffix):
            return self.trial_id[: -len(suffix)]
        return self.trial_id

    def sequence(self, level: Level, axis: Axis, phase: PhaseId) -> tuple[str, ...]:
        return self.words.get((level, axis, phase), ())

    def width(self, level: Level, phase: PhaseId) -> int:
        return max((len(self.sequence(level, a, phase)) for a in AXES), default=0)

    def to_dict(self) -> dict[str, Any]:
        levels: dict[str, Any] = {}
        for level in LEVELS:
            per_axis: dict[str, Any] = {}
            for axis in AXES:
                per_axis[axis.value] = {
                    phase.value: list(self.sequence(level, axis, phase)) for phase in PHASES
                }
            levels[level.value] = per_axis
        return {"trial_id": self.trial_id, "arm": self.arm.value, "levels": levels}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GrammarMatrix:
        words: dict[WordKey, tuple[str, ...]] = {}
        for level_name, per_axis in data.get("levels", {}).items():
            level = Level(level_name)
            for axis_name, per_phase in per_axis.items():
                for phase_name, seq in per_phase.items():
                    words[(level, Axis(axis_name), PhaseId(phase_name))] = tuple(seq)
        return cls(trial_id=data["trial_id"], arm=Arm(data.get("arm", "right")), words=words)


def save_grammar(matrix: GrammarMatrix, path: str | Path) -> Path:
    return write_json_atomic(path, with_header("grammar", matrix.to_dict()))


def load_grammar(path: str | Path) -> GrammarMatrix:
    return GrammarMatrix.from_dict(read_versioned_json(path, "grammar"))


def load_grammars(directory: str | Path) -> list[GrammarMatrix]:
    """Load every grammar file of a directory, sorted by file name.

    Raises:
        NothingEncoded: the directory holds no grammar files.
    """
    root = Path(directory)
    files = sorted(root.glob("*.json")) if root.is_dir() else []
    if not files:
        raise NothingEncoded(f"No grammar files in {root}")
    return [load_grammar(p) for p in files]


# ─── Encoding ────────────────────────────────────────────────────


@dataclass
class EncodedSeries:
    """Refined units of one phase series at all three levels, plus unit counts."""

    primitives: list
    mcs: list
    llbs: list
    counts: dict[str, int]

    def words(self, level: Level) -> tuple[str, ...]:
        units = {Level.PRIMITIVE: self.primitives, Level.MC: self.mcs, Level.LLB: self.llbs}[level]
        return tuple(u.label.value for u in units)


def encode_series(
    series: AxisSeries, thresholds: GradientThresholds, config: EncodingConfig | None = None
) -> EncodedSeries:
    """Run primitives → refine → compositions → refine → behaviours → refine."""
    config = config or EncodingConfig()
    seg = config.segmentation
    filt = replace(config.filtering, min_duration=max(config.filtering.min_duration, 2.0 * series.dt))

    raw_primitives = extract_primitives(
        series,
        thresholds,
        seg.r2_min,
        seg.min_window,
        noise_scale=seg.noise_scale,
        refine_breakpoints=seg.refine_breakpoints,
    )
    primitives = refine_trace(raw_primitives, filt).units
    raw_mcs = compose(primitives, series)
    mcs = refine_trace(raw_mcs, filt).units
    raw_llbs = derive_behaviors(mcs)
    llbs = refine_trace(raw_llbs, filt).units

    if len(raw_mcs) != math.ceil(len(primitives) / 2) or len(raw_llbs) != math.ceil(len(mcs) / 2):
        raise InvariantViolation("layer pairing did not halve the unit count")

    counts = {
        "primitives_raw": len(raw_primitives),
        "primitives": len(primitives),
        "mcs_raw": len(raw_mcs),
        "mcs": len(mcs),
        "llbs_raw": len(raw_llbs),
        "llbs": len(llbs),
    }
    return EncodedSeries(primitives=primitives, mcs=mcs, llbs=llbs, counts=counts)


def _iter_encoded(
    trial: Trial, calibration: Calibration, config: EncodingConfig
) -> Iterable[tuple[PhaseId, Axis, EncodedSeries]]:
    try:
        for phase, axis, series in iter_phase_series(trial):
            try:
                encoded = encode_series(series, calibration.for_axis(axis), config)
            except DataError as e:
                raise EncodingError(trial.trial_id, axis.value, phase.value, str(e)) from e
            yield phase, axis, encoded
    except EncodingError:
        raise
    except DataError as e:
        raise EncodingError(trial.trial_id, "-", "-", str(e)) from e


def encode_trial(
    trial: Trial, calibration: Calibration, config: EncodingConfig | None = None
) -> GrammarMatrix:
    """Encode every (level, axis, phase) of a trial.

    Raises:
        EncodingError: a phase series could not be encoded (cause chained).
    """
    config = config or EncodingConfig()
    words: dict[WordKey, tuple[str, ...]] = {}
    for phase, axis, encoded in _iter_encoded(trial, calibration, config):
        for level in LEVELS:
            words[(level, axis, phase)] = encoded.words(level)
    logger.debug("encoded %s", trial.trial_id)
    return GrammarMatrix(trial_id=trial.trial_id, arm=trial.arm, words=words)


def encode_trials(
    trials: Sequence[Trial],
    calibration: Calibration,
    config: EncodingConfig | None = None,
    jobs: int = 1,
) -> list[GrammarMatrix]:
    """Encode trials, in a process pool when jobs > 1. Output order matches input."""
    config = config or EncodingConfig()
    if jobs <= 1 or len(trials) <= 1:
        return [encode_trial(t, calibration, config) for t in trials]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(encode_trial, trials, repeat(calibration), repeat(config)))


def compression_report(
    trial: Trial, calibration: Calibration, config: EncodingConfig | None = None
) -> list[dict[str, Any]]:
    """Unit counts before and after filtering, per (phase, axis)."""
    config = config or EncodingConfig()
    rows = []
    for phase, axis, encoded in _iter_encoded(trial, calibration, config):
        rows.append({"phase": phase.value, "axis": axis.value, **encoded.counts})
    return rows


# ─── Resampling ──────────────────────────────────────────────────


def stretch(words: Sequence[str], width: int) -> tuple[str, ...]:
    """Resample *words* to exactly *width* slots by nearest index.

    Slot j takes word floor(j·(n−1)/(width−1) + 0.5); first and last words
    are kept and order is preserved.
    """
    n = len(words)
    if width <= 0 or n == 0:
        return ()
    if width == 1:
        return (words[0],)
    if n == width:
        return tuple(words)
    return tuple(words[int(math.floor(j * (n - 1) / (width - 1) + 0.5))] for j in range(width))


def resample_words(
    matrix: GrammarMatrix, widths: Mapping[tuple[Arm, Level, PhaseId], int] | None = None
) -> GrammarMatrix:
    """Stretch every sequence to the width of its (arm, level, phase).

    Without *widths*, each (level, phase) is stretched to the longest
    sequence among the matrix's axes.
    """
    words: dict[WordKey, tuple[str, ...]] = {}
    for (level, axis, phase), seq in matrix.words.items():
        if widths is None:
            width = matrix.width(level, phase)
        else:
            width = widths[(matrix.arm, level, phase)]
        words[(level, axis, phase)] = stretch(seq, width)
    return GrammarMatrix(trial_id=matrix.trial_id, arm=matrix.arm, words=words)


GrammarGroup = tuple[GrammarMatrix, ...]


def group_matrices(matrices: Iterable[GrammarMatrix]) -> list[GrammarGroup]:
    """Group arm records of the same trial (right first), ordered by base id."""
    groups: dict[str, list[GrammarMatrix]] = {}
    for matrix in matrices:
        groups.setdefault(matrix.base_id, []).append(matrix)
    arm_order = {arm: i for i, arm in enumerate(Arm)}
    return [tuple(sorted(groups[k], key=lambda m: arm_order[m.arm])) for k in sorted(groups)]


def fit_widths(groups: Sequence[GrammarGroup]) -> dict[tuple[Arm, Level, PhaseId], int]:
    """Longest sequence per (arm, level, phase) over all groups and axes (at least 1)."""
    widths: dict[tuple[Arm, Level, PhaseId], int] = {}
    for group in groups:
        for matrix in group:
            for level in LEVELS:
                for phase in PHASES:
                    key = (matrix.arm, level, phase)
                    widths[key] = max(widths.get(key, 1), matrix.width(level, phase))
    return widths


# ─── Codebooks ───────────────────────────────────────────────────


@dataclass(frozen=True)
class Codebook:
    """Ordinal ids for one level's words; id 0 is reserved for padding and unknowns."""

    level: Level
    known: frozenset[str]

    def encode(self, word: str) -> int:
        if word not in self.known:
            return 0
        return ALPHABETS[self.level].index(word) + 1

    @property
    def size(self) -> int:
        return len(ALPHABETS[self.level])

    def to_dict(self) -> dict[str, Any]:
        return {"level": self.level.value, "known": sorted(self.known)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Codebook:
        return cls(level=Level(data["level"]), known=frozenset(data["known"]))


def fit_codebooks(groups: Sequence[GrammarGroup]) -> dict[Level, Codebook]:
    """Freeze the words seen per level in the training groups."""
    seen: dict[Level, set[str]] = {level: set() for level in LEVELS}
    for group in groups:
        for matrix in group:
            for (level, _, _), seq in matrix.words.items():
                seen[level].update(w for w in seq if w in ALPHABETS[level])
    return {level: Codebook(level, frozenset(seen[level])) for level in LEVELS}


# ─── Dataset Layout ──────────────────────────────────────────────


@dataclass
class DatasetLayout:
    """Everything that fixes the column order of a PhaseDataset."""

    arms: tuple[Arm, ...]
    levels: tuple[Level, ...]
    widths: dict[tuple[Arm, Level, PhaseId], int]
    codebooks: dict[Level, Codebook]
    one_hot: bool = False

    def slots(self, arm: Arm, level: Level) -> int:
        return max(self.widths.get((arm, level, phase), 1) for phase in PHASES)

    @property
    def columns(self) -> list[str]:
        names = []
        for arm in self.arms:
            for level in self.levels:
                for axis in AXES:
                    for slot in range(self.slots(arm, level)):
                        base = f"{arm.value}/{level.value}/{axis.value}/{slot:03d}"
                        if self.one_hot:
                            names.extend(f"{base}={w}" for w in ALPHABETS[level])
                        else:
                            names.append(base)
        return names

    @property
    def dimension(self) -> int:
        return len(self.columns)

    def to_dict(self) -> dict[str, Any]:
        return {
            "arms": [a.value for a in self.arms],
            "levels": [lv.value for lv in self.levels],
            "widths": [
                {"arm": a.value, "level": lv.value, "phase": p.value, "width": w}
                for (a, lv, p), w in sorted(self.widths.items(), key=lambda kv: (
                    list(Arm).index(kv[0][0]), LEVELS.index(kv[0][1]), kv[0][2].index
                ))
            ],
            "codebooks": [self.codebooks[lv].to_dict() for lv in self.levels],
            "one_hot": self.one_hot,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DatasetLayout:
        widths = {
            (Arm(e["arm"]), Level(e["level"]), PhaseId(e["phase"])): int(e["width"])
            for e in data["widths"]
        }
        codebooks = {Level(c["level"]): Codebook.from_dict(c) for c in data["codebooks"]}
        return cls(
            arms=tuple(Arm(a) for a in data["arms"]),
            levels=tuple(Level(lv) for lv in data["levels"]),
            widths=widths,
            codebooks=codebooks,
            one_hot=bool(data.get("one_hot", False)),
        )


def fit_layout(
    groups: Sequence[GrammarGroup],
    levels: Sequence[Level | str] | None = None,
    one_hot: bool = False,
) -> DatasetLayout:
    if not groups:
        raise NothingEncoded("Cannot fit a feature layout without grammars")
    arms = tuple(m.arm for m in groups[0])
    return DatasetLayout(
        arms=arms,
        levels=tuple(Level(lv) for lv in (levels or LEVELS)),
        widths=fit_widths(groups),
        codebooks=fit_codebooks(groups),
        one_hot=one_hot,
    )


# ─── Phase Dataset ───────────────────────────────────────────────


@dataclass
class PhaseDataset:
    """N samples × D ordinal features, one sample per (trial, phase)."""

    X: np.ndarray
    y: np.ndarray
    trial_ids: tuple[str, ...]
    layout: DatasetLayout
    # Words per row that the layout's codebooks did not know.
    row_unknown: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.y)

    @property
    def unknown_words(self) -> int:
        return sum(self.row_unknown)

    @property
    def dimension(self) -> int:
        return int(self.X.shape[1])

    @property
    def class_names(self) -> tuple[str, ...]:
        return PHASE_CLASSES

    def subset(self, trial_ids: Iterable[str]) -> PhaseDataset:
        wanted = set(trial_ids)
        mask = np.array([tid in wanted for tid in self.trial_ids], dtype=bool)
        return PhaseDataset(
            X=self.X[mask],
            y=self.y[mask],
            trial_ids=tuple(t for t, keep in zip(self.trial_ids, mask, strict=True) if keep),
            layout=self.layout,
            row_unknown=tuple(c for c, keep in zip(self.row_unknown, mask, strict=False) if keep),
        )

    def head(self, n_trials: int) -> PhaseDataset:
        """Samples of the first *n_trials* distinct trials, in order."""
        order = list(dict.fromkeys(self.trial_ids))
        return self.subset(order[:n_trials])

    def to_csv(self, csv_path: str | Path, layout_path: str | Path) -> None:
        """Features then a trailing ``phase`` class column; layout and trial ids go to JSON."""
        frame = pd.DataFrame(self.X.astype(np.int64), columns=self.layout.columns)
        frame["phase"] = [PHASE_CLASSES[int(c)] for c in self.y]
        write_text_atomic(csv_path, frame.to_csv(index=False, lineterminator="\n"))
        write_json_atomic(
            layout_path,
            with_header(
                "dataset-layout",
                {
                    "layout": self.layout.to_dict(),
                    "trial_ids": list(self.trial_ids),
                    "row_unknown_words": list(self.row_unknown),
                },
            ),
        )

    @classmethod
    def from_csv(cls, csv_path: str | Path, layout_path: str | Path) -> PhaseDataset:
        meta = read_versioned_json(layout_path, "dataset-layout")
        layout = DatasetLayout.from_dict(meta["layout"])
        frame = pd.read_csv(csv_path)
        if list(frame.columns[:-1]) != layout.columns:
            raise DataError(f"{csv_path}: columns do not match {layout_path}")
        X = frame.iloc[:, :-1].to_numpy(dtype=np.float64)
        y = np.array([PHASE_CLASSES.index(c) for c in frame["phase"]], dtype=np.int64)
        return cls(
            X=X,
            y=y,
            trial_ids=tuple(meta["trial_ids"]),
            layout=layout,
            row_unknown=tuple(int(v) for v in meta.get("row_unknown_words", ())),
        )


def _row(group: GrammarGroup, phase: PhaseId, layout: DatasetLayout) -> tuple[list[float], int]:
    """Feature row of one (trial, phase) plus the number of unknown words in it."""
    row: list[float] = []
    unknown = 0
    by_arm = {m.arm: m for m in group}
    for arm in layout.arms:
        matrix = by_arm.get(arm)
        for level in layout.levels:
            codebook = layout.codebooks[level]
            slots = layout.slots(arm, level)
            width = layout.widths.get((arm, level, phase), 1)
            for axis in AXES:
                seq = stretch(matrix.sequence(level, axis, phase), width) if matrix else ()
                ids = [codebook.encode(w) for w in seq]
                unknown += sum(1 for w, i in zip(seq, ids, strict=True) if i == 0 and w)
                ids += [0] * (slots - len(ids))
                if layout.one_hot:
                    for i in ids:
                        hot = [0.0] * codebook.size
                        if i > 0:
                            hot[i - 1] = 1.0
                        row.extend(hot)
                else:
                    row.extend(float(i) for i in ids)
    return row, unknown


def vectorize_with(groups: Sequence[GrammarGroup], layout: DatasetLayout) -> PhaseDataset:
    """Build a dataset for *groups* using an existing (training) layout."""
    rows = []
    labels = []
    trial_ids = []
    row_unknown: list[int] = []
    for group in groups:
        arms = tuple(m.arm for m in group)
        if arms != layout.arms:
            raise DataError(
                f"trial {group[0].base_id}: arms {[a.value for a in arms]} do not match "
                f"layout {[a.value for a in layout.arms]}"
            )
        for phase in PHASES:
            row, n_unknown = _row(group, phase, layout)
            rows.append(row)
            labels.append(phase.index)
            trial_ids.append(group[0].base_id)
            row_unknown.append(n_unknown)
    unknown = sum(row_unknown)
    if unknown:
        logger.warning("%d word(s) not seen in training mapped to id 0", unknown)
    X = np.array(rows, dtype=np.float64).reshape(len(rows), layout.dimension)
    return PhaseDataset(
        X=X,
        y=np.array(labels, dtype=np.int64),
        trial_ids=tuple(trial_ids),
        layout=layout,
        row_unknown=tuple(row_unknown),
    )


def vectorize(
    groups: Sequence[GrammarGroup],
    widths: dict[tuple[Arm, Level, PhaseId], int] | None = None,
    codebooks: dict[Level, Codebook] | None = None,
    levels: Sequence[Level | str] | None = None,
    one_hot: bool = False,
) -> PhaseDataset:
    """Fit (or reuse) widths and codebooks on *groups* and build their dataset."""
    layout = fit_layout(groups, levels, one_hot)
    if widths is not None:
        layout.widths = dict(widths)
    if codebooks is not None:
        layout.codebooks = dict(codebooks)
    return vectorize_with(groups, layout)
