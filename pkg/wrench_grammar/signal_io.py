"""
Wrench trials: loading, saving, and slicing by task phase.

A trial is one recorded assembly attempt: a time-indexed 6-axis wrench
(three forces, three moments) plus a phase table that splits the recording
into the four task phases. On disk a trial is a CSV (optionally gzipped)

    t,fx,fy,fz,mx,my,mz

with a ``<stem>.phases.csv`` sidecar holding ``phase_id,t_start,t_end``.
Phase windows are half-open: a sample at time t belongs to the phase with
t_start <= t < t_end.
"""

from __future__ import annotations

import gzip
import io
import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import (
    EmptyPhase,
    InvalidPhases,
    MalformedRow,
    MissingPhaseFile,
    NonMonotoneTime,
    SeriesTooShort,
)
from .runtime import write_bytes_atomic
from .validators import validate_phase_table

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.6f"


class Axis(StrEnum):
    FX = "Fx"
    FY = "Fy"
    FZ = "Fz"
    MX = "Mx"
    MY = "My"
    MZ = "Mz"

    @property
    def column(self) -> str:
        return self.value.lower()

    @property
    def is_force(self) -> bool:
        return self.value.startswith("F")


class PhaseId(StrEnum):
    APPROACH = "approach"
    ROTATION = "rotation"
    INSERTION = "insertion"
    MATING = "mating"

    @property
    def index(self) -> int:
        return list(PhaseId).index(self)


class Arm(StrEnum):
    RIGHT = "right"
    LEFT = "left"


class TrialFormat(StrEnum):
    CSV = "csv"
    CSV_GZ = "csv.gz"

    @classmethod
    def from_path(cls, path: str | Path) -> TrialFormat:
        return cls.CSV_GZ if Path(path).name.endswith(".gz") else cls.CSV


AXES: tuple[Axis, ...] = tuple(Axis)
PHASES: tuple[PhaseId, ...] = tuple(PhaseId)
COLUMNS: tuple[str, ...] = ("t", *(a.column for a in AXES))
PHASE_COLUMNS: tuple[str, ...] = ("phase_id", "t_start", "t_end")


def quantize(values: np.ndarray) -> np.ndarray:
    """Round values to what the CSV writer stores, so saved data reloads bit-identically."""
    arr = np.asarray(values, dtype=np.float64)
    text = np.array([FLOAT_FORMAT % v for v in arr.ravel()], dtype=str)
    return text.astype(np.float64).reshape(arr.shape)


# ─── Types ───────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class AxisSeries:
    """Samples of one wrench axis, strictly increasing in time."""

    axis: Axis
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64)
        values = np.array(self.values, dtype=np.float64)
        if times.shape != values.shape or times.ndim != 1:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if len(times) < 2:
            raise SeriesTooShort(f"{self.axis} series has {len(times)} sample(s); need >= 2")
        if np.any(np.diff(times) <= 0):
            raise NonMonotoneTime(f"{self.axis} series times are not strictly increasing")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def dt(self) -> float:
        """Median sample spacing."""
        return float(np.median(np.diff(self.times)))


@dataclass(frozen=True)
class PhaseSpec:
    phase_id: PhaseId
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise InvalidPhases(
                f"phase {self.phase_id}: t_start {self.t_start} must be < t_end {self.t_end}"
            )

    def contains(self, t: float) -> bool:
        return self.t_start <= t < self.t_end


@dataclass(frozen=True, eq=False)
class Trial:
    """One recorded assembly attempt of one arm."""

    trial_id: str
    arm: Arm
    times: np.ndarray
    wrench: np.ndarray  # shape (n, 6), columns in AXES order
    phases: tuple[PhaseSpec, ...]

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64)
        wrench = np.array(self.wrench, dtype=np.float64)
        if wrench.shape != (len(times), len(AXES)):
            raise ValueError(f"wrench must have shape ({len(times)}, 6), got {wrench.shape}")
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise NonMonotoneTime(f"trial {self.trial_id}: times not strictly increasing")
        times.setflags(write=False)
        wrench.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "wrench", wrench)
        object.__setattr__(self, "arm", Arm(self.arm))
        object.__setattr__(self, "phases", tuple(self.phases))

        result = validate_phase_table([(p.phase_id.value, p.t_start, p.t_end) for p in self.phases])
        if not result.ok:
            raise InvalidPhases(f"trial {self.trial_id}: " + "; ".join(result.errors))
        for warning in result.warnings:
            logger.warning("trial %s: %s", self.trial_id, warning)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def base_id(self) -> str:
        """Trial id without a trailing ``_right``/``_left`` arm suffix."""
        for arm in Arm:
            suffix = f"_{arm.value}"
            if self.trial_id.endswith(suffix):
                return self.trial_id[: -len(suffix)]
        return self.trial_id

    def phase(self, phase_id: PhaseId) -> PhaseSpec:
        for spec in self.phases:
            if spec.phase_id == phase_id:
                return spec
        raise InvalidPhases(f"trial {self.trial_id} has no phase '{phase_id}'")

    def axis_values(self, axis: Axis) -> np.ndarray:
        return self.wrench[:, AXES.index(axis)]

    def axis_series(self, axis: Axis) -> AxisSeries:
        """The whole recording of one axis."""
        return AxisSeries(axis=axis, times=self.times, values=self.axis_values(axis))

    @property
    def duration(self) -> float:
        if len(self.times) < 2:
            return 0.0
        return float(self.times[-1] - self.times[0])


# ─── Slicing ─────────────────────────────────────────────────────


def _phase_mask(times: np.ndarray, phase: PhaseSpec) -> np.ndarray:
    return (times >= phase.t_start) & (times < phase.t_end)


def _require_samples(trial_id: str, phase: PhaseSpec, count: int):
    if count < 2:
        raise EmptyPhase(f"trial {trial_id}: phase {phase.phase_id} holds {count} sample(s); need >= 2")


def slice_phase(trial: Trial, phase: PhaseSpec, axis: Axis) -> AxisSeries:
    """Return the samples of *axis* inside the half-open window of *phase*.

    Raises:
        EmptyPhase: fewer than two samples fall inside the window.
    """
    if phase not in trial.phases:
        raise InvalidPhases(f"phase {phase.phase_id} is not part of trial {trial.trial_id}")
    mask = _phase_mask(trial.times, phase)
    _require_samples(trial.trial_id, phase, int(mask.sum()))
    return AxisSeries(axis=axis, times=trial.times[mask], values=trial.axis_values(axis)[mask])


def iter_phase_series(trial: Trial) -> Iterator[tuple[PhaseId, Axis, AxisSeries]]:
    """Yield every (phase, axis, series) of a trial in canonical order."""
    for phase_id in PHASES:
        spec = trial.phase(phase_id)
        for axis in AXES:
            yield phase_id, axis, slice_phase(trial, spec, axis)


# ─── File Formats ────────────────────────────────────────────────


def trial_stem(path: str | Path) -> str:
    """File name without the ``.csv`` / ``.csv.gz`` suffix."""
    name = Path(path).name
    for suffix in (".csv.gz", ".csv"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return Path(path).stem


def phase_sidecar_path(path: str | Path) -> Path:
    return Path(path).with_name(f"{trial_stem(path)}.phases.csv")


def _arm_from_stem(stem: str) -> Arm:
    if stem.endswith("_left"):
        return Arm.LEFT
    return Arm.RIGHT


def _read_text(path: Path, fmt: TrialFormat | None = None) -> str:
    if (fmt or TrialFormat.from_path(path)) is TrialFormat.CSV_GZ:
        with gzip.open(path, "rt", encoding="utf-8") as f:
            return f.read()
    return path.read_text(encoding="utf-8")


def _parse_columns(frame: pd.DataFrame, columns: tuple[str, ...], path: Path) -> np.ndarray:
    """Convert string cells to float64, reporting the first bad row."""
    out = np.empty((len(frame), len(columns)), dtype=np.float64)
    for j, col in enumerate(columns):
        cells = frame[col].to_numpy(dtype=str)
        try:
            out[:, j] = cells.astype(np.float64)
        except ValueError:
            for i, cell in enumerate(cells):
                try:
                    float(cell)
                except ValueError:
                    raise MalformedRow(str(path), i + 1, f"{col}={cell!r} is not a number") from None
        bad = ~np.isfinite(out[:, j])
        if bad.any():
            row = int(np.argmax(bad))
            raise MalformedRow(str(path), row + 1, f"{col}={cells[row]!r} is not finite")
    return out


def _read_frame(
    path: Path, columns: tuple[str, ...], fmt: TrialFormat | None = None
) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            io.StringIO(_read_text(path, fmt)), dtype=str, keep_default_na=False, skipinitialspace=True
        )
    except pd.errors.ParserError as e:
        raise MalformedRow(str(path), 0, f"cannot parse CSV: {e}") from e
    header = tuple(c.strip() for c in frame.columns)
    if header != columns:
        raise MalformedRow(str(path), 0, f"header {list(header)} != {list(columns)}")
    frame.columns = list(columns)
    empty = (frame == "").any(axis=1).to_numpy()
    if empty.any():
        raise MalformedRow(str(path), int(np.argmax(empty)) + 1, "missing column value")
    return frame


def load_phases(path: str | Path) -> list[PhaseSpec]:
    """Read a phase sidecar file."""
    sidecar = Path(path)
    frame = _read_frame(sidecar, PHASE_COLUMNS)
    bounds = _parse_columns(frame, PHASE_COLUMNS[1:], sidecar)
    phases = []
    for i, name in enumerate(frame["phase_id"]):
        try:
            phase_id = PhaseId(name.strip())
        except ValueError:
            raise MalformedRow(str(sidecar), i + 1, f"unknown phase '{name}'") from None
        phases.append(PhaseSpec(phase_id, float(bounds[i, 0]), float(bounds[i, 1])))
    return phases


def load_trial(path: str | Path, fmt: TrialFormat | None = None) -> Trial:
    """Load a trial CSV (plain or ``.csv.gz``) and its phase sidecar.

    *fmt* defaults to the format implied by the file suffix.

    Rows are sorted by t; duplicate timestamps are rejected.

    Raises:
        MalformedRow, NonMonotoneTime, MissingPhaseFile, InvalidPhases, EmptyPhase
    """
    trial_path = Path(path)
    sidecar = phase_sidecar_path(trial_path)
    if not sidecar.is_file():
        raise MissingPhaseFile(f"{trial_path}: phase file {sidecar.name} not found")

    frame = _read_frame(trial_path, COLUMNS, fmt)
    data = _parse_columns(frame, COLUMNS, trial_path)
    order = np.argsort(data[:, 0], kind="stable")
    data = data[order]
    if len(data) and data[0, 0] < 0:
        raise MalformedRow(str(trial_path), int(order[0]) + 1, f"t={data[0, 0]} is negative")
    if len(data) > 1:
        steps = np.diff(data[:, 0])
        if np.any(steps <= 0):
            where = int(np.argmax(steps <= 0))
            raise NonMonotoneTime(f"{trial_path}: duplicate timestamp t={data[where, 0]}")

    stem = trial_stem(trial_path)
    trial = Trial(
        trial_id=stem,
        arm=_arm_from_stem(stem),
        times=data[:, 0],
        wrench=data[:, 1:],
        phases=tuple(load_phases(sidecar)),
    )
    for phase in trial.phases:
        _require_samples(trial.trial_id, phase, int(_phase_mask(trial.times, phase).sum()))
    return trial


def _frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def save_trial(trial: Trial, path: str | Path) -> Path:
    """Write a trial and its phase sidecar; ``.csv.gz`` paths are gzip-compressed."""
    trial_path = Path(path)
    frame = pd.DataFrame(
        np.column_stack([trial.times, trial.wrench]), columns=list(COLUMNS)
    )
    text = _frame_to_csv(frame)
    if trial_path.name.endswith(".gz"):
        payload = gzip.compress(text.encode("utf-8"), mtime=0)
    else:
        payload = text.encode("utf-8")
    write_bytes_atomic(trial_path, payload)

    phase_frame = pd.DataFrame(
        {
            "phase_id": [p.phase_id.value for p in trial.phases],
            "t_start": [p.t_start for p in trial.phases],
            "t_end": [p.t_end for p in trial.phases],
        }
    )
    write_bytes_atomic(phase_sidecar_path(trial_path), _frame_to_csv(phase_frame).encode("utf-8"))
    return trial_path


def discover_trials(directory: str | Path) -> list[Path]:
    """All trial CSVs in *directory* (phase sidecars excluded), sorted by name."""
    root = Path(directory)
    files = [
        p
        for p in root.iterdir()
        if p.is_file()
        and (p.name.endswith(".csv") or p.name.endswith(".csv.gz"))
        and not p.name.endswith(".phases.csv")
    ]
    return sorted(files, key=lambda p: p.name)


def load_trials(directory: str | Path) -> list[Trial]:
    trials = [load_trial(p) for p in discover_trials(directory)]
    logger.info("loaded %d trial(s) from %s", len(trials), directory)
    return trials


def sample_rate(trial: Trial) -> float:
    """Nominal sampling rate in Hz from the median sample spacing."""
    if len(trial) < 2:
        return math.nan
    return 1.0 / float(np.median(np.diff(trial.times)))


def group_by_index(trials: list[Trial]) -> list[tuple[Trial, ...]]:
    """Group arm records of the same trial, right arm first, in base-id order."""
    groups: dict[str, list[Trial]] = {}
    for trial in trials:
        groups.setdefault(trial.base_id, []).append(trial)
    arm_order = {arm: i for i, arm in enumerate(Arm)}
    return [
        tuple(sorted(groups[key], key=lambda tr: arm_order[tr.arm])) for key in sorted(groups)
    ]
