"""
Validation checks for config files, task profiles, phase tables and
calibration files.

Checks collect every problem they find into a ValidationResult instead of
stopping at the first one, so a user fixing a config sees all issues at once.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from .config import list_classifier_names, list_protocol_names


@dataclass
class ValidationResult:
    """Collects errors and warnings from validation checks."""

    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return len(self.errors) == 0

    def add_error(self, msg: str):
        self.errors.append(msg)

    def add_warning(self, msg: str):
        self.warnings.append(msg)

    def merge(self, other: ValidationResult):
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)


VALID_LEVELS = {"primitive", "mc", "llb"}
VALID_KERNELS = {"linear", "poly", "rbf"}
VALID_SCOPES = {"per-axis", "global"}
VALID_BATCH_SEMANTICS = {"count", "size"}
VALID_TEMPLATE_KINDS = {"constant", "ramp", "impulse", "oscillation"}
PHASE_NAMES = ("approach", "rotation", "insertion", "mating")
AXIS_NAMES = ("Fx", "Fy", "Fz", "Mx", "My", "Mz")


def _is_number(value: Any) -> bool:
    return isinstance(value, int | float) and not isinstance(value, bool) and math.isfinite(value)


def _section(data: dict, key: str, result: ValidationResult) -> dict:
    section = data.get(key, {})
    if section is None:
        return {}
    if not isinstance(section, dict):
        result.add_error(f"'{key}' must be an object")
        return {}
    return section


# ─── Run Config ──────────────────────────────────────────────────


def validate_run_config(data: Any) -> ValidationResult:
    """Validate a run-config mapping (as loaded from JSON or RunConfig.to_dict())."""
    result = ValidationResult()

    if not isinstance(data, dict):
        result.add_error("Config must be a JSON object")
        return result

    known = {
        "seed", "jobs", "levels", "one_hot", "paths", "segmentation", "bands",
        "filtering", "svm", "mondrian", "evaluation",
    }
    for key in data:
        if key not in known:
            result.add_warning(f"Unknown config key '{key}' ignored")

    if "seed" in data and not isinstance(data["seed"], int):
        result.add_error("'seed' must be an integer")
    if "jobs" in data and (not isinstance(data["jobs"], int) or data["jobs"] < 1):
        result.add_error("'jobs' must be a positive integer")

    levels = data.get("levels", ["primitive"])
    if not isinstance(levels, list) or not levels:
        result.add_error("'levels' must be a non-empty list")
    else:
        for level in levels:
            if level not in VALID_LEVELS:
                result.add_error(
                    f"Invalid level '{level}'. Must be one of: {', '.join(sorted(VALID_LEVELS))}"
                )

    seg = _section(data, "segmentation", result)
    r2_min = seg.get("r2_min", 0.70)
    if not _is_number(r2_min) or not 0.0 < r2_min < 1.0:
        result.add_error(f"segmentation.r2_min must be in (0, 1), got {r2_min!r}")
    min_window = seg.get("min_window", 5)
    if not isinstance(min_window, int) or min_window < 2:
        result.add_error(f"segmentation.min_window must be an integer >= 2, got {min_window!r}")
    noise_scale = seg.get("noise_scale", 0.0)
    if not _is_number(noise_scale) or noise_scale < 0:
        result.add_error("segmentation.noise_scale must be a non-negative number")

    bands = _section(data, "bands", result)
    cuts = [bands.get("cut_small", 0.25), bands.get("cut_med", 0.5), bands.get("cut_big", 0.75)]
    if not all(_is_number(c) for c in cuts) or not 0.0 < cuts[0] < cuts[1] < cuts[2] < 1.0:
        result.add_error(f"band cuts must satisfy 0 < small < med < big < 1, got {cuts}")
    scope = bands.get("scope", "per-axis")
    if scope not in VALID_SCOPES:
        result.add_error(f"bands.scope must be one of: {', '.join(sorted(VALID_SCOPES))}")

    filt = _section(data, "filtering", result)
    ratio = filt.get("min_duration_ratio", 0.1)
    if not _is_number(ratio) or not 0.0 <= ratio < 1.0:
        result.add_error("filtering.min_duration_ratio must be in [0, 1)")
    amp_ratio = filt.get("amp_ratio", 5.0)
    if not _is_number(amp_ratio) or amp_ratio <= 1.0:
        result.add_error("filtering.amp_ratio must be > 1")
    cycles = filt.get("max_cycles", 3)
    if not isinstance(cycles, int) or cycles < 1:
        result.add_error("filtering.max_cycles must be a positive integer")

    svm = _section(data, "svm", result)
    kernel = svm.get("kernel", "rbf")
    if kernel not in VALID_KERNELS:
        result.add_error(
            f"Invalid kernel '{kernel}'. Must be one of: {', '.join(sorted(VALID_KERNELS))}"
        )
    c_value = svm.get("C", 1.0)
    if not _is_number(c_value) or c_value <= 0:
        result.add_error(f"svm.C must be > 0, got {c_value!r}")
    gamma = svm.get("gamma", "scale")
    if gamma != "scale" and (not _is_number(gamma) or gamma <= 0):
        result.add_error("svm.gamma must be 'scale' or a positive number")

    mondrian = _section(data, "mondrian", result)
    trees = mondrian.get("n_trees", 100)
    if not isinstance(trees, int) or trees < 1:
        result.add_error("mondrian.n_trees must be a positive integer")
    lifetime = mondrian.get("lifetime")
    if lifetime is not None and (not isinstance(lifetime, int | float) or lifetime <= 0):
        result.add_error("mondrian.lifetime must be null (infinite) or a positive number")
    semantics = mondrian.get("batch_semantics", "count")
    if semantics not in VALID_BATCH_SEMANTICS:
        result.add_error("mondrian.batch_semantics must be 'count' or 'size'")

    evaluation = _section(data, "evaluation", result)
    protocol = evaluation.get("protocol", "sim-one-arm")
    if protocol not in list_protocol_names():
        result.add_error(
            f"Unknown protocol '{protocol}'. Available: {', '.join(list_protocol_names())}"
        )
    for name in evaluation.get("classifiers", []) or []:
        if name not in list_classifier_names():
            result.add_error(
                f"Unknown classifier '{name}'. Available: {', '.join(list_classifier_names())}"
            )
    for key in ("n_train", "n_validation"):
        value = evaluation.get(key)
        if value is not None and (not isinstance(value, int) or value < 1):
            result.add_error(f"evaluation.{key} must be a positive integer")

    return result


# ─── Phase Tables ────────────────────────────────────────────────


def validate_phase_table(rows: Sequence[tuple[str, float, float]]) -> ValidationResult:
    """Check a phase table: known names, positive windows, ordered, non-overlapping.

    Gaps between consecutive windows are only warned about.
    """
    result = ValidationResult()
    if not rows:
        result.add_error("Phase table is empty")
        return result

    seen: set[str] = set()
    prev_end: float | None = None
    for name, t_start, t_end in rows:
        if name not in PHASE_NAMES:
            result.add_error(f"Unknown phase '{name}'. Must be one of: {', '.join(PHASE_NAMES)}")
        if name in seen:
            result.add_error(f"Phase '{name}' listed twice")
        seen.add(name)
        if not t_start < t_end:
            result.add_error(f"Phase '{name}': t_start {t_start} must be < t_end {t_end}")
        if prev_end is not None:
            if t_start < prev_end:
                result.add_error(f"Phase '{name}' starts at {t_start} before the previous one ends")
            elif t_start > prev_end:
                result.add_warning(f"Gap before phase '{name}' ({prev_end} → {t_start})")
        prev_end = t_end

    return result


# ─── Task Profiles ───────────────────────────────────────────────


def _check_range(value: Any, where: str, result: ValidationResult):
    if _is_number(value):
        return
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(_is_number(v) for v in value)
        and value[0] <= value[1]
    ):
        return
    result.add_error(f"{where} must be a number or an ordered [low, high] pair")


def validate_profile(data: Any) -> ValidationResult:
    """Validate a synthetic task profile mapping."""
    result = ValidationResult()
    if not isinstance(data, dict):
        result.add_error("Profile must be a JSON object")
        return result

    rate = data.get("sampling_rate")
    if not _is_number(rate) or rate <= 0:
        result.add_error("'sampling_rate' must be a positive number")

    dominant = data.get("dominant_axis", "Fz")
    if dominant not in AXIS_NAMES:
        result.add_error(f"'dominant_axis' must be one of: {', '.join(AXIS_NAMES)}")

    noise = data.get("noise", {})
    if not isinstance(noise, dict):
        result.add_error("'noise' must map axis names to [low, high] stdev ranges")
    else:
        for axis, rng in noise.items():
            if axis not in AXIS_NAMES:
                result.add_error(f"noise: unknown axis '{axis}'")
            _check_range(rng, f"noise.{axis}", result)

    phases = data.get("phases")
    if not isinstance(phases, list) or [p.get("phase") for p in phases if isinstance(p, dict)] != list(
        PHASE_NAMES
    ):
        result.add_error(f"'phases' must list exactly {', '.join(PHASE_NAMES)} in order")
        return result

    has_insertion_impulse = False
    for phase in phases:
        name = phase["phase"]
        _check_range(phase.get("duration"), f"{name}.duration", result)
        duration = phase.get("duration")
        low = duration[0] if isinstance(duration, list) and duration else duration
        if _is_number(low) and low <= 0:
            result.add_error(f"{name}.duration must be positive")
        axes = phase.get("axes", {})
        if not isinstance(axes, dict):
            result.add_error(f"{name}.axes must be an object")
            continue
        for axis, templates in axes.items():
            if axis not in AXIS_NAMES:
                result.add_error(f"{name}: unknown axis '{axis}'")
                continue
            if not isinstance(templates, list) or not templates:
                result.add_error(f"{name}.{axis} must be a non-empty list of templates")
                continue
            for i, tpl in enumerate(templates):
                kind = tpl.get("kind") if isinstance(tpl, dict) else None
                if kind not in VALID_TEMPLATE_KINDS:
                    result.add_error(f"{name}.{axis}[{i}]: unknown template kind '{kind}'")
                    continue
                weight = tpl.get("weight", 1.0)
                if not _is_number(weight) or weight <= 0:
                    result.add_error(f"{name}.{axis}[{i}]: weight must be > 0")
                if kind == "impulse" and name == "insertion" and axis == dominant:
                    has_insertion_impulse = True

    if not has_insertion_impulse:
        result.add_error(
            f"The insertion phase must contain an impulse template on the dominant axis {dominant}"
        )
    return result


# ─── Calibration Files ───────────────────────────────────────────


def validate_calibration(data: Any) -> ValidationResult:
    """Validate a calibration.json mapping."""
    result = ValidationResult()
    if not isinstance(data, dict):
        result.add_error("Calibration must be a JSON object")
        return result
    if data.get("format") != "wrench-grammar/calibration":
        result.add_error("Not a calibration file (missing format header)")
    axes = data.get("axes")
    if not isinstance(axes, dict) or not axes:
        result.add_error("'axes' must be a non-empty object keyed by axis name")
        return result
    for key, entry in axes.items():
        if key not in AXIS_NAMES:
            result.add_error(f"axes: unknown key '{key}'")
        if not isinstance(entry, dict):
            result.add_error(f"axes.{key} must be an object")
            continue
        for name in ("eps_const", "g_max", "cut_small", "cut_med", "cut_big"):
            if not _is_number(entry.get(name)):
                result.add_error(f"axes.{key}.{name} must be a number")
    return result
