"""
Synthetic four-phase assembly trials.

A task profile describes, for each phase, a duration range and per-axis
signal templates (constant, ramp, impulse, damped oscillation) that share
the phase duration by weight. Generation is a pure function of the profile
and a seed: the same seed always yields the same trial, bit for bit after
CSV round-tripping.

For two-arm datasets the right arm carries the active templates and the
left arm is a reaction arm that holds the part steady: a low-pass-filtered,
sign-inverted copy of the right arm's clean wrench plus its own noise.
"""

from __future__ import annotations

import copy
import json
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.signal import lfilter, lfilter_zi

from .errors import InvalidProfile
from .runtime import write_json_atomic
from .signal_io import AXES, Arm, Axis, PhaseId, PhaseSpec, Trial, quantize, save_trial
from .validators import validate_profile

logger = logging.getLogger(__name__)

# ─── Default Profile ─────────────────────────────────────────────


def _const(weight: float = 1.0) -> dict[str, Any]:
    return {"kind": "constant", "weight": weight}


def _ramp(weight: float, delta: list[float]) -> dict[str, Any]:
    return {"kind": "ramp", "weight": weight, "delta": delta}


def _osc(weight: float, amplitude: list[float], frequency: list[float], damping: list[float]):
    return {
        "kind": "oscillation",
        "weight": weight,
        "amplitude": amplitude,
        "frequency": frequency,
        "damping": damping,
    }


def _impulse(weight: float, amplitude: list[float], rise: float = 0.04, decay: float = 0.1):
    return {"kind": "impulse", "weight": weight, "amplitude": amplitude, "rise": rise, "decay": decay}


# Signal scales are illustrative (N and N·m); they are not fitted to recorded data.
DEFAULT_PROFILE: dict[str, Any] = {
    "name": "snap-assembly",
    "sampling_rate": 200.0,
    "dominant_axis": "Fz",
    "noise": {
        "Fx": [0.05, 0.3],
        "Fy": [0.05, 0.3],
        "Fz": [0.05, 0.3],
        "Mx": [0.01, 0.03],
        "My": [0.01, 0.03],
        "Mz": [0.01, 0.03],
    },
    "reaction": {"gain": 0.8, "tau": 0.05},
    "phases": [
        {
            "phase": "approach",
            "duration": [2.0, 5.0],
            "axes": {
                "Fz": [_const(0.7), _ramp(0.3, [-4.0, -3.0])],
            },
        },
        {
            "phase": "rotation",
            "duration": [2.0, 5.0],
            "axes": {
                "Fx": [_ramp(0.35, [1.5, 2.5]), _ramp(0.35, [-2.5, -1.5]), _const(0.3)],
                "Fy": [_osc(1.0, [0.8, 1.2], [1.0, 1.5], [0.3, 0.6])],
                "My": [_ramp(0.5, [0.3, 0.5]), _ramp(0.5, [-0.5, -0.3])],
                "Mz": [_ramp(0.6, [0.4, 0.6]), _const(0.4)],
            },
        },
        {
            "phase": "insertion",
            "duration": [2.0, 5.0],
            "axes": {
                "Fx": [_const(0.5), _osc(0.5, [0.5, 0.8], [2.0, 3.0], [1.0, 2.0])],
                "Fz": [
                    _ramp(0.4, [-10.0, -8.0]),
                    _impulse(0.2, [-25.0, -20.0]),
                    _ramp(0.4, [7.0, 9.0]),
                ],
                "Mx": [_const(0.4), _impulse(0.2, [0.5, 0.8]), _const(0.4)],
            },
        },
        {
            "phase": "mating",
            "duration": [2.0, 5.0],
            "axes": {
                "Fx": [_ramp(0.5, [-1.0, -0.6]), _const(0.5)],
                "Fy": [_ramp(0.5, [0.6, 1.0]), _const(0.5)],
                "Fz": [_ramp(0.5, [3.0, 4.0]), _const(0.5)],
                "My": [_osc(1.0, [0.2, 0.3], [0.5, 1.0], [0.2, 0.4])],
                "Mz": [_ramp(0.5, [-0.5, -0.3]), _const(0.5)],
            },
        },
    ],
}


# ─── Profile Types ───────────────────────────────────────────────

Range = tuple[float, float]


def _as_range(value: Any) -> Range:
    if isinstance(value, int | float):
        return (float(value), float(value))
    lo, hi = value
    return (float(lo), float(hi))


@dataclass(frozen=True)
class TemplateSpec:
    """One piece of an axis signal; parameters are fixed values or [low, high] ranges."""

    kind: str
    weight: float = 1.0
    params: dict[str, Range] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "weight": self.weight}
        for name, (lo, hi) in self.params.items():
            out[name] = lo if lo == hi else [lo, hi]
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TemplateSpec:
        params = {k: _as_range(v) for k, v in data.items() if k not in ("kind", "weight")}
        return cls(kind=data["kind"], weight=float(data.get("weight", 1.0)), params=params)


@dataclass(frozen=True)
class PhaseProfile:
    phase: PhaseId
    duration: Range
    axes: dict[Axis, list[TemplateSpec]]

    def templates(self, axis: Axis) -> list[TemplateSpec]:
        """Templates of *axis*; an axis the profile leaves out holds its level."""
        return self.axes.get(axis) or [TemplateSpec("constant")]

    def to_dict(self) -> dict[str, Any]:
        return {
            "phase": self.phase.value,
            "duration": list(self.duration),
            "axes": {a.value: [t.to_dict() for t in tpls] for a, tpls in self.axes.items()},
        }


@dataclass(frozen=True)
class TaskProfile:
    """Everything the generator needs to draw one trial."""

    sampling_rate: float
    phases: tuple[PhaseProfile, ...]
    noise: dict[Axis, Range]
    dominant_axis: Axis = Axis.FZ
    reaction_gain: float = 0.8
    reaction_tau: float = 0.05
    name: str = "custom"

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "sampling_rate": self.sampling_rate,
            "dominant_axis": self.dominant_axis.value,
            "noise": {a.value: list(r) for a, r in self.noise.items()},
            "reaction": {"gain": self.reaction_gain, "tau": self.reaction_tau},
            "phases": [p.to_dict() for p in self.phases],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TaskProfile:
        """Build a profile from a mapping.

        Raises:
            InvalidProfile: the mapping fails validation.
        """
        result = validate_profile(data)
        if not result.ok:
            raise InvalidProfile("; ".join(result.errors))
        phases = tuple(
            PhaseProfile(
                phase=PhaseId(p["phase"]),
                duration=_as_range(p["duration"]),
                axes={
                    Axis(name): [TemplateSpec.from_dict(t) for t in tpls]
                    for name, tpls in p.get("axes", {}).items()
                },
            )
            for p in data["phases"]
        )
        reaction = data.get("reaction", {})
        return cls(
            sampling_rate=float(data["sampling_rate"]),
            phases=phases,
            noise={Axis(a): _as_range(r) for a, r in data.get("noise", {}).items()},
            dominant_axis=Axis(data.get("dominant_axis", "Fz")),
            reaction_gain=float(reaction.get("gain", 0.8)),
            reaction_tau=float(reaction.get("tau", 0.05)),
            name=str(data.get("name", "custom")),
        )

    def without_noise(self) -> TaskProfile:
        """Same profile with every noise range set to zero."""
        return TaskProfile(
            sampling_rate=self.sampling_rate,
            phases=self.phases,
            noise={axis: (0.0, 0.0) for axis in AXES},
            dominant_axis=self.dominant_axis,
            reaction_gain=self.reaction_gain,
            reaction_tau=self.reaction_tau,
            name=self.name,
        )


def default_profile() -> TaskProfile:
    return TaskProfile.from_dict(copy.deepcopy(DEFAULT_PROFILE))


def load_profile(path: str | Path) -> TaskProfile:
    """Read a JSON task profile.

    Raises:
        InvalidProfile: unreadable file or invalid contents.
    """
    profile_path = Path(path)
    try:
        data = json.loads(profile_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidProfile(f"cannot read profile {profile_path}: {e}") from e
    try:
        return TaskProfile.from_dict(data)
    except InvalidProfile as e:
        raise InvalidProfile(f"{profile_path}: {e}") from e


def save_profile(profile: TaskProfile, path: str | Path) -> Path:
    return write_json_atomic(path, profile.to_dict())


# ─── Rendering ───────────────────────────────────────────────────


def _draw(rng: np.random.Generator, spec: TemplateSpec, name: str, default: float) -> float:
    lo, hi = spec.params.get(name, (default, default))
    return float(rng.uniform(lo, hi)) if hi > lo else lo


def _piece(spec: TemplateSpec, n: int, rate: float, level: float, rng: np.random.Generator):
    """Render *n* samples of one template starting at *level*; return (values, end level)."""
    tau = np.arange(n) / rate
    span = n / rate
    if spec.kind == "constant":
        return np.full(n, level), level
    if spec.kind == "ramp":
        delta = _draw(rng, spec, "delta", 0.0)
        return level + delta * tau / span, level + delta
    if spec.kind == "impulse":
        amplitude = _draw(rng, spec, "amplitude", 0.0)
        rise = _draw(rng, spec, "rise", 0.04)
        decay = _draw(rng, spec, "decay", 0.1)
        shape = np.interp(tau, [0.0, rise, rise + decay], [0.0, 1.0, 0.0])
        return level + amplitude * shape, level
    if spec.kind == "oscillation":
        amplitude = _draw(rng, spec, "amplitude", 0.0)
        frequency = _draw(rng, spec, "frequency", 1.0)
        damping = _draw(rng, spec, "damping", 0.0)
        wave = amplitude * np.exp(-damping * tau) * np.sin(2.0 * math.pi * frequency * tau)
        return level + wave, level
    raise InvalidProfile(f"unknown template kind '{spec.kind}'")


def _render_axis(
    templates: Sequence[TemplateSpec], n: int, rate: float, level: float, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    weights = np.array([t.weight for t in templates], dtype=np.float64)
    edges = np.round(np.cumsum(weights) / weights.sum() * n).astype(int)
    starts = np.concatenate([[0], edges[:-1]])
    out = np.empty(n)
    for spec, a, b in zip(templates, starts, edges, strict=True):
        if b > a:
            out[a:b], level = _piece(spec, int(b - a), rate, level, rng)
    return out, level


def _render(profile: TaskProfile, rng: np.random.Generator):
    """Clean wrench (n, 6), sample times and phase table of one trial."""
    rate = profile.sampling_rate
    counts = []
    for phase in profile.phases:
        lo, hi = phase.duration
        seconds = float(rng.uniform(lo, hi)) if hi > lo else lo
        counts.append(max(2, int(round(seconds * rate))))
    n = sum(counts)
    bounds = np.concatenate([[0], np.cumsum(counts)])

    wrench = np.empty((n, len(AXES)))
    levels = dict.fromkeys(AXES, 0.0)
    for phase, a, b in zip(profile.phases, bounds[:-1], bounds[1:], strict=True):
        for j, axis in enumerate(AXES):
            wrench[a:b, j], levels[axis] = _render_axis(
                phase.templates(axis), int(b - a), rate, levels[axis], rng
            )

    times = quantize(np.arange(n) / rate)
    edges = quantize(bounds / rate)
    phases = tuple(
        PhaseSpec(phase.phase, float(edges[i]), float(edges[i + 1]))
        for i, phase in enumerate(profile.phases)
    )
    return times, wrench, phases


def _noise(profile: TaskProfile, n: int, rng: np.random.Generator) -> np.ndarray:
    out = np.zeros((n, len(AXES)))
    for j, axis in enumerate(AXES):
        lo, hi = profile.noise.get(axis, (0.0, 0.0))
        sigma = float(rng.uniform(lo, hi)) if hi > lo else lo
        if sigma > 0:
            out[:, j] = rng.normal(0.0, sigma, n)
    return out


def reaction_response(clean: np.ndarray, rate: float, gain: float, tau: float) -> np.ndarray:
    """Sign-inverted first-order low-pass response of the active arm's wrench."""
    dt = 1.0 / rate
    alpha = dt / (tau + dt)
    b, a = [alpha], [1.0, alpha - 1.0]
    zi = lfilter_zi(b, a)
    out = np.empty_like(clean)
    for j in range(clean.shape[1]):
        column = -gain * clean[:, j]
        out[:, j], _ = lfilter(b, a, column, zi=zi * column[0])
    return out


def _generate(
    profile: TaskProfile, seed: int, records: Sequence[tuple[str, Arm]]
) -> tuple[Trial, ...]:
    rng = np.random.default_rng(seed)
    times, clean, phases = _render(profile, rng)
    trials = []
    for trial_id, arm in records:
        signal = clean
        if arm is Arm.LEFT:
            signal = reaction_response(
                clean, profile.sampling_rate, profile.reaction_gain, profile.reaction_tau
            )
        wrench = quantize(signal + _noise(profile, len(times), rng))
        trials.append(Trial(trial_id=trial_id, arm=arm, times=times, wrench=wrench, phases=phases))
    return tuple(trials)


# ─── Public API ──────────────────────────────────────────────────


def generate_trial(
    profile: TaskProfile, seed: int, trial_id: str = "trial_000", arm: Arm = Arm.RIGHT
) -> Trial:
    """Draw one trial; deterministic for a fixed seed."""
    arm = Arm(arm)
    records = [(trial_id, Arm.RIGHT)] if arm is Arm.RIGHT else [("", Arm.RIGHT), (trial_id, arm)]
    return _generate(profile, seed, records)[-1]


def trial_seeds(base_seed: int, n_trials: int) -> list[int]:
    """Independent per-trial seeds spawned from one base seed."""
    children = np.random.SeedSequence(base_seed).spawn(n_trials)
    return [int(c.generate_state(1)[0]) for c in children]


def generate_dataset(
    profile: TaskProfile, n_trials: int, base_seed: int, arms: int = 1
) -> list[Trial]:
    """Draw *n_trials* trials (two records per index when arms=2).

    Raises:
        InvalidProfile: n_trials < 1 or arms not in {1, 2}.
    """
    if n_trials < 1:
        raise InvalidProfile(f"n_trials must be >= 1, got {n_trials}")
    if arms not in (1, 2):
        raise InvalidProfile(f"arms must be 1 or 2, got {arms}")
    arm_set = (Arm.RIGHT,) if arms == 1 else (Arm.RIGHT, Arm.LEFT)
    suffix = arms == 2
    trials: list[Trial] = []
    for i, seed in enumerate(trial_seeds(base_seed, n_trials)):
        base = f"trial_{i:03d}"
        records = [(f"{base}_{arm.value}" if suffix else base, arm) for arm in arm_set]
        trials.extend(_generate(profile, seed, records))
    logger.info("generated %d trial record(s) from %d index(es)", len(trials), n_trials)
    return trials


def write_dataset(trials: Sequence[Trial], out_dir: str | Path) -> list[Path]:
    """Save every trial as ``<trial_id>.csv`` plus its phase sidecar."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    return [save_trial(trial, root / f"{trial.trial_id}.csv") for trial in trials]
