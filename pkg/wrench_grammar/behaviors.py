"""
Low-level behaviours: pairs of consecutive motion compositions.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, replace
from enum import StrEnum

from .compositions import McLabel, MotionComposition
from .errors import EmptySequence


class LlbLabel(StrEnum):
    PUSH = "PS"
    PULL = "PL"
    FIXED = "FX"
    CONTACT = "CT"
    ALIGNMENT = "AL"
    SHIFT = "SH"
    NOISE = "N"


_SAME_LABEL = {
    McLabel.INCREASE: LlbLabel.PUSH,
    McLabel.DECREASE: LlbLabel.PULL,
    McLabel.CONSTANT: LlbLabel.FIXED,
    McLabel.CONTACT: LlbLabel.CONTACT,
}

_SINGLETON = {
    **_SAME_LABEL,
    McLabel.ADJUSTMENT: LlbLabel.ALIGNMENT,
    McLabel.UNSTABLE: LlbLabel.NOISE,
}

# Pairs judged by amplitude growth: a rising second half is a shift.
_ADJUSTING_PAIRS = {
    (McLabel.ADJUSTMENT, McLabel.ADJUSTMENT),
    (McLabel.INCREASE, McLabel.DECREASE),
    (McLabel.DECREASE, McLabel.INCREASE),
}


@dataclass(frozen=True)
class LowLevelBehavior:
    label: LlbLabel
    avg: float
    max_val: float
    amplitude: float
    m1_label: McLabel
    m2_label: McLabel | None
    t1_start: float
    t1_end: float
    t2_start: float
    t2_end: float
    t_avg: float
    value_min: float

    @property
    def t_start(self) -> float:
        return self.t1_start

    @property
    def t_end(self) -> float:
        return self.t2_end

    @property
    def duration(self) -> float:
        return self.t2_end - self.t1_start

    @property
    def is_contact(self) -> bool:
        return self.label is LlbLabel.CONTACT

    def absorb(self, other: LowLevelBehavior) -> LowLevelBehavior:
        """Merge an adjacent behaviour into this one, keeping this label."""
        d_self = max(self.duration, 0.0)
        d_other = max(other.duration, 0.0)
        total = d_self + d_other
        avg = (self.avg * d_self + other.avg * d_other) / total if total > 0 else self.avg
        max_val = max(self.max_val, other.max_val)
        value_min = min(self.value_min, other.value_min)
        # The halves meet where the two merged units meet.
        first, second = (self, other) if other.t_start >= self.t_start else (other, self)
        t1_start = min(self.t1_start, other.t1_start)
        t2_end = max(self.t2_end, other.t2_end)
        return replace(
            self,
            avg=avg,
            max_val=max_val,
            amplitude=max_val - value_min,
            t1_start=t1_start,
            t1_end=first.t_end,
            t2_start=second.t_start,
            t2_end=t2_end,
            t_avg=(t1_start + t2_end) / 2.0,
            value_min=value_min,
        )


def classify_mc_pair(m1: MotionComposition, m2: MotionComposition) -> LlbLabel:
    labels = (m1.label, m2.label)
    if McLabel.UNSTABLE in labels:
        return LlbLabel.NOISE
    if m1.label == m2.label and m1.label in _SAME_LABEL:
        return _SAME_LABEL[m1.label]
    if labels in _ADJUSTING_PAIRS:
        return LlbLabel.SHIFT if m2.amplitude > m1.amplitude else LlbLabel.ALIGNMENT
    return LlbLabel.NOISE


def _weighted_avg(units: Sequence[MotionComposition]) -> float:
    durations = [max(m.duration, 0.0) for m in units]
    total = sum(durations)
    if total <= 0:
        return sum(m.avg for m in units) / len(units)
    return sum(m.avg * d for m, d in zip(units, durations, strict=True)) / total


def _make(label: LlbLabel, m1: MotionComposition, m2: MotionComposition | None) -> LowLevelBehavior:
    units = [m1] if m2 is None else [m1, m2]
    last = units[-1]
    max_val = max(m.value_max for m in units)
    value_min = min(m.value_min for m in units)
    return LowLevelBehavior(
        label=label,
        avg=_weighted_avg(units),
        max_val=max_val,
        amplitude=max_val - value_min,
        m1_label=m1.label,
        m2_label=None if m2 is None else m2.label,
        t1_start=m1.t_start,
        t1_end=m1.t_end,
        t2_start=last.t_start,
        t2_end=last.t_end,
        t_avg=(m1.t_start + last.t_end) / 2.0,
        value_min=value_min,
    )


def derive_behaviors(mcs: Sequence[MotionComposition]) -> list[LowLevelBehavior]:
    """Pair consecutive compositions into low-level behaviours.

    Raises:
        EmptySequence: no compositions given.
    """
    if not mcs:
        raise EmptySequence("derive_behaviors() needs at least one composition")

    out = []
    for k in range(len(mcs) // 2):
        m1, m2 = mcs[2 * k], mcs[2 * k + 1]
        out.append(_make(classify_mc_pair(m1, m2), m1, m2))
    if len(mcs) % 2:
        last = mcs[-1]
        out.append(_make(_SINGLETON[last.label], last, None))
    return out
