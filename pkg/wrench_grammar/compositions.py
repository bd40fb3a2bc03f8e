"""
Motion compositions: pairs of consecutive primitives.

Primitives are paired greedily and without overlap, (p0, p1), (p2, p3), ...;
an odd trailing primitive becomes a singleton composition. Each pair is
labelled from the gradient families of its members.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, replace
from enum import StrEnum

import numpy as np

from .errors import EmptySequence
from .primitives import GradientLabel, Primitive
from .signal_io import AxisSeries


class McLabel(StrEnum):
    ADJUSTMENT = "a"
    INCREASE = "i"
    DECREASE = "d"
    CONSTANT = "k"
    CONTACT = "c"
    UNSTABLE = "u"


_SINGLETON_LABELS = {
    "pos": McLabel.INCREASE,
    "neg": McLabel.DECREASE,
    "const": McLabel.CONSTANT,
}


@dataclass(frozen=True)
class MotionComposition:
    label: McLabel
    avg: float
    rms: float
    amplitude: float
    p1_label: GradientLabel
    p2_label: GradientLabel | None
    t1_start: float
    t1_end: float
    t2_start: float
    t2_end: float
    t_avg: float
    value_max: float
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
    def is_singleton(self) -> bool:
        return self.p2_label is None

    @property
    def is_contact(self) -> bool:
        return self.label is McLabel.CONTACT

    def absorb(self, other: MotionComposition) -> MotionComposition:
        """Merge an adjacent composition into this one, keeping this label."""
        d_self = max(self.duration, 0.0)
        d_other = max(other.duration, 0.0)
        total = d_self + d_other
        if total > 0:
            avg = (self.avg * d_self + other.avg * d_other) / total
            rms = math.sqrt((self.rms**2 * d_self + other.rms**2 * d_other) / total)
        else:
            avg, rms = self.avg, self.rms
        value_max = max(self.value_max, other.value_max)
        value_min = min(self.value_min, other.value_min)
        first, second = (self, other) if other.t_start >= self.t_start else (other, self)
        t1_start = min(self.t_start, other.t_start)
        t2_end = max(self.t_end, other.t_end)
        return replace(
            self,
            avg=avg,
            rms=rms,
            amplitude=value_max - value_min,
            t1_start=t1_start,
            t1_end=first.t_end,
            t2_start=second.t_start,
            t2_end=t2_end,
            t_avg=(t1_start + t2_end) / 2.0,
            value_max=value_max,
            value_min=value_min,
        )


def classify_pair(p1: Primitive, p2: Primitive) -> McLabel:
    """Label a primitive pair. Impulses dominate, then sign agreement decides."""
    if p1.label.is_impulse or p2.label.is_impulse:
        return McLabel.CONTACT
    families = (p1.label.family, p2.label.family)
    if set(families) == {"pos", "neg"}:
        return McLabel.ADJUSTMENT
    if families == ("pos", "pos"):
        return McLabel.INCREASE
    if families == ("neg", "neg"):
        return McLabel.DECREASE
    if families == ("const", "const"):
        return McLabel.CONSTANT
    return McLabel.UNSTABLE


def _weighted_avg(units: Sequence[Primitive]) -> float:
    durations = [max(p.duration, 0.0) for p in units]
    total = sum(durations)
    if total <= 0:
        return float(np.mean([p.avg for p in units]))
    return sum(p.avg * d for p, d in zip(units, durations, strict=True)) / total


def _rms(units: Sequence[Primitive], series: AxisSeries | None) -> float:
    t_start = units[0].t_start
    t_end = units[-1].t_end
    if series is not None:
        mask = (series.times >= t_start) & (series.times <= t_end)
        if mask.any():
            window = series.values[mask]
            return float(np.sqrt(np.mean(window * window)))
    durations = [max(p.duration, 0.0) for p in units]
    total = sum(durations)
    if total <= 0:
        return float(np.sqrt(np.mean([p.avg**2 for p in units])))
    return math.sqrt(sum(p.avg**2 * d for p, d in zip(units, durations, strict=True)) / total)


def _make(
    label: McLabel, p1: Primitive, p2: Primitive | None, series: AxisSeries | None
) -> MotionComposition:
    units = [p1] if p2 is None else [p1, p2]
    value_max = max(p.max for p in units)
    value_min = min(p.min for p in units)
    last = units[-1]
    return MotionComposition(
        label=label,
        avg=_weighted_avg(units),
        rms=_rms(units, series),
        amplitude=value_max - value_min,
        p1_label=p1.label,
        p2_label=None if p2 is None else p2.label,
        t1_start=p1.t_start,
        t1_end=p1.t_end,
        t2_start=last.t_start,
        t2_end=last.t_end,
        t_avg=(p1.t_start + last.t_end) / 2.0,
        value_max=value_max,
        value_min=value_min,
    )


def singleton_label(p: Primitive) -> McLabel:
    if p.label.is_impulse:
        return McLabel.CONTACT
    return _SINGLETON_LABELS[p.label.family]


def compose(
    primitives: Sequence[Primitive], series: AxisSeries | None = None
) -> list[MotionComposition]:
    """Pair consecutive primitives into motion compositions.

    With *series*, rms is computed from the raw samples of each span;
    otherwise from the duration-weighted primitive averages.

    Raises:
        EmptySequence: no primitives given.
    """
    if not primitives:
        raise EmptySequence("compose() needs at least one primitive")

    out = []
    n_pairs = len(primitives) // 2
    for k in range(n_pairs):
        p1, p2 = primitives[2 * k], primitives[2 * k + 1]
        out.append(_make(classify_pair(p1, p2), p1, p2, series))
    if len(primitives) % 2:
        last = primitives[-1]
        out.append(_make(singleton_label(last), last, None, series))
    return out
