"""
Refinement filter: compresses a label sequence at any grammar level.

One filter cycle runs, in order:

    1. repeated-merge   adjacent units with the same label become one
    2. duration         a unit much shorter than its neighbours joins the longer one
    3. amplitude        a unit dwarfed by its neighbour joins it
    4. repeated-merge   coalesce what steps 2 and 3 made adjacent

Contact-class units (impulses, contact compositions and behaviours) are
never removed by steps 2 and 3. ``refine`` repeats the cycle until the
sequence stops changing or ``max_cycles`` is reached.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Protocol, Self, TypeVar

from .config import FilterConfig

logger = logging.getLogger(__name__)


class LabeledUnit(Protocol):
    @property
    def label(self) -> object: ...

    @property
    def t_start(self) -> float: ...

    @property
    def t_end(self) -> float: ...

    @property
    def duration(self) -> float: ...

    @property
    def amplitude(self) -> float: ...

    @property
    def is_contact(self) -> bool: ...

    def absorb(self, other: Self) -> Self: ...


U = TypeVar("U", bound=LabeledUnit)


def merge_repeats(units: Sequence[U]) -> list[U]:
    out: list[U] = []
    for unit in units:
        if out and out[-1].label == unit.label:
            out[-1] = out[-1].absorb(unit)
        else:
            out.append(unit)
    return out


def merge_short(units: Sequence[U], cfg: FilterConfig) -> list[U]:
    """Fold units that are negligible in time into their longer neighbour (left on ties)."""
    out = list(units)
    i = 0
    while i < len(out) and len(out) > 1:
        unit = out[i]
        if unit.is_contact:
            i += 1
            continue

        left = out[i - 1] if i > 0 else None
        right = out[i + 1] if i + 1 < len(out) else None
        neighbours = [u for u in (left, right) if u is not None]
        mean_neighbour = sum(u.duration for u in neighbours) / len(neighbours)
        negligible = unit.duration < cfg.min_duration_ratio * mean_neighbour
        if not negligible and unit.duration < cfg.min_duration:
            negligible = True
        if not negligible:
            i += 1
            continue

        if right is None or (left is not None and left.duration >= right.duration):
            out[i - 1] = out[i - 1].absorb(unit)
            del out[i]
        else:
            out[i + 1] = out[i + 1].absorb(unit)
            del out[i]
            i += 1
    return out


def merge_dominated(units: Sequence[U], cfg: FilterConfig) -> list[U]:
    """Fold a unit into an adjacent one whose amplitude is amp_ratio times larger."""
    out = list(units)
    i = 0
    while i < len(out) - 1:
        a, b = out[i], out[i + 1]
        if not (a.is_contact or b.is_contact):
            big, small = (a, b) if a.amplitude >= b.amplitude else (b, a)
            if big.amplitude > 0 and big.amplitude >= cfg.amp_ratio * small.amplitude:
                out[i] = big.absorb(small)
                del out[i + 1]
        i += 1
    return out


def filter_once(seq: Sequence[U], cfg: FilterConfig) -> list[U]:
    """Run one filter cycle. The output is never longer than the input."""
    units = merge_repeats(seq)
    units = merge_short(units, cfg)
    units = merge_dominated(units, cfg)
    return merge_repeats(units)


@dataclass
class RefineTrace:
    """Outcome of a refine run: the units plus the length after every cycle."""

    units: list = field(default_factory=list)
    lengths: list[int] = field(default_factory=list)
    converged: bool = False

    @property
    def cycles(self) -> int:
        return len(self.lengths)


def refine_trace(seq: Sequence[U], cfg: FilterConfig) -> RefineTrace:
    units = list(seq)
    trace = RefineTrace(units=units)
    for _ in range(cfg.max_cycles):
        nxt = filter_once(units, cfg)
        trace.lengths.append(len(nxt))
        if nxt == units:
            trace.converged = True
            break
        units = nxt
    trace.units = units
    if not trace.converged:
        logger.debug("refine stopped after %d cycle(s) without a fixpoint", cfg.max_cycles)
    return trace


def refine(seq: Sequence[U], cfg: FilterConfig) -> list[U]:
    """Apply filter cycles until nothing changes or max_cycles is hit."""
    return refine_trace(seq, cfg).units
