"""
Primitive layer: piecewise-linear segmentation and gradient labelling.

An axis series is cut into consecutive linear segments by growing each
window while its least-squares fit keeps R² >= r2_min. Every segment's
slope is then mapped to one of nine gradient labels using thresholds
calibrated from a corpus of slopes.

Window statistics come from prefix sums, so fitting any window costs O(1)
and a full segmentation is linear in the series length.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, replace
from enum import StrEnum
from pathlib import Path

import numpy as np

from .config import BandConfig, SegmentationConfig
from .errors import (
    CalibrationDegenerate,
    EmptyCorpus,
    InvalidThresholds,
    SeriesTooShort,
)
from .runtime import read_versioned_json, with_header, write_json_atomic
from .signal_io import AXES, Axis, AxisSeries, Trial, iter_phase_series
from .validators import validate_calibration

logger = logging.getLogger(__name__)

# 1.4826 · MAD estimates σ for Gaussian data; second differences scale the variance by 6.
_MAD_TO_SIGMA = 1.4826 / math.sqrt(6.0)


# ─── Labels ──────────────────────────────────────────────────────


class GradientLabel(StrEnum):
    PIMP = "pimp"
    BPOS = "bpos"
    MPOS = "mpos"
    SPOS = "spos"
    CONST = "const"
    SNEG = "sneg"
    MNEG = "mneg"
    BNEG = "bneg"
    NIMP = "nimp"

    @property
    def family(self) -> str:
        """One of ``pos``, ``neg`` or ``const``."""
        if self is GradientLabel.CONST:
            return "const"
        if self in _POSITIVE:
            return "pos"
        return "neg"

    @property
    def is_impulse(self) -> bool:
        return self in (GradientLabel.PIMP, GradientLabel.NIMP)


_POSITIVE = frozenset(
    {GradientLabel.PIMP, GradientLabel.BPOS, GradientLabel.MPOS, GradientLabel.SPOS}
)
# Positive labels by ascending magnitude band; the negative side mirrors them.
_POS_BANDS = (GradientLabel.SPOS, GradientLabel.MPOS, GradientLabel.BPOS, GradientLabel.PIMP)
_NEG_BANDS = (GradientLabel.SNEG, GradientLabel.MNEG, GradientLabel.BNEG, GradientLabel.NIMP)


@dataclass(frozen=True)
class GradientThresholds:
    """Slope bands: |s| <= eps is constant, then small/medium/big/impulse by fractions of g_max."""

    eps_const: float
    g_max: float
    cut_small: float = 0.25
    cut_med: float = 0.50
    cut_big: float = 0.75

    def __post_init__(self):
        if not (math.isfinite(self.g_max) and self.g_max > 0):
            raise InvalidThresholds(f"g_max must be a positive number, got {self.g_max}")
        if not 0.0 < self.cut_small < self.cut_med < self.cut_big < 1.0:
            raise InvalidThresholds(
                f"cuts must satisfy 0 < small < med < big < 1, got "
                f"{self.cut_small}, {self.cut_med}, {self.cut_big}"
            )
        if not 0.0 < self.eps_const < self.cut_small * self.g_max:
            raise InvalidThresholds(
                f"eps_const {self.eps_const} must lie in (0, {self.cut_small * self.g_max})"
            )

    def to_dict(self) -> dict[str, float]:
        return {
            "eps_const": self.eps_const,
            "g_max": self.g_max,
            "cut_small": self.cut_small,
            "cut_med": self.cut_med,
            "cut_big": self.cut_big,
        }

    @classmethod
    def from_dict(cls, data: dict) -> GradientThresholds:
        return cls(
            eps_const=float(data["eps_const"]),
            g_max=float(data["g_max"]),
            cut_small=float(data.get("cut_small", 0.25)),
            cut_med=float(data.get("cut_med", 0.50)),
            cut_big=float(data.get("cut_big", 0.75)),
        )


def classify_gradient(slope: float, thresholds: GradientThresholds) -> GradientLabel:
    """Map a slope to its gradient label. Total over the reals."""
    magnitude = abs(slope)
    if magnitude <= thresholds.eps_const:
        return GradientLabel.CONST

    g = thresholds.g_max
    if magnitude <= thresholds.cut_small * g:
        band = 0
    elif magnitude <= thresholds.cut_med * g:
        band = 1
    elif magnitude <= thresholds.cut_big * g:
        band = 2
    else:
        band = 3
    return _POS_BANDS[band] if slope > 0 else _NEG_BANDS[band]


# ─── Segments ────────────────────────────────────────────────────


@dataclass(frozen=True)
class LinearSegment:
    """A least-squares line over samples [start, stop) of a series."""

    start: int
    stop: int
    t_start: float
    t_end: float
    slope: float
    intercept: float
    r2: float

    @property
    def length(self) -> int:
        return self.stop - self.start


class _WindowStats:
    """O(1) least-squares fits over any window [a, b) via prefix sums."""

    def __init__(self, series: AxisSeries, noise_scale: float):
        times = series.times
        values = series.values
        self.n = len(times)
        self.t0 = float(times[0])
        self.y0 = float(values.mean())
        t = times - self.t0
        y = values - self.y0

        def prefix(arr: np.ndarray) -> np.ndarray:
            return np.concatenate(([0.0], np.cumsum(arr)))

        self._st = prefix(t)
        self._sy = prefix(y)
        self._stt = prefix(t * t)
        self._syy = prefix(y * y)
        self._sty = prefix(t * y)
        # Python floats for the scalar growth loop.
        self._st_l = self._st.tolist()
        self._sy_l = self._sy.tolist()
        self._stt_l = self._stt.tolist()
        self._syy_l = self._syy.tolist()
        self._sty_l = self._sty.tolist()

        scale = float(np.max(np.abs(values)))
        curvature = np.diff(values, n=2) if len(values) >= 3 else np.zeros(1)
        sigma = _MAD_TO_SIGMA * float(np.median(np.abs(curvature - np.median(curvature))))
        self.noise_sigma = sigma
        self.var_floor = max(1e-12 * scale * scale, (noise_scale * sigma) ** 2)

    def _moments(self, a: int, b: int) -> tuple[float, float, float, float, float, int]:
        n = b - a
        st = self._st_l[b] - self._st_l[a]
        sy = self._sy_l[b] - self._sy_l[a]
        mt = st / n
        my = sy / n
        vtt = (self._stt_l[b] - self._stt_l[a]) / n - mt * mt
        vyy = (self._syy_l[b] - self._syy_l[a]) / n - my * my
        cty = (self._sty_l[b] - self._sty_l[a]) / n - mt * my
        return mt, my, max(vtt, 0.0), max(vyy, 0.0), cty, n

    def r2(self, a: int, b: int) -> float:
        _, _, vtt, vyy, cty, _ = self._moments(a, b)
        if vyy <= self.var_floor or vtt <= 0.0:
            return 1.0
        return min(1.0, (cty * cty) / (vtt * vyy))

    def fit(self, a: int, b: int) -> tuple[float, float, float]:
        """Slope, intercept (at absolute t = 0) and R² of window [a, b)."""
        mt, my, vtt, _, cty, _ = self._moments(a, b)
        slope = cty / vtt if vtt > 0.0 else 0.0
        intercept = (my + self.y0) - slope * (mt + self.t0)
        return slope, intercept, self.r2(a, b)

    def sse_many(self, a: int | np.ndarray, b: int | np.ndarray) -> np.ndarray:
        """Vectorised residual sum of squares of windows [a, b)."""
        a = np.asarray(a)
        b = np.asarray(b)
        n = (b - a).astype(np.float64)
        st = self._st[b] - self._st[a]
        sy = self._sy[b] - self._sy[a]
        mt = st / n
        my = sy / n
        vtt = np.maximum((self._stt[b] - self._stt[a]) / n - mt * mt, 0.0)
        vyy = np.maximum((self._syy[b] - self._syy[a]) / n - my * my, 0.0)
        cty = (self._sty[b] - self._sty[a]) / n - mt * my
        with np.errstate(divide="ignore", invalid="ignore"):
            explained = np.where(vtt > 0.0, cty * cty / vtt, 0.0)
        return np.maximum(vyy - explained, 0.0) * n


def _check_segmentation_args(r2_min: float, min_window: int):
    if not 0.0 < r2_min < 1.0:
        raise ValueError(f"r2_min must be in (0, 1), got {r2_min}")
    if min_window < 2:
        raise ValueError(f"min_window must be >= 2, got {min_window}")


def _refine_cut(stats: _WindowStats, start: int, end: int, min_window: int) -> int:
    """Move a cut back to where two lines fit [start, end + 1) best.

    Growth stops one sample after a turn point; the best two-line split
    recovers the turn itself.
    """
    stop = end + 1
    candidates = np.arange(start + min_window, end + 1)
    if len(candidates) <= 1:
        return end
    # A lone sample past the candidate has zero residual.
    right = np.where(stop - candidates >= 2, stats.sse_many(candidates, stop), 0.0)
    total = stats.sse_many(np.full_like(candidates, start), candidates) + right
    return int(candidates[int(np.argmin(total))])


def _tile_tail(
    stats: _WindowStats, start: int, n: int, r2_min: float, min_window: int
) -> list[tuple[int, int]] | None:
    """Cover [start, n) with the fewest valid windows.

    A window is valid when it spans exactly min_window samples, or at least
    two samples with R² >= r2_min. Ties prefer the longest first window.
    Returns None when no tiling exists.
    """

    def valid(a: int, b: int) -> bool:
        length = b - a
        return length == min_window or (length >= 2 and stats.r2(a, b) >= r2_min)

    best: dict[int, tuple[int, int]] = {n: (0, n)}
    for a in range(n - 2, start - 1, -1):
        choice: tuple[int, int] | None = None
        for b in range(n, a + 1, -1):
            if b in best and valid(a, b):
                count = best[b][0] + 1
                if choice is None or count < choice[0]:
                    choice = (count, b)
        if choice is not None:
            best[a] = choice

    if start not in best:
        return None
    cuts = []
    pos = start
    while pos < n:
        nxt = best[pos][1]
        cuts.append((pos, nxt))
        pos = nxt
    return cuts


def segment_axis(
    series: AxisSeries,
    r2_min: float = 0.70,
    min_window: int = 5,
    *,
    noise_scale: float = 0.0,
    refine_breakpoints: bool = True,
) -> list[LinearSegment]:
    """Cut *series* into consecutive linear segments covering every sample.

    Each segment is grown from min_window samples while the linear fit keeps
    R² >= r2_min. Windows with variance below 1e-12·scale² count as
    perfectly fit; a positive *noise_scale* raises that floor to the
    estimated noise level. The trailing samples are tiled so that no
    short leftover window breaks the fit rule.

    Raises:
        SeriesTooShort: the series holds fewer than min_window samples.
    """
    _check_segmentation_args(r2_min, min_window)
    n = len(series)
    if n < min_window:
        raise SeriesTooShort(f"{series.axis}: {n} sample(s) < min_window {min_window}")

    stats = _WindowStats(series, noise_scale)
    cuts: list[tuple[int, int]] = []
    start = 0
    while start < n:
        if n - start < 2 * min_window:
            tail = _tile_tail(stats, start, n, r2_min, min_window)
            while tail is None and cuts:
                start = cuts.pop()[0]
                tail = _tile_tail(stats, start, n, r2_min, min_window)
            if tail is None:
                logger.debug("%s: no valid tiling of [%d, %d); keeping one window", series.axis, start, n)
                tail = [(start, n)]
            cuts.extend(tail)
            break

        end = start + min_window
        limit = n - min_window
        while end < limit and stats.r2(start, end + 1) >= r2_min:
            end += 1
        if end == limit:
            if stats.r2(start, n) >= r2_min:
                end = n
        elif refine_breakpoints:
            end = _refine_cut(stats, start, end, min_window)
        cuts.append((start, end))
        start = end

    times = series.times
    segments = []
    for a, b in cuts:
        slope, intercept, r2 = stats.fit(a, b)
        t_end = float(times[b]) if b < n else float(times[-1])
        segments.append(
            LinearSegment(
                start=a,
                stop=b,
                t_start=float(times[a]),
                t_end=t_end,
                slope=slope,
                intercept=intercept,
                r2=r2,
            )
        )
    return segments


def segment_with(series: AxisSeries, config: SegmentationConfig) -> list[LinearSegment]:
    return segment_axis(
        series,
        config.r2_min,
        config.min_window,
        noise_scale=config.noise_scale,
        refine_breakpoints=config.refine_breakpoints,
    )


# ─── Calibration ─────────────────────────────────────────────────


def thresholds_from_slopes(
    slopes: Sequence[float] | np.ndarray, bands: BandConfig | None = None
) -> GradientThresholds:
    """Derive gradient thresholds from a pool of segment slopes.

    Raises:
        EmptyCorpus: no slopes given.
        CalibrationDegenerate: every slope is numerically zero.
    """
    bands = bands or BandConfig()
    magnitudes = np.abs(np.asarray(slopes, dtype=np.float64))
    if magnitudes.size == 0:
        raise EmptyCorpus("no segment slopes to calibrate from")

    g_max = float(np.percentile(magnitudes, bands.g_max_percentile))
    if not math.isfinite(g_max) or g_max <= 1e-12:
        raise CalibrationDegenerate(
            f"{bands.g_max_percentile:g}th percentile of |slope| is {g_max:g}; "
            "the corpus carries no gradient information"
        )

    eps = max(float(np.percentile(magnitudes, bands.eps_percentile)), bands.eps_floor * g_max)
    ceiling = 0.5 * bands.cut_small * g_max
    if eps >= bands.cut_small * g_max:
        logger.warning(
            "near-constant threshold %.4g swallows the small band; clamped to %.4g", eps, ceiling
        )
        eps = ceiling
    return GradientThresholds(
        eps_const=eps,
        g_max=g_max,
        cut_small=bands.cut_small,
        cut_med=bands.cut_med,
        cut_big=bands.cut_big,
    )


def calibrate_thresholds(
    corpus: Iterable[AxisSeries],
    r2_min: float = 0.70,
    min_window: int = 5,
    *,
    bands: BandConfig | None = None,
    noise_scale: float = 0.0,
    refine_breakpoints: bool = True,
) -> GradientThresholds:
    """Segment every series of *corpus* and calibrate thresholds from the slopes."""
    slopes: list[float] = []
    for series in corpus:
        segments = segment_axis(
            series,
            r2_min,
            min_window,
            noise_scale=noise_scale,
            refine_breakpoints=refine_breakpoints,
        )
        slopes.extend(s.slope for s in segments)
    return thresholds_from_slopes(slopes, bands)


# ─── Primitives ──────────────────────────────────────────────────


@dataclass(frozen=True)
class Primitive:
    """A labelled linear segment with value statistics."""

    label: GradientLabel
    avg: float
    max: float
    min: float
    t_start: float
    t_end: float
    gradient: float

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    @property
    def amplitude(self) -> float:
        return self.max - self.min

    @property
    def is_contact(self) -> bool:
        return self.label.is_impulse

    def absorb(self, other: Primitive) -> Primitive:
        """Merge an adjacent primitive into this one, keeping this label and gradient."""
        d_self = max(self.duration, 0.0)
        d_other = max(other.duration, 0.0)
        total = d_self + d_other
        avg = (self.avg * d_self + other.avg * d_other) / total if total > 0 else self.avg
        return replace(
            self,
            avg=avg,
            max=max(self.max, other.max),
            min=min(self.min, other.min),
            t_start=min(self.t_start, other.t_start),
            t_end=max(self.t_end, other.t_end),
        )


def primitives_from_segments(
    series: AxisSeries, segments: Sequence[LinearSegment], thresholds: GradientThresholds
) -> list[Primitive]:
    values = series.values
    out = []
    for seg in segments:
        window = values[seg.start : seg.stop]
        out.append(
            Primitive(
                label=classify_gradient(seg.slope, thresholds),
                avg=float(window.mean()),
                max=float(window.max()),
                min=float(window.min()),
                t_start=seg.t_start,
                t_end=seg.t_end,
                gradient=seg.slope,
            )
        )
    return out


def extract_primitives(
    series: AxisSeries,
    thresholds: GradientThresholds,
    r2_min: float = 0.70,
    min_window: int = 5,
    *,
    noise_scale: float = 0.0,
    refine_breakpoints: bool = True,
) -> list[Primitive]:
    """Segment *series* and label every segment.

    Primitives tile the series: consecutive spans share their boundary time.
    """
    segments = segment_axis(
        series,
        r2_min,
        min_window,
        noise_scale=noise_scale,
        refine_breakpoints=refine_breakpoints,
    )
    return primitives_from_segments(series, segments, thresholds)


# ─── Calibration Records ─────────────────────────────────────────


@dataclass(frozen=True)
class Calibration:
    """Thresholds for every axis, either calibrated per axis or shared."""

    scope: str
    axes: dict[Axis, GradientThresholds]

    def for_axis(self, axis: Axis) -> GradientThresholds:
        return self.axes[axis]

    def to_dict(self) -> dict:
        return {
            "scope": self.scope,
            "axes": {axis.value: self.axes[axis].to_dict() for axis in AXES},
        }

    @classmethod
    def from_dict(cls, data: dict) -> Calibration:
        axes = {Axis(name): GradientThresholds.from_dict(entry) for name, entry in data["axes"].items()}
        missing = [a.value for a in AXES if a not in axes]
        if missing:
            raise InvalidThresholds(f"calibration lacks axes: {', '.join(missing)}")
        return cls(scope=str(data.get("scope", "per-axis")), axes=axes)


def calibrate_trials(
    trials: Iterable[Trial],
    segmentation: SegmentationConfig | None = None,
    bands: BandConfig | None = None,
) -> Calibration:
    """Calibrate thresholds from every phase series of *trials*.

    With ``bands.scope == "global"`` all axes share one record.
    """
    segmentation = segmentation or SegmentationConfig()
    bands = bands or BandConfig()
    slopes: dict[Axis, list[float]] = {axis: [] for axis in AXES}
    for trial in trials:
        for _, axis, series in iter_phase_series(trial):
            slopes[axis].extend(s.slope for s in segment_with(series, segmentation))

    if bands.scope == "global":
        pooled = [s for axis in AXES for s in slopes[axis]]
        shared = thresholds_from_slopes(pooled, bands)
        logger.info("calibrated global thresholds: g_max=%.4g eps=%.4g", shared.g_max, shared.eps_const)
        return Calibration(scope="global", axes=dict.fromkeys(AXES, shared))

    axes = {}
    for axis in AXES:
        try:
            axes[axis] = thresholds_from_slopes(slopes[axis], bands)
        except (EmptyCorpus, CalibrationDegenerate) as e:
            raise type(e)(f"axis {axis}: {e}") from e
        logger.info(
            "calibrated %s: g_max=%.4g eps=%.4g", axis, axes[axis].g_max, axes[axis].eps_const
        )
    return Calibration(scope="per-axis", axes=axes)


def save_calibration(calibration: Calibration, path: str | Path) -> Path:
    return write_json_atomic(path, with_header("calibration", calibration.to_dict()))


def load_calibration(path: str | Path) -> Calibration:
    """Read a calibration file.

    Raises:
        ModelFormatError: wrong header; InvalidThresholds: bad values.
    """
    data = read_versioned_json(path, "calibration")
    result = validate_calibration(data)
    if not result.ok:
        raise InvalidThresholds(f"{path}: " + "; ".join(result.errors))
    return Calibration.from_dict(data)
