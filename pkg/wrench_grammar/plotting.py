"""
SVG figures: colour-coded grammar maps and learning curves.

Figures are rendered with the Agg backend and saved as SVG with a fixed
hash salt and no date metadata, so the same input always produces the
same bytes.
"""

from __future__ import annotations

import io
import itertools
import logging
from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib import colors as mcolors  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.patches import Patch  # noqa: E402

from .errors import NothingEncoded  # noqa: E402
from .evaluation import CurveResult  # noqa: E402
from .grammar import ALPHABETS, GrammarMatrix, Level, stretch  # noqa: E402
from .runtime import write_bytes_atomic  # noqa: E402
from .signal_io import AXES, PHASES, Axis, PhaseId  # noqa: E402

logger = logging.getLogger(__name__)

PAD_COLOR = "#ffffff"
SVG_HASH_SALT = "wrench-grammar"

# Fixed per-label colours; cell value 0 (padding) is always white.
LABEL_COLORS: dict[Level, dict[str, str]] = {
    Level.PRIMITIVE: {
        "pimp": "#7f0000",
        "bpos": "#d7301f",
        "mpos": "#fc8d59",
        "spos": "#fdd49e",
        "const": "#bdbdbd",
        "sneg": "#c6dbef",
        "mneg": "#6baed6",
        "bneg": "#2171b5",
        "nimp": "#08306b",
    },
    Level.MC: {
        "a": "#e6ab02",
        "i": "#d95f02",
        "d": "#1b9e77",
        "k": "#999999",
        "c": "#7570b3",
        "u": "#e7298a",
    },
    Level.LLB: {
        "PS": "#e41a1c",
        "PL": "#377eb8",
        "FX": "#999999",
        "CT": "#984ea3",
        "AL": "#ff7f00",
        "SH": "#4daf4a",
        "N": "#a65628",
    },
}


def palette(level: Level | str) -> list[str]:
    """Colours indexed by cell value: 0 = padding, i = i-th label of the alphabet."""
    level = Level(level)
    return [PAD_COLOR, *(LABEL_COLORS[level][w] for w in ALPHABETS[level])]


def palette_distance_ok(level: Level | str, min_distance: float = 0.15) -> bool:
    """True when every pair of label colours (padding included) is at least *min_distance* apart in RGB."""
    rgb = [np.array(mcolors.to_rgb(c)) for c in palette(level)]
    return all(float(np.linalg.norm(a - b)) >= min_distance for a, b in itertools.combinations(rgb, 2))


def save_svg(fig: Figure, path: str | Path) -> Path:
    """Write *fig* as byte-stable SVG and close it."""
    buffer = io.BytesIO()
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "path"}):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    return write_bytes_atomic(path, buffer.getvalue())


# ─── Grammar Maps ────────────────────────────────────────────────


def grammar_grid(
    matrices: Sequence[GrammarMatrix],
    level: Level | str,
    axis: Axis,
    phases: Sequence[PhaseId] = PHASES,
) -> np.ndarray:
    """Cell values for one axis: rows = trials, columns = word slots of *phases* side by side.

    Each phase is stretched to its longest sequence over *matrices* and
    every axis, so all panels share columns.
    """
    level = Level(level)
    index = {w: i + 1 for i, w in enumerate(ALPHABETS[level])}
    widths = [max(m.width(level, phase) for m in matrices) for phase in phases]
    rows = []
    for matrix in matrices:
        row: list[int] = []
        for phase, width in zip(phases, widths, strict=True):
            words = stretch(matrix.sequence(level, axis, phase), width)
            cells = [index.get(w, 0) for w in words]
            row.extend(cells + [0] * (width - len(cells)))
        rows.append(row)
    return np.array(rows, dtype=np.int64).reshape(len(matrices), sum(widths))


def plot_grammar_map(
    matrices: Sequence[GrammarMatrix],
    level: Level | str = Level.LLB,
    axes: Sequence[Axis] = AXES,
    phase: PhaseId | None = None,
) -> Figure:
    """One panel per axis; each row is a trial, each column a resampled word slot.

    Raises:
        NothingEncoded: *matrices* is empty.
    """
    if not matrices:
        raise NothingEncoded("no encoded grammars to plot")
    level = Level(level)
    phases = PHASES if phase is None else (PhaseId(phase),)
    colors = palette(level)
    cmap = mcolors.ListedColormap(colors)
    norm = mcolors.BoundaryNorm(np.arange(len(colors) + 1) - 0.5, cmap.N)

    fig, panels = plt.subplots(
        len(axes), 1, figsize=(10, 1.2 + 0.35 * len(matrices) * len(axes)), squeeze=False
    )
    for panel, axis in zip(panels[:, 0], axes, strict=True):
        grid = grammar_grid(matrices, level, axis, phases)
        panel.imshow(grid, cmap=cmap, norm=norm, aspect="auto", interpolation="nearest")
        panel.set_ylabel(axis.value, rotation=0, ha="right", va="center")
        panel.set_yticks(range(len(matrices)), [m.trial_id for m in matrices], fontsize=6)
        panel.set_xticks([])
        widths = [max(m.width(level, p) for m in matrices) for p in phases]
        for edge in np.cumsum(widths)[:-1]:
            panel.axvline(edge - 0.5, color="black", lw=0.8)

    handles = [
        Patch(facecolor=LABEL_COLORS[level][w], edgecolor="black", label=w) for w in ALPHABETS[level]
    ]
    fig.legend(handles=handles, loc="lower center", ncol=len(handles), frameon=False, fontsize=8)
    title = f"{level.value} grammar" + (f", {phases[0].value}" if phase is not None else "")
    fig.suptitle(title)
    fig.tight_layout(rect=(0, 0.06, 1, 0.96))
    logger.debug("grammar map: %d trial(s), level %s", len(matrices), level)
    return fig


# ─── Learning Curves ─────────────────────────────────────────────


def plot_learning_curves(curves: Sequence[CurveResult]) -> Figure:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for curve in curves:
        xs = [p.train_samples for p in curve.points]
        ys = [p.accuracy for p in curve.points]
        ax.plot(xs, ys, marker="o", ms=3, lw=1.2, label=curve.classifier)
    ax.set_xlabel("training samples")
    ax.set_ylabel("mean validation accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, lw=0.3)
    ax.legend(loc="lower right")
    fig.tight_layout()
    return fig
