"""
Plot command: colour-coded grammar map of encoded trials.
"""

from pathlib import Path

from ..config import resolve_run_config
from ..display import show_error, show_written
from ..errors import UsageError
from ..grammar import load_grammars
from ..plotting import plot_grammar_map, save_svg
from ..runtime import OutputLayout
from ..signal_io import AXES, Axis


def _parse_axes(text: str | None) -> tuple[Axis, ...]:
    if not text:
        return AXES
    try:
        return tuple(Axis(a.strip()) for a in text.split(",") if a.strip())
    except ValueError as e:
        raise UsageError(f"{e}. Available: {', '.join(a.value for a in AXES)}") from e


def handle_plot(args) -> int:
    config = resolve_run_config(args)
    layout = OutputLayout.at(config.paths.out_dir).ensure()

    matrices = load_grammars(args.grammars or layout.grammars_dir)
    if args.trial_ids:
        wanted = set(args.trial_ids)
        matrices = [m for m in matrices if m.trial_id in wanted or m.base_id in wanted]
        if not matrices:
            show_error(f"No grammars match: {', '.join(args.trial_ids)}")
            return 2

    axes = _parse_axes(args.axes)
    fig = plot_grammar_map(matrices, args.level, axes, args.phase)
    path = save_svg(fig, Path(args.output) if args.output else layout.grammar_plot(args.level))
    show_written(str(path), f"{len(matrices)} record(s), level {args.level}")
    return 0
