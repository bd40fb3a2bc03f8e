"""
Eval command: learning curves for every configured classifier.
"""

import math
import time

from ..config import resolve_run_config
from ..display import show_eval_summary, show_written
from ..errors import DataError
from ..evaluation import run_evaluation, write_curves_csv
from ..plotting import plot_learning_curves, save_svg
from ..runtime import OutputLayout, write_run_metadata
from ..signal_io import load_trials


def handle_eval(args) -> int:
    """Run the protocol, then write the curve table, figure and run metadata."""
    config = resolve_run_config(args)
    layout = OutputLayout.at(config.paths.out_dir).ensure()
    started = time.monotonic()

    trials = load_trials(config.paths.data_dir)
    if not trials:
        raise DataError(f"No trial CSVs found in {config.paths.data_dir}")

    report = run_evaluation(trials, config, args.kernels)
    headline = report.headline()

    write_curves_csv(report.curves, layout.learning_curve_csv)
    save_svg(plot_learning_curves(report.curves), layout.learning_curve_svg)
    write_run_metadata(
        layout,
        "eval",
        config.to_dict(),
        protocol=report.protocol.name,
        train_trials=report.data.train_ids,
        validation_trials=report.data.validation_ids,
        steady_state={k: (None if math.isnan(v) else v) for k, v in headline.items()},
    )

    show_eval_summary(report.protocol, headline, report.curves, time.monotonic() - started)
    show_written(str(layout.learning_curve_csv), "accuracy per training size")
    show_written(str(layout.learning_curve_svg), "learning curves")
    return 0
