"""
Calibrate command: gradient thresholds from the training trials.
"""

import time

from ..config import resolve_run_config
from ..display import show_calibration, show_written
from ..errors import DataError
from ..primitives import calibrate_trials, save_calibration
from ..runtime import OutputLayout, write_run_metadata
from ..signal_io import group_by_index, load_trials


def handle_calibrate(args) -> int:
    """Calibrate per-axis (or global) thresholds and write calibration.json."""
    config = resolve_run_config(args)
    layout = OutputLayout.at(config.paths.out_dir).ensure()
    started = time.monotonic()

    trials = load_trials(config.paths.data_dir)
    if not trials:
        raise DataError(f"No trial CSVs found in {config.paths.data_dir}")
    if args.trials:
        groups = group_by_index(trials)[: args.trials]
        trials = [t for g in groups for t in g]

    calibration = calibrate_trials(trials, config.segmentation, config.bands)
    path = save_calibration(calibration, args.output or layout.calibration)
    write_run_metadata(
        layout,
        "calibrate",
        config.to_dict(),
        trials=sorted({t.base_id for t in trials}),
    )

    show_calibration(calibration)
    show_written(str(path), f"{len(trials)} record(s), {time.monotonic() - started:.1f}s")
    return 0
