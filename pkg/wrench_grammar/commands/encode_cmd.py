"""
Encode command: trials → grammar files and the phase feature dataset.
"""

import time
from pathlib import Path

from ..config import resolve_run_config
from ..display import (
    show_compression,
    show_encode_summary,
    show_error,
    show_grammar,
    show_warning,
    show_written,
)
from ..errors import DataError
from ..grammar import (
    LEVELS,
    compression_report,
    encode_trials,
    group_matrices,
    save_grammar,
    vectorize,
)
from ..primitives import load_calibration
from ..runtime import OutputLayout, write_run_metadata
from ..signal_io import load_trials


def handle_encode(args) -> int:
    """Encode every trial with the saved calibration."""
    config = resolve_run_config(args)
    layout = OutputLayout.at(config.paths.out_dir).ensure()
    started = time.monotonic()

    calibration_path = Path(args.calibration) if args.calibration else layout.calibration
    if not calibration_path.exists():
        show_error(f"No calibration at {calibration_path}. Run 'calibrate' first.")
        return 2
    calibration = load_calibration(calibration_path)

    trials = load_trials(config.paths.data_dir)
    if not trials:
        raise DataError(f"No trial CSVs found in {config.paths.data_dir}")

    if args.report:
        matches = [t for t in trials if t.trial_id == args.report]
        if not matches:
            show_error(f"Trial '{args.report}' not found in {config.paths.data_dir}")
            return 2
        show_compression(compression_report(matches[0], calibration, config.encoding), args.report)
        return 0

    matrices = encode_trials(trials, calibration, config.encoding, config.jobs)
    for matrix in matrices:
        save_grammar(matrix, layout.grammar_path(matrix.trial_id))

    dataset = vectorize(group_matrices(matrices), levels=config.levels, one_hot=config.one_hot)
    dataset.to_csv(layout.dataset_csv, layout.dataset_layout)
    write_run_metadata(
        layout,
        "encode",
        config.to_dict(),
        trials=[m.trial_id for m in matrices],
        dimension=dataset.dimension,
    )

    rows = []
    for matrix in matrices:
        counts = {
            level.value: sum(len(seq) for (lv, _, _), seq in matrix.words.items() if lv == level)
            for level in LEVELS
        }
        rows.append({"trial_id": matrix.trial_id, "arm": matrix.arm.value, **counts})
    show_encode_summary(rows, time.monotonic() - started)

    if args.show:
        shown = [m for m in matrices if m.trial_id == args.show]
        if shown:
            show_grammar(shown[0], args.show_level)
        else:
            show_warning(f"Trial '{args.show}' was not encoded")

    show_written(str(layout.grammars_dir), f"{len(matrices)} grammar file(s)")
    show_written(str(layout.dataset_csv), f"{len(dataset)} samples × {dataset.dimension} features")
    return 0
