"""
Info command: dataset dashboard.
"""

import numpy as np

from ..config import resolve_run_config
from ..display import show_dataset_info, show_warning
from ..grammar import PhaseDataset
from ..runtime import OutputLayout
from ..signal_io import PHASES, group_by_index, load_trials, sample_rate


def dataset_info(trials, data_dir) -> dict:
    """Summary numbers for a list of trial records."""
    groups = group_by_index(trials)
    info = {
        "directory": str(data_dir),
        "records": len(trials),
        "trials": len(groups),
        "arms": ", ".join(sorted({t.arm.value for t in trials})),
        "sampling_rate": f"{np.median([sample_rate(t) for t in trials]):.1f} Hz",
    }
    durations = {}
    for phase in PHASES:
        values = np.array([t.phase(phase).t_end - t.phase(phase).t_start for t in trials])
        durations[phase.value] = {
            "mean": float(values.mean()),
            "min": float(values.min()),
            "max": float(values.max()),
        }
    info["phase_durations"] = durations
    return info


def handle_info(args) -> int:
    config = resolve_run_config(args)
    layout = OutputLayout.at(config.paths.out_dir)

    trials = load_trials(config.paths.data_dir)
    if not trials:
        show_warning(f"No trial CSVs found in {config.paths.data_dir}")
        return 2

    info = dataset_info(trials, config.paths.data_dir)
    if layout.dataset_csv.exists() and layout.dataset_layout.exists():
        info["dimension"] = PhaseDataset.from_csv(layout.dataset_csv, layout.dataset_layout).dimension
    show_dataset_info(info)
    return 0
