"""
Synth command: generate synthetic trials or export the built-in profile.
"""

from pathlib import Path

from ..config import get_eval_protocol, resolve_run_config
from ..display import show_error, show_info, show_success, show_written
from ..synth import default_profile, generate_dataset, load_profile, save_profile, write_dataset


def handle_synth(args) -> int:
    """Dispatch synth actions."""
    action = getattr(args, "synth_action", None)

    if action == "gen":
        return _gen(args)
    elif action == "profile":
        return _export_profile(args)
    else:
        show_error(f"Unknown synth action: {action}")
        return 1


def _gen(args) -> int:
    config = resolve_run_config(args)
    protocol = get_eval_protocol(config.evaluation.protocol)
    profile = load_profile(args.profile) if args.profile else default_profile()
    if args.noiseless:
        profile = profile.without_noise()

    n_trials = args.trials or protocol.n_trials
    arms = args.arms or protocol.arms
    trials = generate_dataset(profile, n_trials, config.seed, arms)
    out_dir = Path(config.paths.data_dir)
    paths = write_dataset(trials, out_dir)

    show_success(
        f"Generated {n_trials} trial(s), {len(paths)} record(s) "
        f"({arms} arm{'s' if arms > 1 else ''}, profile '{profile.name}', seed {config.seed})"
    )
    show_written(str(out_dir), "trial CSVs + phase sidecars")
    return 0


def _export_profile(args) -> int:
    path = save_profile(default_profile(), args.output)
    show_written(str(path), "task profile")
    show_info("Edit the ranges and pass it back with: synth gen --profile PATH")
    return 0
