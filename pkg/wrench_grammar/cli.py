"""
Command-line interface for the wrench grammar pipeline.

Subcommands: synth, calibrate, encode, train, predict, eval, plot, info.
Every pipeline flag defaults to None so that only flags actually given
override the JSON config file (see ``config.apply_cli_overrides``).
"""

import argparse
import os
import sys

from . import __version__
from .config import list_classifier_names, list_protocol_names
from .errors import UsageError
from .validators import VALID_KERNELS, VALID_LEVELS


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    """Parse command-line arguments; prints help and exits when no command is given.

    Raises:
        UsageError: unknown flags or invalid flag values.
    """
    parser = build_parser()
    args = parser.parse_args(argv if argv is not None else sys.argv[1:])
    if not args.command:
        parser.print_help()
        sys.exit(0)
    if args.command == "synth" and not getattr(args, "synth_action", None):
        parser.parse_args(["synth", "--help"])
    return args


class _Parser(argparse.ArgumentParser):
    """Raises UsageError instead of exiting with argparse's status 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="wrench-grammar",
        description="Encode 6-axis wrench signals into action grammars and classify task phases",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=_build_epilog(),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # ── synth ──
    _add_synth_subparser(subparsers)

    # ── calibrate ──
    _add_calibrate_subparser(subparsers)

    # ── encode ──
    _add_encode_subparser(subparsers)

    # ── train ──
    _add_train_subparser(subparsers)

    # ── predict ──
    _add_predict_subparser(subparsers)

    # ── eval ──
    _add_eval_subparser(subparsers)

    # ── plot ──
    _add_plot_subparser(subparsers)

    # ── info ──
    _add_info_subparser(subparsers)

    return parser


# ─── Argument Types ──────────────────────────────────────────────


def _gamma(value: str) -> float | str:
    if value == "scale":
        return value
    try:
        gamma = float(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError("gamma must be 'scale' or a positive number") from e
    if gamma <= 0:
        raise argparse.ArgumentTypeError("gamma must be 'scale' or a positive number")
    return gamma


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def _kernel_list(value: str) -> list[str]:
    kernels = [k.strip() for k in value.split(",") if k.strip()]
    bad = [k for k in kernels if k not in VALID_KERNELS]
    if bad:
        raise argparse.ArgumentTypeError(
            f"unknown kernel(s) {', '.join(bad)}; choose from {', '.join(sorted(VALID_KERNELS))}"
        )
    return kernels


# ─── Shared Option Groups ────────────────────────────────────────


def _add_common_options(parser):
    """Options every subcommand accepts."""
    common = parser.add_argument_group("general")
    common.add_argument("--config", default=None, metavar="PATH", help="JSON run config file")
    common.add_argument(
        "--seed", type=int, default=None, metavar="N", help="Seed for all randomness (default: 42)"
    )
    common.add_argument(
        "--jobs", type=_positive_int, default=None, metavar="N", help="Worker processes for encoding"
    )
    common.add_argument("--data-dir", default=None, metavar="DIR", help="Trial directory")
    common.add_argument("--out-dir", default=None, metavar="DIR", help="Output directory")

    output_group = parser.add_argument_group("output control")
    verbosity = output_group.add_mutually_exclusive_group()
    verbosity.add_argument(
        "--verbose",
        "-v",
        action="count",
        default=0,
        help="More log detail (-v info, -vv debug)",
    )
    verbosity.add_argument("--quiet", "-q", action="store_true", help="Only errors")
    output_group.add_argument(
        "--no-color",
        action="store_true",
        help="Disable color output (useful for CI/piped output)",
    )


def _add_pipeline_options(parser):
    """Segmentation, gradient band and refinement parameters."""
    seg = parser.add_argument_group("segmentation")
    seg.add_argument("--r2-min", type=float, default=None, metavar="R", help="Minimum R² (0.70)")
    seg.add_argument("--min-window", type=int, default=None, metavar="N", help="Minimum window (5)")
    seg.add_argument(
        "--noise-scale",
        type=float,
        default=None,
        metavar="K",
        help="Opt-in noise floor: windows with variance within (K·noise)² count as constant (0)",
    )
    seg.add_argument(
        "--no-refine-breakpoints",
        action="store_true",
        help="Keep the first R² violation as the cut instead of the least-squares optimum",
    )

    bands = parser.add_argument_group("gradient bands")
    bands.add_argument("--cut-small", type=float, default=None, metavar="F", help="(0.25)")
    bands.add_argument("--cut-med", type=float, default=None, metavar="F", help="(0.50)")
    bands.add_argument("--cut-big", type=float, default=None, metavar="F", help="(0.75)")

    filt = parser.add_argument_group("refinement")
    filt.add_argument(
        "--min-duration-ratio", type=float, default=None, metavar="F", help="(0.1)"
    )
    filt.add_argument("--amp-ratio", type=float, default=None, metavar="F", help="(5.0)")
    filt.add_argument("--max-cycles", type=_positive_int, default=None, metavar="N", help="(3)")

    feats = parser.add_argument_group("features")
    feats.add_argument(
        "--levels",
        default=None,
        metavar="LIST",
        help=f"Comma-separated grammar levels ({','.join(sorted(VALID_LEVELS))})",
    )
    feats.add_argument(
        "--one-hot", action="store_true", default=None, help="One-hot words instead of ordinal ids"
    )


def _add_classifier_options(parser):
    clf = parser.add_argument_group("classifier parameters")
    clf.add_argument("--C", dest="C", type=float, default=None, metavar="C", help="SVM penalty (1.0)")
    clf.add_argument(
        "--kernel", choices=sorted(VALID_KERNELS), default=None, help="SVM kernel (rbf)"
    )
    clf.add_argument("--gamma", type=_gamma, default=None, help="Kernel gamma or 'scale'")
    clf.add_argument("--trees", type=_positive_int, default=None, metavar="M", help="Forest size (100)")
    clf.add_argument(
        "--batches", type=_positive_int, default=None, metavar="N", help="Forest mini-batches (12)"
    )


# ─── Subcommands ─────────────────────────────────────────────────


def _add_synth_subparser(subparsers):
    """Add the 'synth' subcommand."""
    synth_parser = subparsers.add_parser("synth", help="Synthetic trial generation")
    synth_sub = synth_parser.add_subparsers(dest="synth_action")

    gen_p = synth_sub.add_parser(
        "gen",
        help="Generate a synthetic dataset",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""examples:
  # 38 one-arm trials into data/
  %(prog)s --trials 38 --data-dir data

  # 20 two-arm trials (40 records)
  %(prog)s --trials 20 --arms 2 --data-dir data2
""",
    )
    gen_p.add_argument("--profile", default=None, metavar="PATH", help="Task profile JSON")
    gen_p.add_argument(
        "--trials", type=_positive_int, default=None, metavar="N", help="Trial count (protocol size)"
    )
    gen_p.add_argument("--arms", type=int, choices=[1, 2], default=None, help="Arms per trial")
    gen_p.add_argument("--noiseless", action="store_true", help="Zero all noise ranges")
    gen_p.add_argument(
        "--protocol", choices=list_protocol_names(), default=None, help="Size the dataset like this protocol"
    )
    _add_common_options(gen_p)

    profile_p = synth_sub.add_parser("profile", help="Write the built-in task profile as JSON")
    profile_p.add_argument("output", help="Destination file")
    _add_common_options(profile_p)


def _add_calibrate_subparser(subparsers):
    """Add the 'calibrate' subcommand."""
    cal_parser = subparsers.add_parser("calibrate", help="Calibrate gradient thresholds")
    cal_parser.add_argument(
        "--global",
        dest="calibration_scope",
        action="store_const",
        const="global",
        default=None,
        help="One shared threshold record for all axes",
    )
    cal_parser.add_argument(
        "--trials", type=_positive_int, default=None, metavar="N", help="Use only the first N trials"
    )
    cal_parser.add_argument("--output", default=None, metavar="PATH", help="Calibration file")
    _add_pipeline_options(cal_parser)
    _add_common_options(cal_parser)


def _add_encode_subparser(subparsers):
    """Add the 'encode' subcommand."""
    enc_parser = subparsers.add_parser(
        "encode", help="Encode trials into grammars and a feature dataset"
    )
    enc_parser.add_argument("--calibration", default=None, metavar="PATH", help="Calibration file")
    enc_parser.add_argument(
        "--report", default=None, metavar="TRIAL", help="Print the compression report of one trial"
    )
    enc_parser.add_argument(
        "--show", default=None, metavar="TRIAL", help="Print the grammar words of one trial"
    )
    enc_parser.add_argument(
        "--show-level", choices=sorted(VALID_LEVELS), default="llb", help="Level for --show"
    )
    _add_pipeline_options(enc_parser)
    _add_common_options(enc_parser)


def _add_train_subparser(subparsers):
    """Add the 'train' subcommand."""
    train_parser = subparsers.add_parser("train", help="Train a phase classifier")
    train_parser.add_argument(
        "--classifier",
        choices=list_classifier_names(),
        default=None,
        help="Classifier profile (default: svm-<kernel>)",
    )
    train_parser.add_argument(
        "--train-trials", type=_positive_int, default=None, metavar="N", help="Use the first N trials"
    )
    train_parser.add_argument("--model", default=None, metavar="PATH", help="Model file")
    train_parser.add_argument(
        "--check", action="store_true", help="Verify forest invariants after training"
    )
    _add_classifier_options(train_parser)
    _add_common_options(train_parser)


def _add_predict_subparser(subparsers):
    """Add the 'predict' subcommand."""
    pred_parser = subparsers.add_parser("predict", help="Predict task phases of encoded trials")
    pred_parser.add_argument("--model", default=None, metavar="PATH", help="Model file")
    pred_parser.add_argument(
        "--grammars", default=None, metavar="DIR", help="Grammar directory (default: <out>/grammars)"
    )
    pred_parser.add_argument(
        "trial_ids", nargs="*", metavar="TRIAL", help="Only these trials (default: all)"
    )
    _add_common_options(pred_parser)


def _add_eval_subparser(subparsers):
    """Add the 'eval' subcommand."""
    eval_parser = subparsers.add_parser(
        "eval",
        help="Learning curves on a train/validation split",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""examples:
  # Default one-arm protocol, SVM and Mondrian curves
  %(prog)s --data-dir data --out-dir out

  # Kernel comparison
  %(prog)s --classifiers svm-rbf --kernels linear,poly
""",
    )
    eval_parser.add_argument("--protocol", choices=list_protocol_names(), default=None)
    eval_parser.add_argument("--train-trials", type=_positive_int, default=None, metavar="N")
    eval_parser.add_argument("--validation-trials", type=_positive_int, default=None, metavar="N")
    eval_parser.add_argument(
        "--shuffle", action="store_true", default=None, help="Permute trials with the seed first"
    )
    eval_parser.add_argument(
        "--classifiers",
        default=None,
        metavar="LIST",
        help=f"Comma-separated profiles ({','.join(list_classifier_names())})",
    )
    eval_parser.add_argument(
        "--kernels", type=_kernel_list, default=[], metavar="LIST", help="Extra SVM curves per kernel"
    )
    _add_pipeline_options(eval_parser)
    _add_classifier_options(eval_parser)
    _add_common_options(eval_parser)


def _add_plot_subparser(subparsers):
    """Add the 'plot' subcommand."""
    plot_parser = subparsers.add_parser("plot", help="Colour-coded grammar map (SVG)")
    plot_parser.add_argument("--level", choices=sorted(VALID_LEVELS), default="llb")
    plot_parser.add_argument(
        "--axes", default=None, metavar="LIST", help="Comma-separated axes (default: all six)"
    )
    plot_parser.add_argument(
        "--phase",
        choices=["approach", "rotation", "insertion", "mating"],
        default=None,
        help="Only one phase (default: all four side by side)",
    )
    plot_parser.add_argument("--grammars", default=None, metavar="DIR", help="Grammar directory")
    plot_parser.add_argument("--output", default=None, metavar="PATH", help="SVG file")
    plot_parser.add_argument(
        "trial_ids", nargs="*", metavar="TRIAL", help="Only these trials (default: all)"
    )
    _add_common_options(plot_parser)


def _add_info_subparser(subparsers):
    """Add the 'info' subcommand."""
    info_parser = subparsers.add_parser("info", help="Dataset dashboard")
    _add_common_options(info_parser)


def _build_epilog() -> str:
    return """
workflow:
  %(prog)s synth gen --trials 38              Generate synthetic trials
  %(prog)s calibrate                          Gradient thresholds per axis
  %(prog)s encode                             Grammars + feature dataset
  %(prog)s train --classifier mondrian        Train a classifier
  %(prog)s predict                            Predict phases of encoded trials
  %(prog)s eval                               Learning curves (CSV + SVG)
  %(prog)s plot --level llb                   Grammar map (SVG)

exit codes:
  0 success, 1 usage error, 2 data error, 3 internal error, 130 interrupted
"""


# ─── Dispatch ────────────────────────────────────────────────────


def dispatch(args: argparse.Namespace) -> int:
    command = args.command

    if command == "synth":
        from .commands.synth_cmd import handle_synth

        return handle_synth(args)

    elif command == "calibrate":
        from .commands.calibrate_cmd import handle_calibrate

        return handle_calibrate(args)

    elif command == "encode":
        from .commands.encode_cmd import handle_encode

        return handle_encode(args)

    elif command == "train":
        from .commands.train_cmd import handle_train

        return handle_train(args)

    elif command == "predict":
        from .commands.predict_cmd import handle_predict

        return handle_predict(args)

    elif command == "eval":
        from .commands.eval_cmd import handle_eval

        return handle_eval(args)

    elif command == "plot":
        from .commands.plot_cmd import handle_plot

        return handle_plot(args)

    elif command == "info":
        from .commands.info_cmd import handle_info

        return handle_info(args)

    from .display import show_error

    show_error(f"Unknown command: {command}")
    return 1


def main(argv: list[str] | None = None) -> int:
    """Parse, configure logging, run one command, and map errors to exit codes."""
    from .display import configure_logging, show_error, show_warning
    from .errors import WrenchGrammarError

    try:
        args = parse_args(argv)
    except UsageError as e:
        show_error(str(e))
        return e.exit_code
    configure_logging(
        verbose=getattr(args, "verbose", 0),
        quiet=getattr(args, "quiet", False),
        no_color=getattr(args, "no_color", False),
    )
    try:
        return dispatch(args)
    except KeyboardInterrupt:
        show_warning("Aborted by user.")
        return 130
    except WrenchGrammarError as e:
        show_error(str(e))
        _maybe_traceback()
        return e.exit_code
    except Exception as e:
        show_error(f"Internal error: {e}")
        _maybe_traceback()
        return 3


def _maybe_traceback():
    if os.environ.get("DEBUG", "").lower() in ("1", "true", "yes"):
        import traceback

        traceback.print_exc()
