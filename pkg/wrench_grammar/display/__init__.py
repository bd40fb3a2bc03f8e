"""
Rich terminal display helpers for the wrench grammar pipeline.

All user-facing output goes through the shared console defined in
``core``; the public symbols are re-exported here.
"""

# ─── Core primitives ─────────────────────────────────────────────
from .core import (
    LABEL_STYLES,
    PHASE_ICONS,
    configure_logging,
    console,
    format_elapsed,
    styled_word,
)

# ─── Utility messages ────────────────────────────────────────────
from .messages import (
    show_error,
    show_info,
    show_success,
    show_warning,
    show_written,
)

# ─── Summaries ───────────────────────────────────────────────────
from .summary import (
    show_calibration,
    show_compression,
    show_dataset_info,
    show_encode_summary,
    show_eval_summary,
    show_grammar,
    show_predictions,
    show_train_summary,
)

__all__ = [
    # Core
    "LABEL_STYLES",
    "PHASE_ICONS",
    "configure_logging",
    "console",
    "format_elapsed",
    "styled_word",
    # Messages
    "show_error",
    "show_info",
    "show_success",
    "show_warning",
    "show_written",
    # Summaries
    "show_calibration",
    "show_compression",
    "show_dataset_info",
    "show_encode_summary",
    "show_eval_summary",
    "show_grammar",
    "show_predictions",
    "show_train_summary",
]
