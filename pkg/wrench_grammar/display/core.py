"""
Core display components: console singleton, logging setup, and label styles.
"""

import logging

from rich.console import Console
from rich.logging import RichHandler

# ─── Singleton Console ───────────────────────────────────────────

console = Console(highlight=False)

# ─── Constants ───────────────────────────────────────────────────

# Terminal styles for grammar words, one per label code.
LABEL_STYLES = {
    "pimp": "bold red",
    "bpos": "red",
    "mpos": "bright_red",
    "spos": "yellow",
    "const": "dim",
    "sneg": "cyan",
    "mneg": "bright_blue",
    "bneg": "blue",
    "nimp": "bold blue",
    "a": "magenta",
    "i": "red",
    "d": "blue",
    "k": "dim",
    "c": "bold yellow",
    "u": "white",
    "PS": "red",
    "PL": "blue",
    "FX": "dim",
    "CT": "bold yellow",
    "AL": "magenta",
    "SH": "green",
    "N": "white",
}

PHASE_ICONS = {
    "approach": "➡️",
    "rotation": "🔄",
    "insertion": "🔩",
    "mating": "🤝",
}

LOG_FORMAT = "%(message)s"


# ─── Logging ─────────────────────────────────────────────────────


def configure_logging(verbose: int = 0, quiet: bool = False, no_color: bool = False) -> None:
    """Route the package logger through a RichHandler on stderr.

    WARNING by default, INFO with ``-v``, DEBUG with ``-vv``, ERROR with ``-q``.
    """
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING

    if no_color:
        console.no_color = True

    handler = RichHandler(
        console=Console(stderr=True, no_color=no_color),
        show_path=False,
        show_time=verbose >= 2,
        markup=False,
    )
    handler.setFormatter(logging.Formatter(LOG_FORMAT))

    logger = logging.getLogger("wrench_grammar")
    logger.handlers.clear()
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False


def styled_word(word: str) -> str:
    """Wrap a grammar word in its rich markup style."""
    style = LABEL_STYLES.get(word)
    if not style:
        return word
    return f"[{style}]{word}[/{style}]"


def format_elapsed(elapsed: float) -> str:
    """Format elapsed seconds into a human-readable string."""
    total_secs = int(elapsed)
    mins, secs = divmod(total_secs, 60)
    if mins > 0:
        return f"{mins}m {secs:02d}s"
    return f"{elapsed:.1f}s"
