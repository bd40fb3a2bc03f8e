"""
Summary tables and panels for pipeline commands.
"""

import math

from rich import box
from rich.panel import Panel
from rich.table import Table

from .core import PHASE_ICONS, console, format_elapsed, styled_word


def _fmt(value: float, digits: int = 4) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "—"
    return f"{value:.{digits}g}"


def show_calibration(calibration):
    """Per-axis gradient thresholds."""
    table = Table(
        title=f"Gradient thresholds ({calibration.scope})",
        box=box.SIMPLE_HEAVY,
        header_style="bold",
    )
    table.add_column("Axis", style="bold cyan")
    table.add_column("eps_const", justify="right")
    table.add_column("g_max", justify="right")
    table.add_column("small ≤", justify="right", style="dim")
    table.add_column("med ≤", justify="right", style="dim")
    table.add_column("big ≤", justify="right", style="dim")
    for axis, th in calibration.axes.items():
        table.add_row(
            str(axis),
            _fmt(th.eps_const),
            _fmt(th.g_max),
            _fmt(th.cut_small * th.g_max),
            _fmt(th.cut_med * th.g_max),
            _fmt(th.cut_big * th.g_max),
        )
    console.print(table)


def show_encode_summary(rows: list[dict], elapsed: float):
    """One row per encoded trial record with its word counts per level."""
    table = Table(box=box.SIMPLE, header_style="bold", padding=(0, 1))
    table.add_column("Trial", style="bold")
    table.add_column("Arm", style="dim")
    table.add_column("Primitives", justify="right")
    table.add_column("MCs", justify="right")
    table.add_column("LLBs", justify="right")
    for row in rows:
        table.add_row(
            row["trial_id"],
            row["arm"],
            str(row["primitive"]),
            str(row["mc"]),
            str(row["llb"]),
        )
    console.print(table)
    console.print(f"[dim]Encoded {len(rows)} record(s) in {format_elapsed(elapsed)}[/dim]")


def show_compression(rows: list[dict], trial_id: str):
    """Unit counts before and after filtering for one trial."""
    table = Table(title=f"Compression: {trial_id}", box=box.SIMPLE, header_style="bold")
    for name in ("phase", "axis"):
        table.add_column(name.title(), style="cyan" if name == "phase" else "bold")
    for name in ("primitives", "mcs", "llbs"):
        table.add_column(name, justify="right")
    for row in rows:
        table.add_row(
            row["phase"],
            row["axis"],
            f"{row['primitives_raw']} → {row['primitives']}",
            f"{row['mcs_raw']} → {row['mcs']}",
            f"{row['llbs_raw']} → {row['llbs']}",
        )
    console.print(table)


def show_grammar(matrix, level: str, axes=None):
    """Print the words of one trial at one level, phase by phase."""
    from ..grammar import Level
    from ..signal_io import AXES, PHASES

    level = Level(level)
    console.rule(f"[bold]{matrix.trial_id}[/bold] [dim]({matrix.arm}, {level.value})[/dim]")
    for phase in PHASES:
        console.print(f"{PHASE_ICONS.get(phase.value, '•')}  [bold]{phase.value}[/bold]")
        for axis in axes or AXES:
            words = " ".join(styled_word(w) for w in matrix.sequence(level, axis, phase))
            console.print(f"    [cyan]{axis.value:>2}[/cyan]  {words}")


def show_train_summary(classifier: str, n_samples: int, dimension: int, details: dict, elapsed: float):
    lines = [
        f"[bold]Classifier:[/bold] [magenta]{classifier}[/magenta]",
        f"[bold]Samples:[/bold]    {n_samples}",
        f"[bold]Features:[/bold]   {dimension}",
    ]
    lines.extend(f"[bold]{k}:[/bold] {v}" for k, v in details.items())
    lines.append(f"[bold]Elapsed:[/bold]    {format_elapsed(elapsed)}")
    console.print(
        Panel(
            "\n".join(lines),
            title="[bold] 🧠 Model trained [/bold]",
            border_style="green",
            box=box.ROUNDED,
            padding=(1, 2),
        )
    )


def show_predictions(rows: list[dict], score_names: list[str]):
    """Per-sample predictions with their votes or class probabilities."""
    table = Table(box=box.SIMPLE, header_style="bold", padding=(0, 1))
    table.add_column("Trial", style="bold")
    table.add_column("Truth", style="cyan")
    table.add_column("Predicted")
    for name in score_names:
        table.add_column(name, justify="right", style="dim")
    correct = 0
    for row in rows:
        ok = row["truth"] == row["predicted"]
        correct += ok
        mark = "[green]" if ok else "[red]"
        table.add_row(
            row["trial_id"],
            row["truth"],
            f"{mark}{row['predicted']}[/]",
            *(_fmt(s, 3) for s in row["scores"]),
        )
    console.print(table)
    if rows:
        console.print(f"[bold]Accuracy:[/bold] {correct}/{len(rows)} = {correct / len(rows):.4f}")


def show_eval_summary(protocol, headline: dict, curves, elapsed: float):
    """Steady-state accuracy per classifier plus curve shape."""
    table = Table(box=box.SIMPLE_HEAVY, header_style="bold", padding=(0, 1))
    table.add_column("Classifier", style="bold magenta")
    table.add_column("Steps", justify="right")
    table.add_column("First", justify="right", style="dim")
    table.add_column("Last", justify="right")
    table.add_column(f"Steady (last {protocol.steady_state_window})", justify="right", style="bold")
    for curve in curves:
        acc = curve.accuracies
        table.add_row(
            curve.classifier,
            str(len(acc)),
            _fmt(acc[0] if acc else math.nan),
            _fmt(acc[-1] if acc else math.nan),
            _fmt(headline.get(curve.classifier, math.nan)),
        )
    console.print(
        Panel(
            f"[bold]Protocol:[/bold] [cyan]{protocol.name}[/cyan]  "
            f"[dim]{protocol.n_train} train / {protocol.n_validation} validation trials, "
            f"{protocol.arms} arm(s)[/dim]",
            title="[bold] 📈 Learning curves [/bold]",
            border_style="bright_blue",
            box=box.ROUNDED,
        )
    )
    console.print(table)
    console.print(f"[dim]Finished in {format_elapsed(elapsed)}[/dim]")


def show_dataset_info(info: dict):
    """Dataset dashboard: trial counts, arms, phase durations, grammar dimension."""
    overview = Table.grid(padding=(0, 2))
    overview.add_column(style="bold")
    overview.add_column()
    for key in ("directory", "records", "trials", "arms", "sampling_rate", "dimension"):
        if key in info:
            overview.add_row(key.replace("_", " ").title(), str(info[key]))
    console.print(
        Panel(overview, title="[bold] 📊 Dataset [/bold]", border_style="cyan", box=box.ROUNDED)
    )

    durations = info.get("phase_durations", {})
    if durations:
        table = Table(box=box.SIMPLE, header_style="bold")
        table.add_column("Phase", style="cyan")
        table.add_column("Mean (s)", justify="right")
        table.add_column("Min (s)", justify="right", style="dim")
        table.add_column("Max (s)", justify="right", style="dim")
        for phase, stats in durations.items():
            table.add_row(
                f"{PHASE_ICONS.get(phase, '•')}  {phase}",
                f"{stats['mean']:.2f}",
                f"{stats['min']:.2f}",
                f"{stats['max']:.2f}",
            )
        console.print(table)
