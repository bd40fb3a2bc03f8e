"""
Utility message display functions (errors, warnings, info, etc.).
"""

from .core import console


def show_error(msg: str):
    """Display an error message."""
    console.print(f"[bold red]❌ {msg}[/bold red]")


def show_warning(msg: str):
    """Display a warning message."""
    console.print(f"[yellow]⚠️  {msg}[/yellow]")


def show_info(msg: str):
    """Display an info message."""
    console.print(f"[dim]ℹ️  {msg}[/dim]")


def show_success(msg: str):
    """Display a success message."""
    console.print(f"[green]✅ {msg}[/green]")


def show_written(path: str, what: str = ""):
    """Report an artifact that was written to disk."""
    suffix = f" ({what})" if what else ""
    console.print(f"[green]💾 {path}[/green][dim]{suffix}[/dim]")

