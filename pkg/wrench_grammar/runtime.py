"""
Output directory layout and atomic file writing.

Every artifact is written to a sibling ``*.tmp`` file first and then moved
into place, so an interrupted run never leaves a half-written file behind.
Files carry no timestamps: rerunning a command with the same inputs and
seed reproduces them byte for byte.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import __version__
from .errors import ModelFormatError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


# ─── Atomic Writes ───────────────────────────────────────────────


def _tmp_path(path: Path) -> Path:
    return path.with_name(path.name + ".tmp")


def write_bytes_atomic(path: str | Path, data: bytes) -> Path:
    """Write *data* to *path* via a temporary sibling file."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = _tmp_path(target)
    with open(tmp_path, "wb") as f:
        f.write(data)
    tmp_path.replace(target)
    logger.debug("wrote %s (%d bytes)", target, len(data))
    return target


def write_text_atomic(path: str | Path, text: str) -> Path:
    return write_bytes_atomic(path, text.encode("utf-8"))


def write_json_atomic(path: str | Path, payload: Any) -> Path:
    """Dump *payload* as indented UTF-8 JSON with a trailing newline."""
    text = json.dumps(payload, ensure_ascii=False, indent=2) + "\n"
    return write_text_atomic(path, text)


# ─── Versioned Documents ─────────────────────────────────────────


def with_header(kind: str, body: dict[str, Any]) -> dict[str, Any]:
    """Prefix *body* with the ``format``/``version`` header."""
    return {"format": f"wrench-grammar/{kind}", "version": FORMAT_VERSION, **body}


def read_versioned_json(path: str | Path, kind: str) -> dict[str, Any]:
    """Load a JSON document and check its format header.

    Raises:
        ModelFormatError: missing file, invalid JSON, wrong kind or version.
    """
    doc_path = Path(path)
    if not doc_path.is_file():
        raise ModelFormatError(f"File not found: {doc_path}")
    try:
        data = json.loads(doc_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"{doc_path} is not valid JSON: {e}") from e

    expected = f"wrench-grammar/{kind}"
    if not isinstance(data, dict) or data.get("format") != expected:
        raise ModelFormatError(f"{doc_path} is not a {kind} file (format != {expected!r})")
    if data.get("version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"{doc_path}: unsupported {kind} version {data.get('version')!r} "
            f"(expected {FORMAT_VERSION})"
        )
    return data


# ─── Output Layout ───────────────────────────────────────────────


@dataclass
class OutputLayout:
    """Where each command writes its artifacts under one output directory."""

    root: Path

    @classmethod
    def at(cls, path: str | Path) -> OutputLayout:
        return cls(root=Path(path))

    @property
    def calibration(self) -> Path:
        return self.root / "calibration.json"

    @property
    def grammars_dir(self) -> Path:
        return self.root / "grammars"

    def grammar_path(self, trial_id: str) -> Path:
        safe_name = trial_id.replace("/", "_").replace("\\", "_")
        return self.grammars_dir / f"{safe_name}.json"

    @property
    def dataset_csv(self) -> Path:
        return self.root / "dataset.csv"

    @property
    def dataset_layout(self) -> Path:
        return self.root / "dataset.layout.json"

    @property
    def model(self) -> Path:
        return self.root / "model.json"

    @property
    def predictions_csv(self) -> Path:
        return self.root / "predictions.csv"

    @property
    def learning_curve_csv(self) -> Path:
        return self.root / "learning_curve.csv"

    @property
    def learning_curve_svg(self) -> Path:
        return self.root / "learning_curve.svg"

    def grammar_plot(self, level: str) -> Path:
        return self.root / f"grammar_{level}.svg"

    @property
    def run_metadata(self) -> Path:
        return self.root / "run.json"

    def ensure(self) -> OutputLayout:
        self.root.mkdir(parents=True, exist_ok=True)
        return self


def write_run_metadata(
    layout: OutputLayout, command: str, config: dict[str, Any], **extra: Any
) -> Path:
    """Record the command and the effective configuration of a run."""
    payload = with_header(
        "run", {"command": command, "package_version": __version__, "config": config, **extra}
    )
    return write_json_atomic(layout.run_metadata, payload)
