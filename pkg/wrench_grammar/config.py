"""
Configuration for the wrench grammar pipeline.

Holds the tunable parameters of every stage (segmentation, gradient bands,
refinement, classifiers, evaluation), the registries of named classifier
profiles and evaluation protocols, and the layered RunConfig that merges
defaults, an optional JSON config file, and CLI flags (in that order).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .errors import UsageError

logger = logging.getLogger(__name__)

# ─── Stage Parameters ────────────────────────────────────────────


@dataclass
class SegmentationConfig:
    """Piecewise-linear segmentation of one axis series."""

    r2_min: float = 0.70
    min_window: int = 5
    # Opt-in: windows whose variance sits inside (noise_scale · σ̂)² count as constant.
    # 0 keeps the strict R² gate.
    noise_scale: float = 0.0
    refine_breakpoints: bool = True


@dataclass
class BandConfig:
    """How gradient thresholds are calibrated from a corpus of slopes."""

    cut_small: float = 0.25
    cut_med: float = 0.50
    cut_big: float = 0.75
    g_max_percentile: float = 99.0
    eps_percentile: float = 10.0
    eps_floor: float = 0.02
    scope: str = "per-axis"  # per-axis | global


@dataclass
class FilterConfig:
    """Refinement filter applied at every grammar level."""

    min_duration_ratio: float = 0.1
    amp_ratio: float = 5.0
    max_cycles: int = 3
    # Absolute floor in seconds; the encoder raises it to 2·dt per series.
    min_duration: float = 0.0


@dataclass
class EncodingConfig:
    """Everything needed to turn a phase series into grammar words."""

    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    filtering: FilterConfig = field(default_factory=FilterConfig)


@dataclass
class SvmConfig:
    kernel: str = "rbf"  # linear | poly | rbf
    C: float = 1.0
    gamma: float | str = "scale"
    degree: int = 3
    coef0: float = 1.0
    tol: float = 1e-3
    standardize: bool = True


@dataclass
class MondrianConfig:
    n_trees: int = 100
    # None means an infinite lifetime (trees grow until every leaf is pure).
    lifetime: float | None = None
    n_batches: int = 12
    batch_semantics: str = "count"  # count | size
    batch_size: int = 12

    @property
    def lifetime_value(self) -> float:
        return math.inf if self.lifetime is None else float(self.lifetime)


@dataclass
class PathsConfig:
    data_dir: str = "data"
    out_dir: str = "out"


@dataclass
class EvalConfig:
    protocol: str = "sim-one-arm"
    n_train: int | None = None
    n_validation: int | None = None
    classifiers: list[str] = field(default_factory=lambda: ["svm-rbf", "mondrian"])
    shuffle: bool = False


# ─── Classifier Profiles ─────────────────────────────────────────


@dataclass
class ClassifierProfile:
    """A named classifier setup usable from train/eval."""

    name: str
    family: str  # svm | mondrian
    svm: SvmConfig | None = None
    mondrian: MondrianConfig | None = None
    description: str = ""


CLASSIFIER_PROFILES: dict[str, ClassifierProfile] = {
    "svm-rbf": ClassifierProfile(
        name="svm-rbf",
        family="svm",
        svm=SvmConfig(kernel="rbf"),
        description="Soft-margin SVM, RBF kernel, C=1 (default)",
    ),
    "svm-linear": ClassifierProfile(
        name="svm-linear",
        family="svm",
        svm=SvmConfig(kernel="linear"),
        description="Soft-margin SVM, linear kernel, C=1",
    ),
    "svm-poly": ClassifierProfile(
        name="svm-poly",
        family="svm",
        svm=SvmConfig(kernel="poly", degree=3, coef0=1.0),
        description="Soft-margin SVM, cubic polynomial kernel, C=1",
    ),
    "mondrian": ClassifierProfile(
        name="mondrian",
        family="mondrian",
        mondrian=MondrianConfig(),
        description="Online Mondrian forest, 100 trees, infinite lifetime",
    ),
}


# ─── Evaluation Protocols ────────────────────────────────────────


@dataclass
class EvalProtocol:
    """Trial counts and learning-curve schedule for one evaluation setup."""

    name: str
    n_trials: int
    n_train: int
    n_validation: int
    arms: int = 1
    svm_start: int = 1
    mondrian_start: int = 3
    step: int = 1
    steady_state_window: int = 5
    description: str = ""


EVAL_PROTOCOLS: dict[str, EvalProtocol] = {
    "sim-one-arm": EvalProtocol(
        name="sim-one-arm",
        n_trials=38,
        n_train=30,
        n_validation=8,
        description="Simulated single-arm snap assembly",
    ),
    "real-one-arm": EvalProtocol(
        name="real-one-arm",
        n_trials=46,
        n_train=36,
        n_validation=10,
        description="Physical single-arm trials",
    ),
    "sim-two-arm": EvalProtocol(
        name="sim-two-arm",
        n_trials=20,
        n_train=14,
        n_validation=6,
        arms=2,
        description="Simulated two-arm assembly with a reaction arm",
    ),
}

DEFAULT_SEED: int = 42


def get_classifier_profile(name: str) -> ClassifierProfile:
    """Get a classifier profile, raising KeyError if not found."""
    if name not in CLASSIFIER_PROFILES:
        available = ", ".join(CLASSIFIER_PROFILES.keys())
        raise KeyError(f"Unknown classifier '{name}'. Available: {available}")
    return CLASSIFIER_PROFILES[name]


def list_classifier_names() -> list[str]:
    return list(CLASSIFIER_PROFILES.keys())


def default_classifier_name(config: RunConfig) -> str:
    """Classifier used when none is named: the SVM profile of the configured kernel."""
    return f"svm-{config.svm.kernel}"


def resolve_svm_config(profile: ClassifierProfile, config: RunConfig) -> SvmConfig:
    """The run's SVM parameters with the kernel fixed by *profile*."""
    if profile.svm is None:
        raise UsageError(f"Classifier '{profile.name}' is not an SVM")
    return replace(config.svm, kernel=profile.svm.kernel)


def get_eval_protocol(name: str) -> EvalProtocol:
    """Get an evaluation protocol, raising KeyError if not found."""
    if name not in EVAL_PROTOCOLS:
        available = ", ".join(EVAL_PROTOCOLS.keys())
        raise KeyError(f"Unknown protocol '{name}'. Available: {available}")
    return EVAL_PROTOCOLS[name]


def list_protocol_names() -> list[str]:
    return list(EVAL_PROTOCOLS.keys())


# ─── Run Configuration ───────────────────────────────────────────


def _section_from_dict(cls: type, data: dict[str, Any] | None) -> Any:
    """Build a config section, ignoring keys the section does not know."""
    if not data:
        return cls()
    known = {f.name for f in fields(cls)}
    return cls(**{k: v for k, v in data.items() if k in known})


@dataclass
class RunConfig:
    """Full pipeline configuration after all layers are merged."""

    seed: int = DEFAULT_SEED
    jobs: int = 1
    levels: list[str] = field(default_factory=lambda: ["primitive", "mc", "llb"])
    one_hot: bool = False
    paths: PathsConfig = field(default_factory=PathsConfig)
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    bands: BandConfig = field(default_factory=BandConfig)
    filtering: FilterConfig = field(default_factory=FilterConfig)
    svm: SvmConfig = field(default_factory=SvmConfig)
    mondrian: MondrianConfig = field(default_factory=MondrianConfig)
    evaluation: EvalConfig = field(default_factory=EvalConfig)

    @property
    def encoding(self) -> EncodingConfig:
        return EncodingConfig(segmentation=self.segmentation, filtering=self.filtering)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        return cls(
            seed=int(data.get("seed", DEFAULT_SEED)),
            jobs=int(data.get("jobs", 1)),
            levels=list(data.get("levels", ["primitive", "mc", "llb"])),
            one_hot=bool(data.get("one_hot", False)),
            paths=_section_from_dict(PathsConfig, data.get("paths")),
            segmentation=_section_from_dict(SegmentationConfig, data.get("segmentation")),
            bands=_section_from_dict(BandConfig, data.get("bands")),
            filtering=_section_from_dict(FilterConfig, data.get("filtering")),
            svm=_section_from_dict(SvmConfig, data.get("svm")),
            mondrian=_section_from_dict(MondrianConfig, data.get("mondrian")),
            evaluation=_section_from_dict(EvalConfig, data.get("evaluation")),
        )


def load_run_config(path: str | Path | None) -> RunConfig:
    """Load a RunConfig from a JSON file (defaults when *path* is None).

    Raises:
        UsageError: file missing, not JSON, or failing validation.
    """
    if path is None:
        return RunConfig()

    from .validators import validate_run_config

    config_path = Path(path)
    if not config_path.is_file():
        raise UsageError(f"Config file not found: {config_path}")
    try:
        data = json.loads(config_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise UsageError(f"Config file is not valid JSON: {config_path}: {e}") from e

    result = validate_run_config(data)
    if not result.ok:
        raise UsageError(f"Invalid config {config_path}: " + "; ".join(result.errors))
    for warning in result.warnings:
        logger.warning("%s: %s", config_path, warning)
    return RunConfig.from_dict(data)


# Flag name on the argparse namespace → (section, field) on RunConfig.
_FLAG_TARGETS: dict[str, tuple[str | None, str]] = {
    "seed": (None, "seed"),
    "jobs": (None, "jobs"),
    "one_hot": (None, "one_hot"),
    "data_dir": ("paths", "data_dir"),
    "out_dir": ("paths", "out_dir"),
    "r2_min": ("segmentation", "r2_min"),
    "min_window": ("segmentation", "min_window"),
    "noise_scale": ("segmentation", "noise_scale"),
    "cut_small": ("bands", "cut_small"),
    "cut_med": ("bands", "cut_med"),
    "cut_big": ("bands", "cut_big"),
    "calibration_scope": ("bands", "scope"),
    "min_duration_ratio": ("filtering", "min_duration_ratio"),
    "amp_ratio": ("filtering", "amp_ratio"),
    "max_cycles": ("filtering", "max_cycles"),
    "C": ("svm", "C"),
    "kernel": ("svm", "kernel"),
    "gamma": ("svm", "gamma"),
    "trees": ("mondrian", "n_trees"),
    "batches": ("mondrian", "n_batches"),
    "protocol": ("evaluation", "protocol"),
    "train_trials": ("evaluation", "n_train"),
    "validation_trials": ("evaluation", "n_validation"),
    "shuffle": ("evaluation", "shuffle"),
}


def apply_cli_overrides(config: RunConfig, args: Any) -> RunConfig:
    """Overlay CLI flags that were actually given (not None) onto *config*."""
    for flag, (section, name) in _FLAG_TARGETS.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        target = config if section is None else getattr(config, section)
        setattr(target, name, value)

    no_refine = getattr(args, "no_refine_breakpoints", False)
    if no_refine:
        config.segmentation.refine_breakpoints = False
    levels = getattr(args, "levels", None)
    if levels:
        config.levels = [lv.strip() for lv in levels.split(",") if lv.strip()]
    classifiers = getattr(args, "classifiers", None)
    if classifiers:
        config.evaluation.classifiers = [c.strip() for c in classifiers.split(",") if c.strip()]
    return config


def resolve_run_config(args: Any) -> RunConfig:
    """Build the effective RunConfig for a parsed command line."""
    config = load_run_config(getattr(args, "config", None))
    config = apply_cli_overrides(config, args)

    from .validators import validate_run_config

    result = validate_run_config(config.to_dict())
    if not result.ok:
        raise UsageError("; ".join(result.errors))
    return config
