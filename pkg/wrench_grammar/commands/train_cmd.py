"""
Train command: fit a phase classifier on the encoded dataset.
"""

import time
from pathlib import Path

from ..config import default_classifier_name, resolve_run_config
from ..display import show_error, show_success, show_train_summary, show_warning, show_written
from ..grammar import PhaseDataset
from ..model import check_forest, save_model, train_model
from ..mondrian import MondrianForest
from ..runtime import OutputLayout, write_run_metadata


def handle_train(args) -> int:
    """Train the chosen classifier and write model.json."""
    config = resolve_run_config(args)
    layout = OutputLayout.at(config.paths.out_dir).ensure()
    started = time.monotonic()

    if not layout.dataset_csv.exists() or not layout.dataset_layout.exists():
        show_error(f"No dataset in {layout.root}. Run 'encode' first.")
        return 2
    dataset = PhaseDataset.from_csv(layout.dataset_csv, layout.dataset_layout)
    if args.train_trials:
        dataset = dataset.head(args.train_trials)

    classifier = args.classifier or default_classifier_name(config)
    bundle = train_model(dataset, classifier, config, config.seed)
    estimator = bundle.estimator

    if isinstance(estimator, MondrianForest):
        details = {
            "Trees": estimator.n_trees,
            "Max depth": max((t.depth for t in estimator.trees), default=0),
        }
        if args.check:
            check_forest(estimator)
            show_success("Forest invariants hold")
    else:
        details = {
            "Kernel": estimator.kernel.kind,
            "Machines": len(estimator.machines),
            "Support vectors": sum(len(m.support_vectors) for m in estimator.machines),
        }
        if estimator.dropped:
            show_warning(f"{estimator.dropped} constant feature(s) dropped before training")
        if args.check:
            show_warning("--check only applies to Mondrian forests")

    path = save_model(bundle, Path(args.model) if args.model else layout.model)
    write_run_metadata(
        layout,
        "train",
        config.to_dict(),
        classifier=classifier,
        samples=len(dataset),
        dimension=dataset.dimension,
    )

    show_train_summary(classifier, len(dataset), dataset.dimension, details, time.monotonic() - started)
    show_written(str(path), bundle.family)
    return 0
