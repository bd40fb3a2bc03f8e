"""
Predict command: classify the phases of encoded trials with a saved model.
"""

from pathlib import Path

import pandas as pd

from ..config import resolve_run_config
from ..display import show_error, show_predictions, show_written
from ..grammar import PHASE_CLASSES, group_matrices, load_grammars, vectorize_with
from ..model import load_model
from ..runtime import OutputLayout, write_text_atomic


def handle_predict(args) -> int:
    config = resolve_run_config(args)
    layout = OutputLayout.at(config.paths.out_dir).ensure()

    model_path = Path(args.model) if args.model else layout.model
    if not model_path.exists():
        show_error(f"No model at {model_path}. Run 'train' first.")
        return 2
    bundle = load_model(model_path)

    matrices = load_grammars(args.grammars or layout.grammars_dir)
    groups = group_matrices(matrices)
    if args.trial_ids:
        wanted = set(args.trial_ids)
        groups = [g for g in groups if g[0].base_id in wanted]
        missing = wanted - {g[0].base_id for g in groups}
        if missing:
            show_error(f"No grammars for: {', '.join(sorted(missing))}")
            return 2

    dataset = vectorize_with(groups, bundle.layout)
    predicted, scores = bundle.predict(dataset.X)

    rows = [
        {
            "trial_id": trial_id,
            "truth": PHASE_CLASSES[int(truth)],
            "predicted": PHASE_CLASSES[int(pred)],
            "scores": [float(s) for s in row],
        }
        for trial_id, truth, pred, row in zip(
            dataset.trial_ids, dataset.y, predicted, scores, strict=True
        )
    ]
    score_names = [f"{'p' if bundle.family == 'mondrian' else 'votes'}:{c}" for c in PHASE_CLASSES]

    frame = pd.DataFrame(
        {
            "trial_id": [r["trial_id"] for r in rows],
            "truth": [r["truth"] for r in rows],
            "predicted": [r["predicted"] for r in rows],
        }
    )
    for i, name in enumerate(score_names):
        frame[name] = [r["scores"][i] for r in rows]
    path = write_text_atomic(
        layout.predictions_csv,
        frame.to_csv(index=False, float_format="%.6f", lineterminator="\n"),
    )

    show_predictions(rows, score_names)
    show_written(str(path), f"{len(rows)} prediction(s) by {bundle.classifier}")
    return 0
