"""Train a model on synthetic movements, classify held-out actions, and show
that saving and reloading the model changes nothing.
"""

import tempfile
from pathlib import Path

import numpy as np

from dam import (
    PreprocessParams,
    SomTrainParams,
    classify_action,
    fit_model,
    load_model,
    make_directional_dataset,
    preprocess_action,
    save_model,
    train_som,
)


def main() -> None:
    dataset = make_directional_dataset(
        classes=3, subjects=6, instances=4, raw_frames=30, joints=4, seed=3
    )
    train_set = [a for a in dataset if a.subject <= 4]
    held_out = [a for a in dataset if a.subject > 4]
    print(f"{len(train_set)} training actions, {len(held_out)} held-out actions")

    params = PreprocessParams(frames=14, window=3)
    wdf_sets = [preprocess_action(a, params) for a in train_set]
    grid = train_som(np.vstack(wdf_sets), 5, 5, SomTrainParams(epochs=15, seed=1))
    model = fit_model(grid, wdf_sets, [a.label for a in train_set],
                      params, dataset.joint_count)
    occupied = (model.cluster_class_probs.sum(axis=1) > 0).sum()
    print(f"codebook: {grid.rows}x{grid.cols} units, {occupied} hold training mass")

    print("\nid             true  predicted  normalized scores")
    correct = 0
    for action in held_out:
        posterior = classify_action(model, action)
        scores = ", ".join(f"{v:.3f}" for v in posterior.normalized())
        flag = "" if posterior.predicted == action.label else "  <-- wrong"
        correct += posterior.predicted == action.label
        print(f"{action.id:<14} {action.label:>4}  {posterior.predicted:>9}  [{scores}]{flag}")
    print(f"\nheld-out accuracy: {correct}/{len(held_out)}")

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "model.json"
        save_model(model, path)
        print(f"\nmodel file: {path.stat().st_size} bytes")
        reloaded = load_model(path)
        same = all(
            np.array_equal(
                classify_action(model, a).scores, classify_action(reloaded, a).scores
            )
            for a in held_out
        )
        print(f"reloaded model scores identical: {same}")


if __name__ == "__main__":
    main()
