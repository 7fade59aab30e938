"""Classification: per-cluster class probabilities and histogram posteriors.

A trained model couples the codebook with a (units x classes) matrix whose
row l holds P(class | unit l), estimated from the training WDFs that unit l
won. An action's score for class c is the histogram-weighted sum of those
probabilities; the argmax wins, ties to the earliest class in the model's
class order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .descriptor import Histogram, compute_histogram
from .preprocess import PreprocessParams, preprocess_action
from .som import SomGrid, bmu_batch

MODEL_FORMAT_VERSION = "1"

_ROW_SUM_TOL = 1e-9


@dataclass
class ClassModel:
    """Everything needed to classify a raw action: codebook, probabilities, knobs."""

    grid: SomGrid
    classes: list
    cluster_class_probs: np.ndarray  # (units, len(classes))
    params: PreprocessParams
    joint_count: int

    def __post_init__(self) -> None:
        self.classes = list(self.classes)
        if not self.classes:
            raise ValueError("model needs at least one class")
        if len(set(map(repr, self.classes))) != len(self.classes):
            raise ValueError("duplicate class labels")
        probs = np.asarray(self.cluster_class_probs, dtype=np.float64)
        self.cluster_class_probs = probs
        expected = (self.grid.unit_count, len(self.classes))
        if probs.shape != expected:
            raise ValueError(
                f"cluster_class_probs has shape {probs.shape}, expected {expected}"
            )
        if probs.min() < 0.0:
            raise ValueError("cluster_class_probs contains negative entries")
        sums = probs.sum(axis=1)
        bad = ~((np.abs(sums - 1.0) <= _ROW_SUM_TOL) | (sums == 0.0))
        if bad.any():
            raise ValueError(
                f"cluster_class_probs row {int(np.argmax(bad))} sums to "
                f"{sums[bad][0]!r}; rows must sum to 1 or be all zero"
            )
        if self.grid.dim != self.params.feature_dim(self.joint_count):
            raise ValueError(
                f"codebook dimension {self.grid.dim} does not match "
                f"joint_count * 3 * window = {self.params.feature_dim(self.joint_count)}"
            )


@dataclass(frozen=True)
class Posterior:
    """Raw (unnormalized) per-class scores for one action."""

    classes: tuple
    scores: np.ndarray

    @property
    def predicted(self):
        return self.classes[int(np.argmax(self.scores))]

    def normalized(self) -> np.ndarray:
        """Scores rescaled to sum to 1; all-zero stays all-zero."""
        total = self.scores.sum()
        if total > 0.0:
            return self.scores / total
        return np.zeros_like(self.scores)


def estimate_class_probabilities(grid, wdf_sets, labels, classes=None):
    """Estimate P(class | unit) from labeled per-action WDF sets.

    Args:
        grid: trained codebook.
        wdf_sets: sequence of (n_i, dim) arrays, one per training action.
        labels: class label per entry of wdf_sets.
        classes: optional explicit class order; defaults to the sorted labels.

    Returns:
        (classes, probs): the class order used and the (units, classes)
        probability matrix. Units that won no training WDF get all-zero rows.
    """
    wdf_sets = list(wdf_sets)
    labels = list(labels)
    if len(wdf_sets) != len(labels):
        raise ValueError(
            f"{len(wdf_sets)} WDF sets but {len(labels)} labels"
        )
    from .dataset import class_order  # local import: dataset pulls in nothing heavy

    if classes is None:
        classes = class_order(labels)
    classes = list(classes)
    index = {label: i for i, label in enumerate(classes)}
    unknown = [l for l in labels if l not in index]
    if unknown:
        raise ValueError(f"label {unknown[0]!r} not in the class list {classes!r}")

    counts = np.zeros((grid.unit_count, len(classes)))
    total = 0
    for wdfs, label in zip(wdf_sets, labels):
        wdfs = np.asarray(wdfs, dtype=np.float64)
        if wdfs.shape[0] == 0:
            continue
        winners = bmu_batch(grid, wdfs)
        counts[:, index[label]] += np.bincount(winners, minlength=grid.unit_count)
        total += wdfs.shape[0]
    if total == 0:
        raise ValueError("no training WDFs")
    row_sums = counts.sum(axis=1)
    probs = np.divide(
        counts,
        row_sums[:, None],
        out=np.zeros_like(counts),
        where=row_sums[:, None] > 0,
    )
    return classes, probs


def fit_model(grid, wdf_sets, labels, params: PreprocessParams, joint_count: int,
              classes=None) -> ClassModel:
    """estimate_class_probabilities + packaging into a ClassModel."""
    classes, probs = estimate_class_probabilities(grid, wdf_sets, labels, classes)
    return ClassModel(
        grid=grid,
        classes=classes,
        cluster_class_probs=probs,
        params=params,
        joint_count=joint_count,
    )


def class_posterior(model: ClassModel, histogram: Histogram) -> Posterior:
    """Score every class: sum over units of P(class | unit) * histogram mass."""
    bins = np.asarray(histogram.bins, dtype=np.float64)
    if bins.shape[0] != model.grid.unit_count:
        raise ValueError(
            f"histogram has {bins.shape[0]} bins, model expects {model.grid.unit_count}"
        )
    return Posterior(
        classes=tuple(model.classes),
        scores=bins @ model.cluster_class_probs,
    )


def classify_action(model: ClassModel, action) -> Posterior:
    """Preprocess a raw action with the model's own parameters and score it."""
    frames = np.asarray(getattr(action, "frames", action), dtype=np.float64)
    if frames.ndim != 3:
        raise ValueError(f"action must have shape (F, J, 3), got {frames.shape}")
    if frames.shape[1] != model.joint_count:
        raise ValueError(
            f"action has {frames.shape[1]} joints but the model was trained "
            f"with {model.joint_count}"
        )
    wdfs = preprocess_action(frames, model.params)
    return class_posterior(model, compute_histogram(model.grid, wdfs))


# --- Model files -----------------------------------------------------------------


def save_model(model: ClassModel, path) -> None:
    """Write the model as deterministic JSON; floats keep full round-trip precision."""
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "joint_count": model.joint_count,
        "preprocess": {
            "frames": model.params.frames,
            "window": model.params.window,
            "smoothing_sigma": model.params.smoothing_sigma,
            "smoothing_radius": model.params.smoothing_radius,
            "norm_epsilon": model.params.norm_epsilon,
        },
        "grid": {
            "rows": model.grid.rows,
            "cols": model.grid.cols,
            "dim": model.grid.dim,
            "codebook": model.grid.codebook.tolist(),
        },
        "classes": list(model.classes),
        "cluster_class_probs": model.cluster_class_probs.tolist(),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")


def load_model(path) -> ClassModel:
    """Parse and fully validate a model file written by save_model."""
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}: not valid JSON: {e}") from None
    try:
        version = payload["format_version"]
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(
                f"unsupported model format version {version!r} "
                f"(this build reads {MODEL_FORMAT_VERSION!r})"
            )
        grid_data = payload["grid"]
        grid = SomGrid(
            rows=int(grid_data["rows"]),
            cols=int(grid_data["cols"]),
            codebook=np.asarray(grid_data["codebook"], dtype=np.float64),
        )
        if grid.dim != int(grid_data["dim"]):
            raise ValueError(
                f"declared dim {grid_data['dim']} != codebook dim {grid.dim}"
            )
        params = PreprocessParams(**payload["preprocess"])
        return ClassModel(
            grid=grid,
            classes=list(payload["classes"]),
            cluster_class_probs=np.asarray(payload["cluster_class_probs"], dtype=np.float64),
            params=params,
            joint_count=int(payload["joint_count"]),
        )
    except KeyError as e:
        raise ValueError(f"{path}: model file missing field {e}") from None
