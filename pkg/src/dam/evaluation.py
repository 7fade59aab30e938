"""Cross-validated experiment harness with CSV emission.

`run_single` is the core: preprocess, train the codebook on the training
half only, estimate class probabilities, score the held-out half. The two
protocol drivers (`cross_validate`, `evaluate_loso`) and `parameter_sweep`
compose it; per-run seeds are derived deterministically from the master seed
so every result is reproducible bit-for-bit, with or without worker
processes.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .classifier import ClassModel, class_posterior, fit_model
from .dataset import Dataset, class_order, filter_action_set, split_cross_subject, splits_loso
from .descriptor import compute_histogram
from .preprocess import PreprocessParams, preprocess_action
from .som import SomTrainParams, train_som

logger = logging.getLogger(__name__)

CROSS_SUBJECT = "cross_subject_half"
LOSO = "loso"


def derive_seed(master: int, *key: int) -> int:
    """Stable per-run seed: hash of the master seed and run coordinates."""
    ss = np.random.SeedSequence([int(master), *(int(k) for k in key)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: preprocessing knobs, grid shape, SOM schedule, protocol size."""

    preprocess: PreprocessParams
    rows: int
    cols: int
    som: SomTrainParams = SomTrainParams()
    runs: int = 30
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")

    @property
    def clusters(self) -> int:
        return self.rows * self.cols


@dataclass
class RunResult:
    """Outcome of one train/test execution."""

    run_index: int
    seed: int
    classes: tuple
    accuracy: float
    confusion: np.ndarray  # (C, C) ints, rows = true class
    prob_matrix: np.ndarray  # (C, C) mean normalized scores, rows = true class
    subject_accuracy: dict
    train_subjects: tuple
    test_subjects: tuple
    model: ClassModel

    @property
    def test_count(self) -> int:
        return int(self.confusion.sum())

    @property
    def correct_count(self) -> int:
        return int(np.trace(self.confusion))


@dataclass
class AggregateResult:
    """Runs of one protocol reduced to means; order of `run_results` is fixed."""

    protocol: str
    classes: tuple
    run_results: list[RunResult]
    mean_accuracy: float
    std_accuracy: float
    mean_confusion: np.ndarray
    mean_prob_matrix: np.ndarray
    subject_accuracy: dict

    @property
    def accuracies(self) -> list[float]:
        return [r.accuracy for r in self.run_results]


def run_single(
    train: Dataset,
    test: Dataset,
    cfg: ExperimentConfig,
    som_seed: int | None = None,
    run_index: int = 0,
    cache: dict | None = None,
) -> RunResult:
    """Train on `train` only (no test leakage anywhere) and score `test`.

    `cache` optionally maps action id -> preprocessed WDFs; entries are filled
    on demand. Callers reusing a cache must keep preprocessing params fixed.
    """
    overlap = set(train.subject_set) & set(test.subject_set)
    if overlap:
        raise ValueError(f"train and test share subjects {sorted(overlap)}")
    if train.joint_count != test.joint_count:
        raise ValueError(
            f"joint count mismatch: train has {train.joint_count}, "
            f"test has {test.joint_count}"
        )
    if len(train.class_set) < 2:
        raise ValueError(
            f"training half covers {len(train.class_set)} class(es); need at least 2"
        )

    wdfs_of = cache if cache is not None else {}

    def _wdfs(action):
        got = wdfs_of.get(action.id)
        if got is None:
            got = wdfs_of[action.id] = preprocess_action(action, cfg.preprocess)
        return got

    train_sets = [_wdfs(a) for a in train]
    som_params = replace(cfg.som, seed=cfg.som.seed if som_seed is None else int(som_seed))
    grid = train_som(np.vstack(train_sets), cfg.rows, cfg.cols, som_params)

    classes = class_order(set(train.class_set) | set(test.class_set))
    model = fit_model(
        grid, train_sets, [a.label for a in train], cfg.preprocess,
        train.joint_count, classes=classes,
    )

    index = {c: i for i, c in enumerate(classes)}
    n = len(classes)
    confusion = np.zeros((n, n), dtype=np.int64)
    prob_sums = np.zeros((n, n))
    subj_seen: dict = {}
    subj_hit: dict = {}
    for action in test:
        posterior = class_posterior(model, compute_histogram(grid, _wdfs(action)))
        t = index[action.label]
        p = index[posterior.predicted]
        confusion[t, p] += 1
        prob_sums[t] += posterior.normalized()
        subj_seen[action.subject] = subj_seen.get(action.subject, 0) + 1
        subj_hit[action.subject] = subj_hit.get(action.subject, 0) + (1 if t == p else 0)

    row_counts = confusion.sum(axis=1)
    prob_matrix = np.divide(
        prob_sums,
        row_counts[:, None],
        out=np.zeros_like(prob_sums),
        where=row_counts[:, None] > 0,
    )
    return RunResult(
        run_index=run_index,
        seed=som_params.seed,
        classes=tuple(classes),
        accuracy=float(np.trace(confusion) / confusion.sum()),
        confusion=confusion,
        prob_matrix=prob_matrix,
        subject_accuracy={s: subj_hit[s] / subj_seen[s] for s in sorted(subj_seen)},
        train_subjects=train.subject_set,
        test_subjects=test.subject_set,
        model=model,
    )


# --- Protocol drivers -----------------------------------------------------------


def _cv_run(dataset: Dataset, cfg: ExperimentConfig, run_index: int,
            cache: dict | None = None) -> RunResult:
    train, test = split_cross_subject(dataset, derive_seed(cfg.seed, run_index, 0))
    return run_single(
        train, test, cfg,
        som_seed=derive_seed(cfg.seed, run_index, 1),
        run_index=run_index,
        cache=cache,
    )


def _cv_task(args) -> RunResult:
    dataset, cfg, run_index = args
    return _cv_run(dataset, cfg, run_index)


def _loso_task(args) -> RunResult:
    dataset, cfg, rep, fold_index, run_index = args
    train, test = splits_loso(dataset)[fold_index]
    return run_single(
        train, test, cfg,
        som_seed=derive_seed(cfg.seed, rep, fold_index),
        run_index=run_index,
        cache=None,
    )


def _map_tasks(task_fn, args_list, jobs: int):
    if jobs <= 1 or len(args_list) <= 1:
        return [task_fn(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=min(jobs, len(args_list))) as pool:
        return list(pool.map(task_fn, args_list))


def _aggregate(protocol: str, results: list[RunResult], pooled: bool) -> AggregateResult:
    classes = results[0].classes
    for r in results:
        if r.classes != classes:
            raise ValueError("runs disagree on the class set")
    accuracies = np.array([r.accuracy for r in results])
    if pooled:
        mean = sum(r.correct_count for r in results) / sum(r.test_count for r in results)
    else:
        mean = float(accuracies.mean())
    subj_acc: dict = {}
    for r in results:
        for s, a in r.subject_accuracy.items():
            subj_acc.setdefault(s, []).append(a)
    return AggregateResult(
        protocol=protocol,
        classes=classes,
        run_results=results,
        mean_accuracy=float(mean),
        std_accuracy=float(accuracies.std()),
        mean_confusion=np.mean([r.confusion for r in results], axis=0),
        mean_prob_matrix=np.mean([r.prob_matrix for r in results], axis=0),
        subject_accuracy={s: float(np.mean(v)) for s, v in sorted(subj_acc.items())},
    )


def cross_validate(dataset: Dataset, cfg: ExperimentConfig, jobs: int = 1) -> AggregateResult:
    """cfg.runs repetitions of a fresh random cross-subject half split."""
    if jobs <= 1:
        cache: dict = {}
        results = [_cv_run(dataset, cfg, r, cache) for r in range(cfg.runs)]
    else:
        results = _map_tasks(_cv_task, [(dataset, cfg, r) for r in range(cfg.runs)], jobs)
    return _aggregate(CROSS_SUBJECT, results, pooled=False)


def evaluate_loso(dataset: Dataset, cfg: ExperimentConfig, jobs: int = 1,
                  repeats: int = 1) -> AggregateResult:
    """Leave-one-subject-out; overall accuracy pools all held-out instances.

    `repeats` > 1 re-runs every fold with fresh SOM seeds (the folds
    themselves are deterministic) and averages.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    folds = splits_loso(dataset)
    if jobs <= 1:
        cache: dict = {}
        results = []
        for rep in range(repeats):
            for k, (train, test) in enumerate(folds):
                results.append(
                    run_single(
                        train, test, cfg,
                        som_seed=derive_seed(cfg.seed, rep, k),
                        run_index=rep * len(folds) + k,
                        cache=cache,
                    )
                )
    else:
        args = [
            (dataset, cfg, rep, k, rep * len(folds) + k)
            for rep in range(repeats)
            for k in range(len(folds))
        ]
        results = _map_tasks(_loso_task, args, jobs)
    return _aggregate(LOSO, results, pooled=True)


# --- Parameter sweep --------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    subset: str
    window: int
    rows: int
    cols: int
    clusters: int
    runs: int
    mean_accuracy: float
    std_accuracy: float


def parameter_sweep(
    dataset: Dataset,
    cfg: ExperimentConfig,
    windows,
    grids,
    action_sets: dict | None = None,
    jobs: int = 1,
) -> list[SweepRow]:
    """Cross-validate every window x grid combination.

    `grids` is a list of (rows, cols). With `action_sets` (name -> class
    list) each combination is evaluated per subset and an unweighted `mean`
    row across subsets is appended, mirroring how multi-subset benchmarks are
    usually reported. All combinations share the master seed, so their
    underlying splits are paired.
    """
    windows = list(windows)
    grids = [(int(r), int(c)) for r, c in grids]
    if not windows or not grids:
        raise ValueError("need at least one window and one grid")
    for w in windows:
        if not 1 <= w <= cfg.preprocess.frames - 1:
            raise ValueError(
                f"window {w} invalid for frames {cfg.preprocess.frames}; "
                f"must be in [1, {cfg.preprocess.frames - 1}]"
            )

    if action_sets:
        subsets = [(name, action_sets[name]) for name in sorted(action_sets)]
    else:
        subsets = [("all", None)]

    out: list[SweepRow] = []
    for window in windows:
        for rows, cols in grids:
            combo_cfg = replace(
                cfg,
                preprocess=replace(cfg.preprocess, window=window),
                rows=rows,
                cols=cols,
            )
            per_subset: list[SweepRow] = []
            for name, labels in subsets:
                sub = dataset if labels is None else filter_action_set(dataset, labels)
                agg = cross_validate(sub, combo_cfg, jobs=jobs)
                per_subset.append(
                    SweepRow(
                        subset=name,
                        window=window,
                        rows=rows,
                        cols=cols,
                        clusters=rows * cols,
                        runs=cfg.runs,
                        mean_accuracy=agg.mean_accuracy,
                        std_accuracy=agg.std_accuracy,
                    )
                )
                logger.info(
                    "sweep %s W=%d %dx%d: %.4f +/- %.4f",
                    name, window, rows, cols,
                    per_subset[-1].mean_accuracy, per_subset[-1].std_accuracy,
                )
            out.extend(per_subset)
            if action_sets:
                out.append(
                    SweepRow(
                        subset="mean",
                        window=window,
                        rows=rows,
                        cols=cols,
                        clusters=rows * cols,
                        runs=cfg.runs,
                        mean_accuracy=float(
                            np.mean([r.mean_accuracy for r in per_subset])
                        ),
                        std_accuracy=float(
                            np.mean([r.std_accuracy for r in per_subset])
                        ),
                    )
                )
    return out


# --- CSV emission -------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def write_results_csv(path, agg: AggregateResult, cfg: ExperimentConfig) -> None:
    """Per-run rows: run index, window, cluster count, seed, accuracy."""
    lines = ["run,window,clusters,seed,accuracy"]
    for r in agg.run_results:
        lines.append(
            f"{r.run_index},{cfg.preprocess.window},{cfg.clusters},{r.seed},{_fmt(r.accuracy)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def _write_matrix_csv(path, classes, matrix) -> None:
    lines = ["true_class," + ",".join(str(c) for c in classes)]
    for label, row in zip(classes, matrix):
        lines.append(f"{label}," + ",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_confusion_csv(path, agg: AggregateResult) -> None:
    """Mean confusion counts per cell; rows are true classes."""
    _write_matrix_csv(path, agg.classes, agg.mean_confusion)


def write_prob_matrix_csv(path, agg: AggregateResult) -> None:
    """Mean normalized class scores per true class."""
    _write_matrix_csv(path, agg.classes, agg.mean_prob_matrix)


def write_per_subject_csv(path, agg: AggregateResult) -> None:
    lines = ["subject,accuracy"]
    for subject, accuracy in agg.subject_accuracy.items():
        lines.append(f"{subject},{_fmt(accuracy)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_sweep_csv(path, rows: list[SweepRow]) -> None:
    lines = ["subset,window,grid_rows,grid_cols,clusters,runs,mean_accuracy,std_accuracy"]
    for r in rows:
        lines.append(
            f"{r.subset},{r.window},{r.rows},{r.cols},{r.clusters},{r.runs},"
            f"{_fmt(r.mean_accuracy)},{_fmt(r.std_accuracy)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
