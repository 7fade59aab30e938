"""Command-line interface: convert, train, classify, evaluate, sweep.

One binary, subcommand style. Experiment settings come from an optional JSON
config file with flag overrides (flags win); `DAM_SEED` supplies the default
seed when neither gives one. Every failure is reported as a single
`error: ...` line on stderr with a nonzero exit code.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import shutil
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import classify_action, fit_model, load_model, save_model
from .dataset import (
    EXCLUDE_FILENAME,
    Dataset,
    Msrc12Layout,
    load_canonical_dataset,
    load_msr_action3d,
    load_msrc12,
    parse_action_file,
    write_canonical_dataset,
)
from .evaluation import (
    CROSS_SUBJECT,
    LOSO,
    ExperimentConfig,
    cross_validate,
    evaluate_loso,
    parameter_sweep,
    write_confusion_csv,
    write_per_subject_csv,
    write_prob_matrix_csv,
    write_results_csv,
    write_sweep_csv,
)
from .preprocess import (
    DEFAULT_NORM_EPSILON,
    DEFAULT_SMOOTHING_RADIUS,
    DEFAULT_SMOOTHING_SIGMA,
    PreprocessParams,
    preprocess_action,
)
from .som import SomTrainParams, train_som

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "DAM_SEED"
FORMATS = ("canonical", "action3d", "msrc12")

_PROTOCOL_ALIASES = {
    "cross-subject": CROSS_SUBJECT,
    "cross_subject": CROSS_SUBJECT,
    CROSS_SUBJECT: CROSS_SUBJECT,
    "loso": LOSO,
}

# Recognized config-file keys; anything else (bar "_"-prefixed comments) is an error.
CONFIG_KEYS = frozenset(
    {
        "frames", "window", "smoothing_sigma", "smoothing_radius", "norm_epsilon",
        "grid", "epochs", "learning_rate", "som_radius",
        "runs", "seed", "jobs", "protocol",
        "windows", "grids", "action_sets",
    }
)


class CliError(Exception):
    """Usage or configuration problem; exits with status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise CliError(message)


# --- Settings resolution ---------------------------------------------------------


def _load_config(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise CliError(f"cannot read config {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise CliError(f"config {path} is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise CliError(f"config {path} must be a JSON object")
    unknown = sorted(k for k in data if not k.startswith("_") and k not in CONFIG_KEYS)
    if unknown:
        raise CliError(
            f"config {path} has unknown key(s): {', '.join(unknown)}; "
            f"allowed: {', '.join(sorted(CONFIG_KEYS))}"
        )
    return {k: v for k, v in data.items() if not k.startswith("_")}


def parse_grid(text) -> tuple[int, int]:
    """Accept '25x25' or a [rows, cols] pair from a config file."""
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return int(text[0]), int(text[1])
    parts = str(text).lower().split("x")
    if len(parts) != 2:
        raise CliError(f'grid must look like "25x25", got {text!r}')
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise CliError(f'grid must look like "25x25", got {text!r}') from None


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


@dataclass
class Settings:
    """Flag/config/default merge for the experiment-driving commands."""

    frames: int | None
    window: int | None
    grid: tuple[int, int] | None
    smoothing_sigma: float
    smoothing_radius: int
    norm_epsilon: float
    epochs: int
    learning_rate: tuple[float, float]
    som_radius: tuple[float | None, float]
    runs: int
    seed: int
    jobs: int
    protocol: str
    windows: list[int] | None
    grids: list[tuple[int, int]] | None
    action_sets: dict | None

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            flags = "/".join(f"--{n}" for n in missing)
            raise CliError(
                f"missing required setting(s): {', '.join(missing)} "
                f"(pass {flags} or put them in a config file)"
            )

    def preprocess_params(self) -> PreprocessParams:
        self.require("frames", "window")
        return PreprocessParams(
            frames=self.frames,
            window=self.window,
            smoothing_sigma=self.smoothing_sigma,
            smoothing_radius=self.smoothing_radius,
            norm_epsilon=self.norm_epsilon,
        )

    def som_params(self, seed: int = 0) -> SomTrainParams:
        return SomTrainParams(
            epochs=self.epochs,
            learning_rate_start=self.learning_rate[0],
            learning_rate_end=self.learning_rate[1],
            radius_start=self.som_radius[0],
            radius_end=self.som_radius[1],
            seed=seed,
        )

    def experiment_config(self) -> ExperimentConfig:
        self.require("frames", "window", "grid")
        return ExperimentConfig(
            preprocess=self.preprocess_params(),
            rows=self.grid[0],
            cols=self.grid[1],
            som=self.som_params(),
            runs=self.runs,
            seed=self.seed,
        )


def _pair(value, name: str, length: int = 2) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise CliError(f"config key {name} must be a list of {length} values, got {value!r}")
    return tuple(value)


def resolve_settings(args, config: dict) -> Settings:
    """Merge defaults < DAM_SEED < config file < flags into one Settings."""

    def pick(name, default=None):
        flag = getattr(args, name, None)
        if flag is not None:
            return flag
        return config.get(name, default)

    grid = pick("grid")
    if grid is not None:
        grid = parse_grid(grid)

    seed = getattr(args, "seed", None)
    if seed is None:
        seed = config.get("seed")
    if seed is None:
        seed = _env_seed()
    if seed is None:
        seed = 0

    lr = _pair(pick("learning_rate", [0.5, 0.01]), "learning_rate")
    radius = _pair(pick("som_radius", [None, 0.5]), "som_radius")

    windows = pick("windows")
    if windows is not None:
        if isinstance(windows, str):
            windows = windows.split(",")
        windows = [int(w) for w in windows]

    grids = pick("grids")
    if grids is not None:
        if isinstance(grids, str):
            grids = grids.split(",")
        grids = [parse_grid(g) for g in grids]

    action_sets = pick("action_sets")
    if isinstance(action_sets, (str, Path)):
        action_sets = load_action_sets(action_sets)
    if action_sets is not None and not isinstance(action_sets, dict):
        raise CliError(f"action_sets must map subset names to class lists, got {action_sets!r}")

    protocol_raw = pick("protocol", CROSS_SUBJECT)
    protocol = _PROTOCOL_ALIASES.get(str(protocol_raw).lower())
    if protocol is None:
        raise CliError(
            f"unknown protocol {protocol_raw!r}; choose from "
            f"{', '.join(sorted(set(_PROTOCOL_ALIASES)))}"
        )

    return Settings(
        frames=pick("frames"),
        window=pick("window"),
        grid=grid,
        smoothing_sigma=float(pick("smoothing_sigma", DEFAULT_SMOOTHING_SIGMA)),
        smoothing_radius=int(pick("smoothing_radius", DEFAULT_SMOOTHING_RADIUS)),
        norm_epsilon=float(pick("norm_epsilon", DEFAULT_NORM_EPSILON)),
        epochs=int(pick("epochs", 20)),
        learning_rate=(float(lr[0]), float(lr[1])),
        som_radius=(None if radius[0] is None else float(radius[0]), float(radius[1])),
        runs=int(pick("runs", 30)),
        seed=int(seed),
        jobs=int(pick("jobs", os.cpu_count() or 1)),
        protocol=protocol,
        windows=windows,
        grids=grids,
        action_sets=action_sets,
    )


def load_action_sets(path) -> dict:
    """Read a subset file: JSON object mapping subset name -> class-label list."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise CliError(f"cannot read action sets {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise CliError(f"action sets {path} is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise CliError(f"action sets {path} must be a JSON object")
    sets = {k: v for k, v in data.items() if not k.startswith("_")}
    for name, labels in sets.items():
        if not isinstance(labels, list) or not labels:
            raise CliError(f"action set {name!r} in {path} must be a non-empty list")
    if not sets:
        raise CliError(f"action sets {path} defines no subsets")
    return sets


# --- Dataset loading ------------------------------------------------------------


def _load_layout(path) -> Msrc12Layout:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise CliError(f"cannot read layout {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise CliError(f"layout {path} is not valid JSON: {e}") from None
    return Msrc12Layout.from_dict(data)


def _load_dataset(directory, fmt: str, layout_path=None, apply_exclusions: bool = True) -> Dataset:
    if fmt == "canonical":
        return load_canonical_dataset(directory, apply_exclusions=apply_exclusions)
    if fmt == "action3d":
        return load_msr_action3d(directory, apply_exclusions=apply_exclusions)
    if fmt == "msrc12":
        layout = _load_layout(layout_path) if layout_path else None
        return load_msrc12(directory, layout=layout, apply_exclusions=apply_exclusions)
    raise CliError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")


# --- Subcommands ------------------------------------------------------------------


def cmd_convert(args) -> int:
    out_dir = Path(args.output)
    try:
        dataset = _load_dataset(
            args.data, args.format, args.layout,
            apply_exclusions=args.apply_exclusions,
        )
    except ValueError as e:
        if str(e).startswith("no "):
            raise CliError(f"no input files: {e}") from None
        raise
    write_canonical_dataset(dataset, out_dir)
    exclude_src = Path(args.data) / EXCLUDE_FILENAME
    if not args.apply_exclusions and exclude_src.is_file():
        shutil.copyfile(exclude_src, out_dir / EXCLUDE_FILENAME)
    print(
        f"wrote {len(dataset)} actions ({len(dataset.class_set)} classes, "
        f"{len(dataset.subject_set)} subjects) to {out_dir}"
    )
    return 0


def cmd_train(args) -> int:
    settings = resolve_settings(args, _load_config(args.config) if args.config else {})
    settings.require("frames", "window", "grid")
    dataset = _load_dataset(args.data, args.format, args.layout)
    params = settings.preprocess_params()
    wdf_sets = [preprocess_action(a, params) for a in dataset]
    rows, cols = settings.grid
    grid = train_som(np.vstack(wdf_sets), rows, cols, settings.som_params(settings.seed))
    model = fit_model(grid, wdf_sets, [a.label for a in dataset], params, dataset.joint_count)
    save_model(model, args.output)
    print(
        f"wrote {args.output}: {rows}x{cols} grid ({rows * cols} units), "
        f"{len(model.classes)} classes, {len(dataset)} actions"
    )
    return 0


def _classify_inputs(paths) -> list[Path]:
    files: list[Path] = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            found = sorted(p for p in path.glob("*.txt") if p.name != EXCLUDE_FILENAME)
            if not found:
                raise CliError(f"no input files: no canonical action files (*.txt) in {path}")
            files.extend(found)
        elif path.is_file():
            files.append(path)
        else:
            raise CliError(f"input not found: {path}")
    return files


def cmd_classify(args) -> int:
    model = load_model(args.model)
    lines = ["id,predicted," + ",".join(f"score_{c}" for c in model.classes)]
    for path in _classify_inputs(args.inputs):
        try:
            action = parse_action_file(path.read_text())
        except ValueError as e:
            raise ValueError(f"{path}: {e}") from None
        posterior = classify_action(model, action)
        scores = ",".join(format(v, ".6g") for v in posterior.normalized())
        lines.append(f"{action.id},{posterior.predicted},{scores}")
    print("\n".join(lines))
    return 0


def _evaluate_once(dataset, settings: Settings, out_dir: Path, suffix: str) -> None:
    cfg = settings.experiment_config()
    if settings.protocol == LOSO:
        agg = evaluate_loso(dataset, cfg, jobs=settings.jobs)
    else:
        agg = cross_validate(dataset, cfg, jobs=settings.jobs)
    write_results_csv(out_dir / f"results{suffix}.csv", agg, cfg)
    write_confusion_csv(out_dir / f"confusion{suffix}.csv", agg)
    write_prob_matrix_csv(out_dir / f"probmatrix{suffix}.csv", agg)
    write_per_subject_csv(out_dir / f"per_subject{suffix}.csv", agg)
    tag = " (exclusions ignored)" if suffix else ""
    print(
        f"{agg.protocol}{tag}: mean accuracy {agg.mean_accuracy:.4f} "
        f"± {agg.std_accuracy:.4f} over {len(agg.run_results)} runs"
    )


def cmd_evaluate(args) -> int:
    settings = resolve_settings(args, _load_config(args.config) if args.config else {})
    settings.require("frames", "window", "grid")
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    has_exclusions = (Path(args.data) / EXCLUDE_FILENAME).is_file()
    mode = args.exclusions or ("both" if has_exclusions else "apply")
    if mode in ("apply", "both"):
        dataset = _load_dataset(args.data, args.format, args.layout, apply_exclusions=True)
        _evaluate_once(dataset, settings, out_dir, "")
    if mode == "ignore":
        dataset = _load_dataset(args.data, args.format, args.layout, apply_exclusions=False)
        _evaluate_once(dataset, settings, out_dir, "")
    elif mode == "both" and has_exclusions:
        dataset = _load_dataset(args.data, args.format, args.layout, apply_exclusions=False)
        _evaluate_once(dataset, settings, out_dir, "_noexcl")
    return 0


def cmd_sweep(args) -> int:
    settings = resolve_settings(args, _load_config(args.config) if args.config else {})
    settings.require("frames", "windows", "grids")
    dataset = _load_dataset(
        args.data, args.format, args.layout,
        apply_exclusions=args.exclusions != "ignore",
    )
    base = dataclasses.replace(settings, window=settings.windows[0], grid=settings.grids[0])
    rows = parameter_sweep(
        dataset,
        base.experiment_config(),
        windows=settings.windows,
        grids=settings.grids,
        action_sets=settings.action_sets,
        jobs=settings.jobs,
    )
    write_sweep_csv(args.output, rows)
    print(f"wrote {args.output} ({len(rows)} rows)")
    return 0


# --- Parser / entry point --------------------------------------------------------


def _add_data_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("data", help="dataset directory")
    p.add_argument("--format", choices=FORMATS, default="canonical",
                   help="input dataset format (default: canonical)")
    p.add_argument("--layout", default=None,
                   help="JSON column-layout file for --format msrc12")


def _add_experiment_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="JSON config file (flags override it)")
    p.add_argument("--frames", type=int, default=None, help="resampled frame count")
    p.add_argument("--window", type=int, default=None, help="direction frames per window")
    p.add_argument("--grid", default=None, help='SOM grid as "ROWSxCOLS", e.g. 25x25')
    p.add_argument("--epochs", type=int, default=None, help="SOM training epochs")
    p.add_argument("--seed", type=int, default=None,
                   help=f"master seed (default: ${SEED_ENV_VAR} or 0)")


def build_parser() -> _Parser:
    parser = _Parser(prog="dam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("convert", help="convert a dataset to canonical action files")
    _add_data_arguments(p)
    p.add_argument("output", help="directory for the canonical files")
    p.add_argument("--apply-exclusions", action="store_true",
                   help="drop excluded actions instead of copying the exclusion list")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("train", help="train a classification model on a whole dataset")
    _add_data_arguments(p)
    _add_experiment_arguments(p)
    p.add_argument("--output", "-o", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify canonical action files with a model")
    p.add_argument("--model", required=True, help="model file from `dam train`")
    p.add_argument("inputs", nargs="+",
                   help="canonical action files and/or directories of them")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="run a cross-validation protocol, write CSV results")
    _add_data_arguments(p)
    _add_experiment_arguments(p)
    p.add_argument("--protocol", default=None,
                   help="cross-subject (random half splits) or loso (leave-one-subject-out)")
    p.add_argument("--runs", type=int, default=None,
                   help="cross-subject repetitions (default 30)")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: all cores)")
    p.add_argument("--exclusions", choices=("apply", "ignore", "both"), default=None,
                   help="exclusion-list handling (default: both when an exclusion "
                        "file is present, else apply)")
    p.add_argument("--output-dir", required=True, help="directory for the CSV files")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="cross-validate every window/grid combination")
    _add_data_arguments(p)
    _add_experiment_arguments(p)
    p.add_argument("--windows", default=None, help="comma-separated window sizes, e.g. 1,3,5")
    p.add_argument("--grids", default=None,
                   help='comma-separated grids, e.g. 10x10,25x25')
    p.add_argument("--action-sets", dest="action_sets", default=None,
                   help="JSON file mapping subset names to class-label lists")
    p.add_argument("--runs", type=int, default=None,
                   help="cross-subject repetitions per combination (default 30)")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: all cores)")
    p.add_argument("--exclusions", choices=("apply", "ignore"), default="apply",
                   help="exclusion-list handling (default: apply)")
    p.add_argument("--output", "-o", required=True, help="sweep CSV file to write")
    p.set_defaults(func=cmd_sweep)

    return parser


def _fail(e: Exception, code: int) -> int:
    message = " ".join(str(e).splitlines()) or e.__class__.__name__
    print(f"error: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as e:
        return _fail(e, 2)
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        return args.func(args)
    except CliError as e:
        return _fail(e, 2)
    except (ValueError, OSError) as e:
        return _fail(e, 1)


if __name__ == "__main__":
    sys.exit(main())
