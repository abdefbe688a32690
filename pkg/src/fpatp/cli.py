"""Command-line front end.

Subcommands: derive-thresholds, extract, train, evaluate, sweep, synth.
Every subcommand reads an experiment config JSON (``--config``) where it
needs one, with ``--seed``, ``--out``, and ``--working-size`` overriding
the file.  Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .atp import DegenerateReferenceError, ThresholdTable, derive_thresholds
from .harness import (
    ExperimentConfig,
    IngestError,
    MissingClassDirectoryError,
    NoImagesFoundError,
    config_hash,
    ingest,
    load_config,
    run_experiment,
)
from .image import CorruptImageError, UnsupportedFormatError, load_image, resize_to
from .pipeline import extract_matrix, save_features_bin, save_features_csv
from .svm import save_model
from .svm import train as train_svm
from .synth import SynthSpec, write_dataset

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_DATA_ERRORS = (
    FileNotFoundError,
    NotADirectoryError,
    UnsupportedFormatError,
    CorruptImageError,
    DegenerateReferenceError,
    MissingClassDirectoryError,
    NoImagesFoundError,
    IngestError,
    json.JSONDecodeError,
    KeyError,
    ValueError,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1 instead of 2."""

    def error(self, message: str):
        raise _UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="fpatp",
        description="Fingerprint forgery detection pipeline and robustness harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: _Parser) -> None:
        p.add_argument("--config", type=Path, help="experiment config JSON")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", type=Path, help="override the output location")
        p.add_argument(
            "--working-size", type=int, dest="working_size",
            help="override the square working size in pixels",
        )

    p = sub.add_parser("derive-thresholds", help="tune a threshold table from a reference image")
    add_common(p)
    p.add_argument("--reference", type=Path, help="reference image (overrides config)")

    p = sub.add_parser("extract", help="extract feature vectors for a dataset split")
    add_common(p)
    p.add_argument("--split", default="train", choices=("train", "test"),
                   help="which dataset split to extract (default train)")

    p = sub.add_parser("train", help="train the classifier on the train split")
    add_common(p)

    p = sub.add_parser("evaluate", help="clean-test evaluation (no distortions)")
    add_common(p)

    p = sub.add_parser("sweep", help="full distortion sweep from the config")
    add_common(p)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    add_common(p)
    p.add_argument("--train-per-class", type=int, default=10)
    p.add_argument("--test-per-class", type=int, default=10)

    return parser


def _overrides(args: argparse.Namespace) -> dict:
    return {
        "seed": getattr(args, "seed", None),
        "out": getattr(args, "out", None),
        "working_size": getattr(args, "working_size", None),
    }


def _require_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is None:
        raise _UsageError("fpatp: --config is required for this command")
    return load_config(args.config, _overrides(args))


def _prepare(config: ExperimentConfig):
    """Shared front half: ingest train split, resolve thresholds, hash."""
    from .harness import _load_thresholds

    train_images, train_labels, names = ingest(
        config.dataset_root / "train", config.working_size
    )
    table = _load_thresholds(config, train_images, train_labels)
    return train_images, train_labels, names, table, config_hash(config, table)


def _cmd_derive_thresholds(args: argparse.Namespace) -> int:
    if args.config is not None:
        config = load_config(args.config, _overrides(args))
    elif args.reference is not None:
        config = ExperimentConfig(dataset_root=Path("."), out_dir=args.out or Path("."))
        if args.seed is not None:
            config.seed = args.seed
        if args.working_size is not None:
            config.working_size = (args.working_size, args.working_size)
    else:
        raise _UsageError("fpatp derive-thresholds: need --config or --reference")
    if args.reference is not None:
        reference = resize_to(load_image(args.reference), *config.working_size)
        table = derive_thresholds(reference, config.beta, config.K, config.diffusion)
    else:
        _, _, _, table, _ = _prepare(config)
    out_dir = Path(args.out) if args.out else config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "thresholds.json"
    table.save(out_path)
    print(f"wrote {out_path}")
    return EXIT_OK


def _cmd_extract(args: argparse.Namespace) -> int:
    config = _require_config(args)
    _, _, _, table, _ = _prepare(config)
    images, labels, _ = ingest(config.dataset_root / args.split, config.working_size)
    matrix = extract_matrix(images, table, config.diffusion, config.working_size)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = config.out_dir / f"features_{args.split}.csv"
    bin_path = config.out_dir / f"features_{args.split}.bin"
    save_features_csv(csv_path, labels, matrix)
    save_features_bin(bin_path, labels, matrix)
    print(f"wrote {csv_path} and {bin_path} ({matrix.shape[0]} x {matrix.shape[1]})")
    return EXIT_OK


def _cmd_train(args: argparse.Namespace) -> int:
    config = _require_config(args)
    train_images, train_labels, _, table, pipeline_hash = _prepare(config)
    matrix = extract_matrix(train_images, table, config.diffusion, config.working_size)
    model = train_svm(
        matrix,
        train_labels,
        C=config.svm_C,
        tol=config.svm_tol,
        max_passes=config.svm_max_passes,
        kernel=config.svm_kernel,
        gamma=config.svm_gamma,
        seed=config.seed,
        config_hash=pipeline_hash,
    )
    config.out_dir.mkdir(parents=True, exist_ok=True)
    model_path = config.out_dir / "model.json"
    save_model(model_path, model)
    table.save(config.out_dir / "thresholds.json")
    print(f"wrote {model_path} (KKT residual {model.kkt_residual:.2e})")
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config = _require_config(args)
    config.sweep = []
    report = run_experiment(config)
    _print_report(report)
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _require_config(args)
    report = run_experiment(config)
    _print_report(report)
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    if args.out is None:
        raise _UsageError("fpatp synth: --out is required")
    seed = args.seed if args.seed is not None else 0
    size = args.working_size if args.working_size is not None else 96
    root = Path(args.out)
    write_dataset(
        root / "train",
        SynthSpec(count_per_class=args.train_per_class, rows=size, cols=size, seed=seed),
    )
    write_dataset(
        root / "test",
        SynthSpec(
            count_per_class=args.test_per_class, rows=size, cols=size, seed=seed + 1
        ),
    )
    n_total = 2 * (args.train_per_class + args.test_per_class)
    print(f"wrote {n_total} images under {root}")
    return EXIT_OK


def _print_report(report) -> None:
    from .metrics import format_score

    print("kind      param    runs  accuracy  precision  recall  f1")
    for row in report.summaries:
        print(
            f"{row['kind']:<9} {row['param']:<8} {row['runs']:<5} "
            f"{format_score(row['accuracy']):<9} {format_score(row['precision']):<10} "
            f"{format_score(row['recall']):<7} {format_score(row['f1'])}"
        )


_HANDLERS = {
    "derive-thresholds": _cmd_derive_thresholds,
    "extract": _cmd_extract,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
    "synth": _cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help exits 0 through here
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return _HANDLERS[args.command](args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except _DATA_ERRORS as exc:
        print(f"fpatp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
