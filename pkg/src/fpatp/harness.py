"""Experiment orchestration: ingest, train, distorted sweeps, reports.

The protocol keeps training clean: distortions are applied to test
images only, feature standardization statistics come from the training
set only, and every random draw descends from the configured master
seed, so a finished run is byte-reproducible.

Dataset layout on disk::

    root/
      train/ real/*.pgm|bmp|png   fake/...
      test/  real/...             fake/...

Within a split, samples are ordered real-then-fake, lexicographic by
filename inside each class.  Labels are -1 (real) and +1 (fake).
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .atp import ThresholdTable, default_threshold_table, derive_thresholds
from .diffusion import DiffusionParams
from .distortions import (
    Awgn,
    BlockMissing,
    Distortion,
    PixelMissing,
    apply_distortion,
    derive_seed,
    image_seed,
    is_seeded,
    spec_to_json,
)
from .image import load_image, resize_to
from .metrics import ConfusionMatrix, Scores, confusion, format_score, scores
from .pipeline import extract_matrix
from .svm import SvmModel, save_model
from .svm import train as train_svm

__all__ = [
    "CSV_HEADER",
    "EvalReport",
    "ExperimentConfig",
    "IngestError",
    "MissingClassDirectoryError",
    "NoImagesFoundError",
    "ReportRow",
    "config_hash",
    "ingest",
    "load_config",
    "run_experiment",
    "write_report",
]

CSV_HEADER = "kind,param,run,accuracy,precision,recall,f1,tp,tn,fp,fn"

IMAGE_SUFFIXES = (".pgm", ".bmp", ".png")


class MissingClassDirectoryError(Exception):
    """Dataset root lacks a real/ or fake/ subdirectory."""


class NoImagesFoundError(Exception):
    """A class directory contains no loadable image files."""


class IngestError(Exception):
    """One or more files in a dataset failed to load."""


@dataclass
class ExperimentConfig:
    dataset_root: Path
    out_dir: Path
    working_size: tuple[int, int] = (96, 96)
    diffusion: DiffusionParams = field(default_factory=DiffusionParams)
    beta: float = 2.2
    K: int = 5
    threshold_source: dict = field(default_factory=lambda: {"kind": "derive"})
    svm_C: float = 1.0
    svm_tol: float = 1e-3
    svm_max_passes: int | None = None
    svm_kernel: str = "linear"
    svm_gamma: float | None = None
    sweep: list[Distortion] = field(default_factory=list)
    monte_carlo: int = 4
    seed: int = 0
    schema_version: int = 1

    def __post_init__(self) -> None:
        self.dataset_root = Path(self.dataset_root)
        self.out_dir = Path(self.out_dir)
        if isinstance(self.working_size, int):
            self.working_size = (self.working_size, self.working_size)
        self.working_size = (int(self.working_size[0]), int(self.working_size[1]))
        if min(self.working_size) < 8:
            raise ValueError(f"working size {self.working_size} below minimum 8x8")
        kind = self.threshold_source.get("kind")
        if kind not in ("derive", "file", "bundled"):
            raise ValueError(
                f"threshold_source kind must be derive, file, or bundled, got {kind!r}"
            )
        if kind == "file" and "path" not in self.threshold_source:
            raise ValueError("threshold_source kind 'file' requires a 'path'")
        if self.monte_carlo < 1:
            raise ValueError(f"monte_carlo must be >= 1, got {self.monte_carlo}")

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "dataset_root": str(self.dataset_root),
            "out_dir": str(self.out_dir),
            "working_size": list(self.working_size),
            "diffusion": {
                "sigma": self.diffusion.sigma,
                "iterations": self.diffusion.iterations,
                "step": self.diffusion.step,
            },
            "atp": {
                "beta": self.beta,
                "K": self.K,
                "threshold_source": self.threshold_source,
            },
            "svm": {
                "C": self.svm_C,
                "tol": self.svm_tol,
                "max_passes": self.svm_max_passes,
                "kernel": self.svm_kernel,
                "gamma": self.svm_gamma,
            },
            "sweep": [spec_to_json(s) for s in self.sweep],
            "monte_carlo": self.monte_carlo,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        diffusion_doc = doc.get("diffusion", {})
        atp_doc = doc.get("atp", {})
        svm_doc = doc.get("svm", {})
        return cls(
            dataset_root=Path(doc["dataset_root"]),
            out_dir=Path(doc.get("out_dir", "out")),
            working_size=_parse_working_size(doc.get("working_size", 96)),
            diffusion=DiffusionParams(
                sigma=float(diffusion_doc.get("sigma", 40.0)),
                iterations=int(diffusion_doc.get("iterations", 15)),
                step=float(diffusion_doc.get("step", 0.25)),
            ),
            beta=float(atp_doc.get("beta", 2.2)),
            K=int(atp_doc.get("K", 5)),
            threshold_source=dict(atp_doc.get("threshold_source", {"kind": "derive"})),
            svm_C=float(svm_doc.get("C", 1.0)),
            svm_tol=float(svm_doc.get("tol", 1e-3)),
            svm_max_passes=svm_doc.get("max_passes"),
            svm_kernel=svm_doc.get("kernel", "linear"),
            svm_gamma=svm_doc.get("gamma"),
            sweep=_expand_sweep(doc.get("sweep", [])),
            monte_carlo=int(doc.get("monte_carlo", 4)),
            seed=int(doc.get("seed", 0)),
            schema_version=int(doc.get("schema_version", 1)),
        )


def _parse_working_size(value) -> tuple[int, int]:
    if isinstance(value, (list, tuple)):
        return int(value[0]), int(value[1])
    return int(value), int(value)


def _expand_sweep(entries: list[dict]) -> list[Distortion]:
    """Flatten config sweep entries (with parameter grids) into conditions."""
    conditions: list[Distortion] = []
    for entry in entries:
        kind = entry.get("kind")
        if kind == "pixel_missing":
            rates = entry.get("rates", [entry["rate"]] if "rate" in entry else [])
            if not rates:
                raise ValueError("pixel_missing sweep entry has an empty rate grid")
            conditions.extend(PixelMissing(rate=float(r)) for r in rates)
        elif kind == "block_missing":
            sizes = entry.get("sizes", [entry["size"]] if "size" in entry else [])
            if not sizes:
                raise ValueError("block_missing sweep entry has an empty size grid")
            anchor = entry.get("anchor", "centered")
            if anchor != "centered":
                anchor = (int(anchor[0]), int(anchor[1]))
            for size in sizes:
                h, w = (size, size) if isinstance(size, int) else (size[0], size[1])
                conditions.append(BlockMissing(height=int(h), width=int(w), anchor=anchor))
        elif kind == "awgn":
            snrs = entry.get("snr_dbs", [entry["snr_db"]] if "snr_db" in entry else [])
            if not snrs:
                raise ValueError("awgn sweep entry has an empty SNR grid")
            conditions.extend(Awgn(snr_db=float(s)) for s in snrs)
        else:
            raise ValueError(f"unknown sweep kind {kind!r}")
    return conditions


def _condition_param(spec: Distortion) -> str:
    if isinstance(spec, PixelMissing):
        return f"{spec.rate:g}"
    if isinstance(spec, BlockMissing):
        return f"{spec.height}x{spec.width}"
    return f"{spec.snr_db:g}"


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    """Read a config JSON file; relative paths resolve against its directory."""
    path = Path(path)
    doc = json.loads(path.read_text())
    config = ExperimentConfig.from_json(doc)
    base = path.parent
    config.dataset_root = _resolve(base, config.dataset_root)
    config.out_dir = _resolve(base, config.out_dir)
    source = config.threshold_source
    for key in ("reference", "path"):
        if key in source:
            source[key] = str(_resolve(base, Path(source[key])))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "seed":
            config.seed = int(value)
        elif key == "out":
            config.out_dir = Path(value)
        elif key == "working_size":
            config.working_size = _parse_working_size(value)
        else:
            raise ValueError(f"unknown config override {key!r}")
    return config


def _resolve(base: Path, p: Path) -> Path:
    p = Path(p)
    return p if p.is_absolute() else base / p


def config_hash(config: ExperimentConfig, table: ThresholdTable) -> str:
    """Hash of everything that shapes the feature vector.

    A model trained under one hash refuses to score features produced
    under another.
    """
    payload = {
        "schema_version": config.schema_version,
        "working_size": list(config.working_size),
        "diffusion": [config.diffusion.sigma, config.diffusion.iterations, config.diffusion.step],
        "table": table.to_json(),
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("ascii")).hexdigest()


def ingest(
    root: str | Path, working_size: tuple[int, int] = (96, 96)
) -> tuple[list[np.ndarray], np.ndarray, list[str]]:
    """Load a real/-and-fake/ dataset directory, resized to the working size.

    Returns (images, labels, relative paths) with all real samples first,
    lexicographic by filename within each class.  Every unreadable file
    is collected and reported in one :class:`IngestError`.
    """
    root = Path(root)
    images: list[np.ndarray] = []
    labels: list[int] = []
    names: list[str] = []
    failures: list[str] = []
    for cls, label in (("real", -1), ("fake", 1)):
        class_dir = root / cls
        if not class_dir.is_dir():
            raise MissingClassDirectoryError(f"{root}: missing {cls}/ subdirectory")
        files = sorted(
            p for p in class_dir.iterdir()
            if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
        )
        if not files:
            raise NoImagesFoundError(f"{class_dir}: no {'/'.join(IMAGE_SUFFIXES)} files")
        for p in files:
            try:
                img = load_image(p)
            except Exception as exc:
                failures.append(f"{p}: {exc}")
                continue
            images.append(resize_to(img, *working_size))
            labels.append(label)
            names.append(f"{cls}/{p.name}")
    if failures:
        raise IngestError(
            f"{root}: {len(failures)} file(s) failed to load:\n  " + "\n  ".join(failures)
        )
    return images, np.asarray(labels, dtype=np.int64), names


@dataclass(frozen=True)
class ReportRow:
    kind: str
    param: str
    run: int
    cm: ConfusionMatrix
    result: Scores

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "param": self.param,
            "run": self.run,
            "accuracy": self.result.accuracy,
            "precision": self.result.precision,
            "recall": self.result.recall,
            "f1": self.result.f1,
            "tp": self.cm.tp,
            "tn": self.cm.tn,
            "fp": self.cm.fp,
            "fn": self.cm.fn,
        }

    def to_csv(self) -> str:
        return ",".join(
            [
                self.kind,
                self.param,
                str(self.run),
                format_score(self.result.accuracy),
                format_score(self.result.precision),
                format_score(self.result.recall),
                format_score(self.result.f1),
                str(self.cm.tp),
                str(self.cm.tn),
                str(self.cm.fp),
                str(self.cm.fn),
            ]
        )


@dataclass
class EvalReport:
    config: dict
    pipeline_hash: str
    rows: list[ReportRow]
    summaries: list[dict]
    timings: dict
    version: str = __version__

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "pipeline_config_hash": self.pipeline_hash,
            "rows": [row.to_json() for row in self.rows],
            "summaries": self.summaries,
            "timings": self.timings,
        }

    def to_csv(self) -> str:
        lines = [CSV_HEADER] + [row.to_csv() for row in self.rows]
        return "\n".join(lines) + "\n"


def _mean_or_none(values: list[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    return sum(defined) / len(defined) if defined else None


def _summarize(rows: list[ReportRow]) -> list[dict]:
    """Per-condition means over runs (undefined runs are skipped per metric)."""
    out = []
    seen: list[tuple[str, str]] = []
    for row in rows:
        key = (row.kind, row.param)
        if key not in seen:
            seen.append(key)
    for kind, param in seen:
        group = [r for r in rows if (r.kind, r.param) == (kind, param)]
        out.append(
            {
                "kind": kind,
                "param": param,
                "runs": len(group),
                "accuracy": _mean_or_none([r.result.accuracy for r in group]),
                "precision": _mean_or_none([r.result.precision for r in group]),
                "recall": _mean_or_none([r.result.recall for r in group]),
                "f1": _mean_or_none([r.result.f1 for r in group]),
            }
        )
    return out


def _load_thresholds(
    config: ExperimentConfig, train_images: list[np.ndarray], train_labels: np.ndarray
) -> ThresholdTable:
    source = config.threshold_source
    kind = source["kind"]
    if kind == "bundled":
        return default_threshold_table()
    if kind == "file":
        return ThresholdTable.load(source["path"])
    if "reference" in source:
        reference = resize_to(load_image(source["reference"]), *config.working_size)
    else:
        # Default reference: the first real training sample.
        real_idx = int(np.nonzero(train_labels == -1)[0][0])
        reference = train_images[real_idx]
    return derive_thresholds(reference, config.beta, config.K, config.diffusion)


def run_experiment(config: ExperimentConfig) -> EvalReport:
    """Full protocol: thresholds, clean training, distorted evaluation sweep.

    Writes ``report.json``, ``report.csv``, ``thresholds.json``, and
    ``model.json`` into ``config.out_dir`` and returns the report.
    Training images are never distorted; each sweep condition distorts
    the test images only, repeated ``monte_carlo`` times for the seeded
    distortion kinds (block missing is deterministic and runs once).
    """
    timings: dict[str, float] = {}
    t_total = time.perf_counter()

    t0 = time.perf_counter()
    train_images, train_labels, _ = ingest(config.dataset_root / "train", config.working_size)
    test_images, test_labels, _ = ingest(config.dataset_root / "test", config.working_size)
    timings["ingest_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    table = _load_thresholds(config, train_images, train_labels)
    timings["thresholds_s"] = time.perf_counter() - t0
    pipeline_hash = config_hash(config, table)

    t0 = time.perf_counter()
    train_matrix = extract_matrix(train_images, table, config.diffusion, config.working_size)
    timings["train_features_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    model = train_svm(
        train_matrix,
        train_labels,
        C=config.svm_C,
        tol=config.svm_tol,
        max_passes=config.svm_max_passes,
        kernel=config.svm_kernel,
        gamma=config.svm_gamma,
        seed=config.seed,
        config_hash=pipeline_hash,
    )
    timings["train_s"] = time.perf_counter() - t0

    truth = test_labels.tolist()
    rows: list[ReportRow] = []

    def evaluate(images: list[np.ndarray], kind: str, param: str, run: int) -> None:
        matrix = extract_matrix(images, table, config.diffusion, config.working_size)
        pred = model.predict(matrix).tolist()
        cm = confusion(truth, pred)
        rows.append(ReportRow(kind=kind, param=param, run=run, cm=cm, result=scores(cm)))

    t0 = time.perf_counter()
    evaluate(test_images, "clean", "-", 0)
    for cond_index, spec in enumerate(config.sweep, start=1):
        runs = config.monte_carlo if is_seeded(spec) else 1
        for run in range(runs):
            run_seed = derive_seed(config.seed, cond_index, run)
            distorted = [
                apply_distortion(img, spec, image_seed(run_seed, idx))
                for idx, img in enumerate(test_images)
            ]
            evaluate(distorted, spec.kind, _condition_param(spec), run)
    timings["evaluate_s"] = time.perf_counter() - t0
    timings["total_s"] = time.perf_counter() - t_total

    report = EvalReport(
        config=config.to_json(),
        pipeline_hash=pipeline_hash,
        rows=rows,
        summaries=_summarize(rows),
        timings=timings,
    )
    write_report(report, config.out_dir, table=table, model=model)
    return report


def write_report(
    report: EvalReport,
    out_dir: str | Path,
    table: ThresholdTable | None = None,
    model: SvmModel | None = None,
) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "report_json": out_dir / "report.json",
        "report_csv": out_dir / "report.csv",
    }
    paths["report_json"].write_text(json.dumps(report.to_json(), indent=2) + "\n")
    paths["report_csv"].write_text(report.to_csv())
    if table is not None:
        paths["thresholds"] = out_dir / "thresholds.json"
        table.save(paths["thresholds"])
    if model is not None:
        paths["model"] = out_dir / "model.json"
        save_model(paths["model"], model)
    return paths
