"""Feature extraction: diffusion -> 3-level Haar -> pattern images -> one vector.

The feature vector concatenates thirteen row-major-flattened segments in
a fixed order:

    AD    the diffused image at full resolution
    a1    level-1 approximation, raw
    a2    level-2 approximation, raw
    P1..P10   pattern images of h1, v1, d1, h2, v2, d2, a3, h3, v3, d3

For a square working size S divisible by 8 the total length is
S^2 + (S/2)^2 + (S/4)^2 + 3(S/2)^2 + 3(S/4)^2 + 4(S/8)^2
(21312 for the default 96x96).
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .atp import ThresholdTable, atp_transform
from .diffusion import DiffusionParams, diffuse
from .wavelet import ATP_SUBBAND_NAMES, decompose3

__all__ = [
    "FeatureVector",
    "LayoutMismatchError",
    "SEGMENT_NAMES",
    "Segment",
    "extract_features",
    "extract_matrix",
    "feature_length",
    "load_features_bin",
    "load_features_csv",
    "save_features_bin",
    "save_features_csv",
]

SEGMENT_NAMES = ("AD", "a1", "a2") + tuple(f"P{i}" for i in range(1, 11))

_FEATURES_MAGIC = b"ATPF"


class LayoutMismatchError(Exception):
    """Image or subband dimensions disagree with the configured layout."""


@dataclass(frozen=True)
class Segment:
    name: str
    offset: int
    length: int


@dataclass(frozen=True)
class FeatureVector:
    """Flat feature vector plus the segment layout that tiles it exactly."""

    values: np.ndarray
    layout: tuple[Segment, ...]

    def segment(self, name: str) -> np.ndarray:
        for seg in self.layout:
            if seg.name == name:
                return self.values[seg.offset : seg.offset + seg.length]
        raise KeyError(f"no segment named {name!r}")

    def __len__(self) -> int:
        return self.values.size


def feature_length(rows: int, cols: int | None = None) -> int:
    """Total vector length for a given working size (ceil-halved per level)."""
    if cols is None:
        cols = rows
    r1, c1 = (rows + 1) // 2, (cols + 1) // 2
    r2, c2 = (r1 + 1) // 2, (c1 + 1) // 2
    r3, c3 = (r2 + 1) // 2, (c2 + 1) // 2
    return rows * cols + 4 * r1 * c1 + 4 * r2 * c2 + 4 * r3 * c3


def extract_features(
    img: np.ndarray,
    table: ThresholdTable,
    ad: DiffusionParams,
    working_size: tuple[int, int] | None = None,
) -> FeatureVector:
    """Run the full pipeline on one image.

    ``working_size``, when given, asserts the image dimensions; the
    caller is responsible for resizing beforehand.
    """
    img = np.asarray(img, dtype=np.float64)
    if working_size is not None and img.shape != tuple(working_size):
        raise LayoutMismatchError(
            f"image shape {img.shape} does not match working size {tuple(working_size)}"
        )
    diffused = diffuse(img, ad)
    bands = decompose3(diffused)

    pieces = [("AD", diffused), ("a1", bands.a1), ("a2", bands.a2)]
    for i, name in enumerate(ATP_SUBBAND_NAMES, start=1):
        pattern = atp_transform(bands.band(name), table.thresholds[name])
        pieces.append((f"P{i}", pattern.astype(np.float64)))

    layout = []
    offset = 0
    for seg_name, arr in pieces:
        layout.append(Segment(seg_name, offset, arr.size))
        offset += arr.size
    values = np.concatenate([arr.ravel(order="C") for _, arr in pieces])
    return FeatureVector(values=values, layout=tuple(layout))


def extract_matrix(
    images,
    table: ThresholdTable,
    ad: DiffusionParams,
    working_size: tuple[int, int] | None = None,
) -> np.ndarray:
    """Stack per-image feature vectors into an (n_images, n_features) matrix."""
    rows = [extract_features(img, table, ad, working_size).values for img in images]
    if not rows:
        raise ValueError("no images to extract features from")
    return np.stack(rows)


def save_features_csv(path: str | Path, labels, matrix: np.ndarray) -> None:
    """One row per image: label first, then the feature values."""
    labels = np.asarray(labels)
    matrix = np.asarray(matrix)
    if labels.shape[0] != matrix.shape[0]:
        raise ValueError(
            f"{labels.shape[0]} labels for {matrix.shape[0]} feature rows"
        )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for label, row in zip(labels, matrix):
            writer.writerow([int(label)] + [repr(float(x)) for x in row])


def load_features_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    labels = []
    rows = []
    with open(path, newline="") as fh:
        for record in csv.reader(fh):
            labels.append(int(record[0]))
            rows.append([float(x) for x in record[1:]])
    if not rows:
        raise ValueError(f"{path}: empty feature file")
    return np.asarray(labels, dtype=np.int64), np.asarray(rows, dtype=np.float64)


def save_features_bin(path: str | Path, labels, matrix: np.ndarray) -> None:
    """Binary record: magic 'ATPF', uint32 rows, uint32 cols (little-endian),
    then the labels as doubles, then the matrix row-major as doubles."""
    labels = np.asarray(labels, dtype=np.float64)
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    if labels.shape[0] != matrix.shape[0]:
        raise ValueError(
            f"{labels.shape[0]} labels for {matrix.shape[0]} feature rows"
        )
    with open(path, "wb") as fh:
        fh.write(_FEATURES_MAGIC)
        fh.write(struct.pack("<II", matrix.shape[0], matrix.shape[1]))
        fh.write(labels.astype("<f8").tobytes())
        fh.write(matrix.astype("<f8").tobytes())


def load_features_bin(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    raw = Path(path).read_bytes()
    if raw[:4] != _FEATURES_MAGIC:
        raise ValueError(f"{path}: bad magic, not a feature record file")
    n_rows, n_cols = struct.unpack("<II", raw[4:12])
    expected = 12 + 8 * n_rows + 8 * n_rows * n_cols
    if len(raw) != expected:
        raise ValueError(f"{path}: truncated feature record ({len(raw)} of {expected} bytes)")
    labels = np.frombuffer(raw, dtype="<f8", count=n_rows, offset=12)
    matrix = np.frombuffer(raw, dtype="<f8", count=n_rows * n_cols, offset=12 + 8 * n_rows)
    return labels.astype(np.int64), matrix.reshape(n_rows, n_cols).copy()
