"""Adaptive thresholding patterns and threshold-schedule derivation.

The pattern transform generalizes a local binary pattern: instead of
comparing the 8 neighbors of a pixel against the center value, they are
compared against a schedule of K fixed thresholds per subband.  Each
threshold k yields an 8-bit code

    r_k = sum_{i=1..8} [neighbor_i > T_k] * 2^i        (max 510)

over the replicate-padded 3x3 neighborhood, neighbors enumerated in
row-major order with the center excluded, and the pattern value is
R = sum_k r_k (so 0 <= R <= K * 510).

Threshold schedules are tuned from a reference image: after diffusion
and the 3-level decomposition, each subband pixel's 3x3 neighborhood
extrema H (max) and L (min) give

    T_k(x, y) = beta * (H - L) * exp(-(H / (H - L)) * k),   k = 0..K-1,

and the per-pixel schedules are reduced to one scalar schedule per
subband by taking the maximum over pixels.  Pixels with H = L carry no
local range and are skipped; pixels with H < 0 are skipped as well,
since their schedules would grow with k and break the guarantee that
every published schedule decays.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .diffusion import DiffusionParams, diffuse
from .wavelet import ATP_SUBBAND_NAMES, decompose3

__all__ = [
    "BIT_WEIGHTS",
    "DegenerateReferenceError",
    "MAX_CODE",
    "ThresholdTable",
    "atp_transform",
    "default_threshold_table",
    "derive_subband_thresholds",
    "derive_thresholds",
    "local_extrema",
    "neighbor_stack",
    "threshold_schedule",
]

# 3x3 neighborhood offsets in row-major order, center excluded, and the
# bit weight 2^i (i = 1..8) paired with each position.
_NEIGHBOR_OFFSETS = ((0, 0), (0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1), (2, 2))
BIT_WEIGHTS = (2, 4, 8, 16, 32, 64, 128, 256)
MAX_CODE = 510  # sum of BIT_WEIGHTS


class DegenerateReferenceError(Exception):
    """A reference subband has no pixel with usable local range."""


@dataclass(frozen=True)
class ThresholdTable:
    """K thresholds for each of the ten pattern-transform subbands.

    ``thresholds`` maps subband name -> list of K values, every list
    non-increasing in k.  ``beta`` records the scale the table was
    derived with.
    """

    beta: float
    thresholds: dict[str, list[float]] = field(repr=False)

    def __post_init__(self) -> None:
        if not (self.beta > 0):
            raise ValueError(f"beta must be positive, got {self.beta}")
        missing = set(ATP_SUBBAND_NAMES) - set(self.thresholds)
        extra = set(self.thresholds) - set(ATP_SUBBAND_NAMES)
        if missing or extra:
            raise ValueError(
                f"threshold table must cover exactly {ATP_SUBBAND_NAMES}; "
                f"missing {sorted(missing)}, unexpected {sorted(extra)}"
            )
        k = len(next(iter(self.thresholds.values())))
        if k < 1:
            raise ValueError("threshold table needs at least one threshold")
        normalized: dict[str, list[float]] = {}
        for name in ATP_SUBBAND_NAMES:
            values = [float(v) for v in self.thresholds[name]]
            if len(values) != k:
                raise ValueError(
                    f"subband {name!r} has {len(values)} thresholds, expected {k}"
                )
            arr = np.asarray(values)
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError(f"subband {name!r} thresholds must be finite and >= 0")
            if np.any(np.diff(arr) > 0):
                raise ValueError(f"subband {name!r} thresholds must be non-increasing")
            normalized[name] = values
        object.__setattr__(self, "thresholds", normalized)

    @property
    def K(self) -> int:
        return len(self.thresholds[ATP_SUBBAND_NAMES[0]])

    def to_json(self) -> dict:
        return {
            "beta": self.beta,
            "K": self.K,
            "subbands": {name: self.thresholds[name] for name in ATP_SUBBAND_NAMES},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ThresholdTable":
        table = cls(beta=float(doc["beta"]), thresholds=dict(doc["subbands"]))
        if int(doc.get("K", table.K)) != table.K:
            raise ValueError(
                f"declared K = {doc['K']} does not match {table.K} stored thresholds"
            )
        return table

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ThresholdTable":
        return cls.from_json(json.loads(Path(path).read_text()))


def default_threshold_table() -> ThresholdTable:
    """The bundled default table (beta = 2.2, K = 5), tuned on real scans."""
    doc = json.loads(
        resources.files("fpatp").joinpath("data/default_thresholds.json").read_text()
    )
    return ThresholdTable.from_json(doc)


def neighbor_stack(subband: np.ndarray) -> np.ndarray:
    """(8, rows, cols) stack of each pixel's neighbors, replicate-padded."""
    subband = np.asarray(subband, dtype=np.float64)
    rows, cols = subband.shape
    padded = np.pad(subband, 1, mode="edge")
    return np.stack(
        [padded[di : di + rows, dj : dj + cols] for di, dj in _NEIGHBOR_OFFSETS]
    )


def atp_transform(subband: np.ndarray, thresholds) -> np.ndarray:
    """Pattern image of a subband under a threshold schedule.

    Returns an integer array of the subband's shape with values in
    [0, K * 510].  Comparison is strict: a neighbor equal to the
    threshold contributes a zero bit.
    """
    thresholds = np.atleast_1d(np.asarray(thresholds, dtype=np.float64))
    if thresholds.size == 0:
        raise ValueError("threshold list is empty")
    subband = np.asarray(subband, dtype=np.float64)
    if subband.ndim != 2 or min(subband.shape) < 3:
        raise ValueError(f"subband must be at least 3x3, got shape {subband.shape}")
    neighbors = neighbor_stack(subband)
    weights = np.asarray(BIT_WEIGHTS, dtype=np.int64)
    pattern = np.zeros(subband.shape, dtype=np.int64)
    for t in thresholds:
        bits = neighbors > t
        pattern += np.tensordot(weights, bits, axes=(0, 0)).astype(np.int64)
    return pattern


def local_extrema(subband: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel max and min over the replicate-padded 3x3 neighborhood.

    The center pixel participates in both extrema.
    """
    subband = np.asarray(subband, dtype=np.float64)
    rows, cols = subband.shape
    padded = np.pad(subband, 1, mode="edge")
    windows = np.stack(
        [
            padded[di : di + rows, dj : dj + cols]
            for di in range(3)
            for dj in range(3)
        ]
    )
    return windows.max(axis=0), windows.min(axis=0)


def threshold_schedule(t0: float, alpha: float, beta: float, k: int) -> np.ndarray:
    """Decaying schedule beta * t0 * exp(-alpha * [0..k-1])."""
    return beta * t0 * np.exp(-alpha * np.arange(k, dtype=np.float64))


def derive_subband_thresholds(
    subband: np.ndarray, beta: float, k: int, name: str = "subband"
) -> np.ndarray:
    """Max-reduced threshold schedule of one subband.

    Raises :class:`DegenerateReferenceError` when no pixel has a usable
    neighborhood (constant subband, or every neighborhood maximum
    negative).
    """
    if not (beta > 0):
        raise ValueError(f"beta must be positive, got {beta}")
    if k < 1:
        raise ValueError(f"need at least one threshold, got K = {k}")
    high, low = local_extrema(subband)
    t0 = high - low
    usable = (t0 > 0) & (high >= 0)
    if not np.any(usable):
        raise DegenerateReferenceError(
            f"subband {name!r} has no usable pixel (needs positive local range "
            "and a non-negative neighborhood maximum)"
        )
    t0 = t0[usable]
    alpha = high[usable] / t0
    ks = np.arange(k, dtype=np.float64)
    schedules = beta * t0[:, None] * np.exp(-alpha[:, None] * ks[None, :])
    return schedules.max(axis=0)


def derive_thresholds(
    reference: np.ndarray, beta: float, k: int, ad: DiffusionParams
) -> ThresholdTable:
    """Tune a full threshold table from one reference image.

    The reference is diffused, decomposed into three levels, and each of
    the ten pattern subbands contributes one max-reduced schedule.
    """
    bands = decompose3(diffuse(reference, ad))
    thresholds = {
        name: derive_subband_thresholds(sub, beta, k, name=name).tolist()
        for name, sub in bands.atp_inputs().items()
    }
    return ThresholdTable(beta=beta, thresholds=thresholds)
