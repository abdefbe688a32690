"""Deterministic synthetic fingerprint-like fixtures.

Real fingerprint forgeries tend to lose fine ridge detail, so the two
synthetic classes are built around exactly that contrast: the "real"
class is an oriented sinusoidal ridge pattern with a smoothly varying
orientation field plus fine additive texture, and the "fake" class runs
the same generator through a Gaussian blur and a contrast compression
toward mid-gray.  Generation is bit-reproducible per seed, which lets
end-to-end experiments run without any licensed fingerprint data.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .distortions import derive_seed
from .image import resize_to, save_image

__all__ = ["SynthSpec", "generate", "write_dataset"]

LABEL_REAL = -1
LABEL_FAKE = 1


@dataclass(frozen=True)
class SynthSpec:
    """Batch description for one class pair.

    Ridge frequency is in cycles per pixel; ``orientation_smoothness``
    is the approximate correlation length (pixels) of the orientation
    field; ``blur_radius`` is the Gaussian sigma applied to the fake
    class, and ``contrast_compression`` scales fake-class contrast
    toward mid-gray (1.0 = untouched).
    """

    count_per_class: int = 10
    rows: int = 96
    cols: int = 96
    seed: int = 0
    freq_min: float = 0.08
    freq_max: float = 0.14
    orientation_smoothness: float = 32.0
    texture_amplitude: float = 12.0
    blur_radius: float = 2.5
    contrast_compression: float = 0.6

    def __post_init__(self) -> None:
        if self.count_per_class < 1:
            raise ValueError(f"count_per_class must be >= 1, got {self.count_per_class}")
        if self.rows < 16 or self.cols < 16:
            raise ValueError(f"size must be at least 16x16, got {self.rows}x{self.cols}")
        if not (0 < self.freq_min <= self.freq_max < 0.5):
            raise ValueError(
                f"frequency band [{self.freq_min}, {self.freq_max}] must sit in (0, 0.5)"
            )
        if self.blur_radius < 0:
            raise ValueError(f"blur_radius must be >= 0, got {self.blur_radius}")
        if not (0 < self.contrast_compression <= 1):
            raise ValueError(
                f"contrast_compression must be in (0, 1], got {self.contrast_compression}"
            )


def _ridge_image(rng: np.random.Generator, spec: SynthSpec) -> np.ndarray:
    rows, cols = spec.rows, spec.cols
    cells = max(2, round(min(rows, cols) / spec.orientation_smoothness) + 1)
    # Smooth orientation field from an upsampled coarse vector field; the
    # half-angle keeps orientations continuous without pi-wrapping seams.
    u = resize_to(rng.standard_normal((cells, cells)), rows, cols)
    v = resize_to(rng.standard_normal((cells, cells)), rows, cols)
    theta = 0.5 * np.arctan2(v, u)

    freq = rng.uniform(spec.freq_min, spec.freq_max)
    phase0 = rng.uniform(0.0, 2.0 * np.pi)
    yy, xx = np.mgrid[0:rows, 0:cols].astype(np.float64)
    phase = 2.0 * np.pi * freq * (xx * np.cos(theta) + yy * np.sin(theta))
    img = 127.5 + 100.0 * np.cos(phase + phase0)
    img += spec.texture_amplitude * rng.standard_normal((rows, cols))
    return np.clip(img, 0.0, 255.0)


def _fake_from(base: np.ndarray, spec: SynthSpec) -> np.ndarray:
    out = base
    if spec.blur_radius > 0:
        out = gaussian_filter(out, sigma=spec.blur_radius, mode="nearest")
    out = 127.5 + (out - 127.5) * spec.contrast_compression
    return np.clip(out, 0.0, 255.0)


def generate(spec: SynthSpec) -> tuple[list[np.ndarray], np.ndarray]:
    """Images and labels for one batch: all real samples, then all fakes.

    Labels are -1 for real and +1 for fake.  Each image draws from its
    own seed derived from (spec.seed, class, index), so batches of
    different sizes share their common prefix.
    """
    images = []
    labels = []
    for index in range(spec.count_per_class):
        rng = np.random.default_rng(derive_seed(spec.seed, 0, index))
        images.append(_ridge_image(rng, spec))
        labels.append(LABEL_REAL)
    for index in range(spec.count_per_class):
        rng = np.random.default_rng(derive_seed(spec.seed, 1, index))
        images.append(_fake_from(_ridge_image(rng, spec), spec))
        labels.append(LABEL_FAKE)
    return images, np.asarray(labels, dtype=np.int64)


def write_dataset(root: str | Path, spec: SynthSpec) -> Path:
    """Write one generated batch as PGM files under ``root/{real,fake}/``."""
    root = Path(root)
    for cls in ("real", "fake"):
        (root / cls).mkdir(parents=True, exist_ok=True)
    images, labels = generate(spec)
    width = len(str(spec.count_per_class - 1))
    counters = {LABEL_REAL: 0, LABEL_FAKE: 0}
    for img, label in zip(images, labels):
        cls = "real" if label == LABEL_REAL else "fake"
        name = f"{cls}_{counters[label]:0{width}d}.pgm"
        save_image(root / cls / name, img)
        counters[label] += 1
    return root
