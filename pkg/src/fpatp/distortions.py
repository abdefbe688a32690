"""Test-time image distortions: random pixel missing, block missing, AWGN.

All randomness flows through ``numpy.random.default_rng`` (PCG64 seeded
via SeedSequence) from explicit 64-bit seeds, so identical
(image, spec, seed) triples always produce identical output.  Seeds for
sub-streams are derived with splitmix64 mixing; per-image seeds within a
batch are ``seed ^ image_index``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Awgn",
    "BlockMissing",
    "Distortion",
    "PixelMissing",
    "apply_distortion",
    "awgn",
    "block_missing",
    "derive_seed",
    "image_seed",
    "is_seeded",
    "pixel_missing",
    "spec_from_json",
    "spec_to_json",
]

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> int:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *parts: int) -> int:
    """Mix a base seed with integer indices into a new 64-bit seed."""
    state = base & _MASK64
    for part in parts:
        state = _splitmix64(state ^ (part & _MASK64))
    return state


def image_seed(seed: int, index: int) -> int:
    """Per-image seed within a batch."""
    return (seed ^ index) & _MASK64


def pixel_missing(img: np.ndarray, rate: float, seed: int) -> np.ndarray:
    """Zero each pixel independently with probability ``rate``.

    Surviving pixels keep their exact value.
    """
    if not (0.0 <= rate <= 1.0):
        raise ValueError(f"missing rate must be in [0, 1], got {rate}")
    img = np.asarray(img, dtype=np.float64)
    rng = np.random.default_rng(seed)
    keep = rng.random(img.shape) >= rate
    return img * keep


def block_missing(
    img: np.ndarray,
    height: int,
    width: int,
    anchor: str | tuple[int, int] = "centered",
) -> np.ndarray:
    """Zero a height x width rectangle; everything outside is untouched.

    ``anchor`` is either ``"centered"`` (top-left at floor((dims-block)/2))
    or an explicit (row, col) top-left corner.
    """
    img = np.asarray(img, dtype=np.float64)
    rows, cols = img.shape
    if height < 1 or width < 1 or height > rows or width > cols:
        raise ValueError(
            f"block {height}x{width} does not fit inside image {rows}x{cols}"
        )
    if anchor == "centered":
        r0 = (rows - height) // 2
        c0 = (cols - width) // 2
    else:
        r0, c0 = int(anchor[0]), int(anchor[1])
        if r0 < 0 or c0 < 0 or r0 + height > rows or c0 + width > cols:
            raise ValueError(
                f"block {height}x{width} at ({r0}, {c0}) leaves image {rows}x{cols}"
            )
    out = img.copy()
    out[r0 : r0 + height, c0 : c0 + width] = 0.0
    return out


def awgn(img: np.ndarray, snr_db: float, seed: int) -> np.ndarray:
    """Add white Gaussian noise at a target signal-to-noise ratio.

    Signal power is the mean squared pixel value; the noise std is
    sqrt(P_s / 10^(snr_db/10)).  Output is not clipped, values may leave
    [0, 255].
    """
    img = np.asarray(img, dtype=np.float64)
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    signal_power = float(np.mean(img * img))
    if signal_power <= 0.0:
        raise ValueError("cannot set an SNR on an all-zero image")
    noise_std = np.sqrt(signal_power / 10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    return img + noise_std * rng.standard_normal(img.shape)


@dataclass(frozen=True)
class PixelMissing:
    rate: float
    kind = "pixel_missing"


@dataclass(frozen=True)
class BlockMissing:
    height: int
    width: int
    anchor: str | tuple[int, int] = "centered"
    kind = "block_missing"


@dataclass(frozen=True)
class Awgn:
    snr_db: float
    kind = "awgn"


Distortion = PixelMissing | BlockMissing | Awgn


def is_seeded(spec: Distortion) -> bool:
    """Whether the distortion consumes randomness (block missing does not)."""
    return isinstance(spec, (PixelMissing, Awgn))


def apply_distortion(img: np.ndarray, spec: Distortion, seed: int = 0) -> np.ndarray:
    if isinstance(spec, PixelMissing):
        return pixel_missing(img, spec.rate, seed)
    if isinstance(spec, BlockMissing):
        return block_missing(img, spec.height, spec.width, spec.anchor)
    if isinstance(spec, Awgn):
        return awgn(img, spec.snr_db, seed)
    raise TypeError(f"not a distortion spec: {spec!r}")


def spec_to_json(spec: Distortion) -> dict:
    if isinstance(spec, PixelMissing):
        return {"kind": "pixel_missing", "rate": spec.rate}
    if isinstance(spec, BlockMissing):
        anchor = spec.anchor if spec.anchor == "centered" else list(spec.anchor)
        return {
            "kind": "block_missing",
            "height": spec.height,
            "width": spec.width,
            "anchor": anchor,
        }
    if isinstance(spec, Awgn):
        return {"kind": "awgn", "snr_db": spec.snr_db}
    raise TypeError(f"not a distortion spec: {spec!r}")


def spec_from_json(doc: dict) -> Distortion:
    kind = doc.get("kind")
    if kind == "pixel_missing":
        return PixelMissing(rate=float(doc["rate"]))
    if kind == "block_missing":
        anchor = doc.get("anchor", "centered")
        if anchor != "centered":
            anchor = (int(anchor[0]), int(anchor[1]))
        return BlockMissing(height=int(doc["height"]), width=int(doc["width"]), anchor=anchor)
    if kind == "awgn":
        return Awgn(snr_db=float(doc["snr_db"]))
    raise ValueError(f"unknown distortion kind {kind!r}")
