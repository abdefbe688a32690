"""Orthonormal 2-D Haar decomposition over non-overlapping 2x2 blocks.

For a block [[p00, p01], [p10, p11]] the four coefficients are

    a = (p00 + p01 + p10 + p11) / 2     approximation
    h = (p00 + p01 - p10 - p11) / 2     horizontal detail (row-pair difference)
    v = (p00 - p01 + p10 - p11) / 2     vertical detail (column-pair difference)
    d = (p00 - p01 - p10 + p11) / 2     diagonal detail

The divisor 2 makes the block transform orthonormal, so energy (sum of
squares) is conserved level by level on even-sized inputs.  Odd
dimensions are first padded by replicating the last row/column.

A three-level pyramid re-decomposes the approximation band only:
level 1 from the input, level 2 from ``a1``, level 3 from ``a2``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

__all__ = [
    "ATP_SUBBAND_NAMES",
    "SubbandSet",
    "decompose3",
    "haar_dwt2",
    "haar_idwt2",
    "reconstruct3",
]

# The ten subbands consumed by the pattern transform, in feature order.
# a1 and a2 are carried raw and are not in this list.
ATP_SUBBAND_NAMES = ("h1", "v1", "d1", "h2", "v2", "d2", "a3", "h3", "v3", "d3")


@dataclass(frozen=True)
class SubbandSet:
    """All twelve bands of a 3-level pyramid (a/h/v/d at each level)."""

    a1: np.ndarray
    h1: np.ndarray
    v1: np.ndarray
    d1: np.ndarray
    a2: np.ndarray
    h2: np.ndarray
    v2: np.ndarray
    d2: np.ndarray
    a3: np.ndarray
    h3: np.ndarray
    v3: np.ndarray
    d3: np.ndarray

    def band(self, name: str) -> np.ndarray:
        if name not in {f.name for f in fields(self)}:
            raise KeyError(f"unknown subband {name!r}")
        return getattr(self, name)

    def atp_inputs(self) -> dict[str, np.ndarray]:
        """The ten pattern-transform inputs keyed by name, in feature order."""
        return {name: getattr(self, name) for name in ATP_SUBBAND_NAMES}


def _pad_to_even(img: np.ndarray) -> np.ndarray:
    rows, cols = img.shape
    if rows % 2 == 0 and cols % 2 == 0:
        return img
    return np.pad(img, ((0, rows % 2), (0, cols % 2)), mode="edge")


def haar_dwt2(img: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One Haar level: returns (a, h, v, d), each at ceil-halved size."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 2 or img.shape[1] < 2:
        raise ValueError(f"need at least a 2x2 array, got shape {img.shape}")
    img = _pad_to_even(img)
    p00 = img[0::2, 0::2]
    p01 = img[0::2, 1::2]
    p10 = img[1::2, 0::2]
    p11 = img[1::2, 1::2]
    a = (p00 + p01 + p10 + p11) / 2.0
    h = (p00 + p01 - p10 - p11) / 2.0
    v = (p00 - p01 + p10 - p11) / 2.0
    d = (p00 - p01 - p10 + p11) / 2.0
    return a, h, v, d


def haar_idwt2(
    a: np.ndarray, h: np.ndarray, v: np.ndarray, d: np.ndarray
) -> np.ndarray:
    """Exact inverse of :func:`haar_dwt2` for even-dimension originals."""
    a, h, v, d = (np.asarray(x, dtype=np.float64) for x in (a, h, v, d))
    if not (a.shape == h.shape == v.shape == d.shape):
        raise ValueError(
            f"subband shapes differ: {a.shape}, {h.shape}, {v.shape}, {d.shape}"
        )
    rows, cols = a.shape
    out = np.empty((2 * rows, 2 * cols), dtype=np.float64)
    out[0::2, 0::2] = (a + h + v + d) / 2.0
    out[0::2, 1::2] = (a + h - v - d) / 2.0
    out[1::2, 0::2] = (a - h + v - d) / 2.0
    out[1::2, 1::2] = (a - h - v + d) / 2.0
    return out


def decompose3(img: np.ndarray) -> SubbandSet:
    """Three-level pyramid of an image with dimensions >= 8."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 8 or img.shape[1] < 8:
        raise ValueError(f"need at least an 8x8 array, got shape {img.shape}")
    a1, h1, v1, d1 = haar_dwt2(img)
    a2, h2, v2, d2 = haar_dwt2(a1)
    a3, h3, v3, d3 = haar_dwt2(a2)
    return SubbandSet(a1, h1, v1, d1, a2, h2, v2, d2, a3, h3, v3, d3)


def reconstruct3(bands: SubbandSet) -> np.ndarray:
    """Invert :func:`decompose3`; exact when no odd-dimension padding occurred."""
    a2 = haar_idwt2(bands.a3, bands.h3, bands.v3, bands.d3)
    a2 = a2[: bands.h2.shape[0], : bands.h2.shape[1]]
    a1 = haar_idwt2(a2, bands.h2, bands.v2, bands.d2)
    a1 = a1[: bands.h1.shape[0], : bands.h1.shape[1]]
    return haar_idwt2(a1, bands.h1, bands.v1, bands.d1)
