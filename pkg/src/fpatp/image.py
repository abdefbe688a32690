"""Grayscale image loading, saving, validation, and resizing.

Images are plain 2-D float64 numpy arrays in row-major order with
intensities nominally in [0, 255].  Everything downstream (diffusion,
wavelets, pattern transforms) operates on real values, so pixels are
promoted to float64 at load time and quantized back to 8 bits only on
export.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

__all__ = [
    "CorruptImageError",
    "UnsupportedFormatError",
    "load_image",
    "luma",
    "resize_to",
    "save_image",
    "to_uint8",
    "validate_image",
]

# ITU-R BT.601 luma weights for RGB -> gray.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class UnsupportedFormatError(Exception):
    """File is not an image format or pixel layout this library handles."""


class CorruptImageError(Exception):
    """File looks like a supported format but cannot be decoded."""


def validate_image(img: np.ndarray, min_size: int = 3) -> np.ndarray:
    """Coerce to a 2-D float64 array and check image invariants.

    Raises ValueError for non-2-D input, dimensions below ``min_size``,
    or non-finite values.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale array, got shape {arr.shape}")
    if arr.shape[0] < min_size or arr.shape[1] < min_size:
        raise ValueError(
            f"image dimensions {arr.shape} below minimum {min_size}x{min_size}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains NaN or Inf values")
    return arr


def luma(rgb: np.ndarray) -> np.ndarray:
    """BT.601 luma of an (..., 3) RGB array, in float64."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = LUMA_WEIGHTS
    return r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]


def to_uint8(img: np.ndarray) -> np.ndarray:
    """Quantize a real-valued image to 8 bits: clip to [0, 255], round to nearest."""
    return np.rint(np.clip(img, 0.0, 255.0)).astype(np.uint8)


def _sniff_format(path: Path) -> str:
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head[:2] == b"P5":
        return "pgm"
    if head[:2] == b"BM":
        return "bmp"
    if head == b"\x89PNG\r\n\x1a\n":
        return "png"
    raise UnsupportedFormatError(f"{path}: not a PGM (P5), BMP, or PNG file")


def _read_pgm(path: Path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()

    # Header: magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed; a single whitespace byte ends the header.
    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            return next_token()
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise CorruptImageError(f"{path}: truncated PGM header")
        return data[start:pos]

    magic = next_token()
    if magic != b"P5":
        raise UnsupportedFormatError(f"{path}: unsupported PGM magic {magic!r}")
    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError as exc:
        raise CorruptImageError(f"{path}: malformed PGM header") from exc
    if maxval > 255:
        raise UnsupportedFormatError(f"{path}: 16-bit PGM (maxval {maxval}) not supported")
    if width <= 0 or height <= 0 or maxval <= 0:
        raise CorruptImageError(f"{path}: invalid PGM dimensions {width}x{height}")
    pos += 1  # single whitespace byte after maxval
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise CorruptImageError(
            f"{path}: PGM raster truncated ({len(raster)} of {width * height} bytes)"
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).astype(np.float64)


def _write_pgm(path: Path, img8: np.ndarray) -> None:
    header = f"P5\n{img8.shape[1]} {img8.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(img8.tobytes())


def _read_pillow(path: Path, fmt: str) -> np.ndarray:
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "P":
                im = im.convert("RGB")
                mode = "RGB"
            if mode == "L":
                return np.asarray(im, dtype=np.float64)
            if mode == "RGB":
                return luma(np.asarray(im, dtype=np.float64))
            raise UnsupportedFormatError(
                f"{path}: {fmt.upper()} pixel mode {mode!r} not supported "
                "(expected 8-bit grayscale or RGB)"
            )
    except UnidentifiedImageError as exc:
        raise CorruptImageError(f"{path}: cannot decode {fmt.upper()} data") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImageError(f"{path}: corrupt {fmt.upper()} file ({exc})") from exc


def load_image(path: str | Path) -> np.ndarray:
    """Load an 8-bit grayscale or RGB image as a float64 grayscale array.

    Supports binary PGM (P5), uncompressed BMP (8-bit or 24-bit), and
    8-bit PNG.  RGB input is converted with BT.601 luma.  The decoded
    values lie in [0, 255]; identical file bytes always decode to the
    identical array.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    fmt = _sniff_format(path)
    if fmt == "pgm":
        return _read_pgm(path)
    return _read_pillow(path, fmt)


def save_image(path: str | Path, img: np.ndarray) -> None:
    """Write an image as 8-bit grayscale; format chosen by file suffix.

    ``.pgm`` writes binary P5 with maxval 255; ``.png`` and ``.bmp`` write
    8-bit grayscale via Pillow.  Values are clipped and rounded to [0, 255].
    """
    path = Path(path)
    img8 = to_uint8(validate_image(img, min_size=1))
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        _write_pgm(path, img8)
    elif suffix in (".png", ".bmp"):
        Image.fromarray(img8, mode="L").save(path)
    else:
        raise UnsupportedFormatError(f"{path}: cannot write format {suffix!r}")


def resize_to(img: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Bilinear resize with pixel-center alignment.

    Output pixel centers map to input coordinates
    ``(i + 0.5) * in_dim / out_dim - 0.5``; coordinates beyond the border
    are clamped (edge replication).  Resizing to the input dimensions
    returns a bitwise-equal copy, and output values never leave the input
    value range (every sample is a convex combination of four neighbors).
    """
    img = validate_image(img, min_size=1)
    if rows < 3 or cols < 3:
        raise ValueError(f"target dimensions {rows}x{cols} below minimum 3x3")
    in_rows, in_cols = img.shape

    def axis_coords(n_out: int, n_in: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        x = np.clip(x, 0.0, n_in - 1.0)
        lo = np.floor(x).astype(np.intp)
        hi = np.minimum(lo + 1, n_in - 1)
        return lo, hi, x - lo

    r0, r1, wr = axis_coords(rows, in_rows)
    c0, c1, wc = axis_coords(cols, in_cols)

    # Delta form v0 + w*(v1 - v0) keeps constant regions exact.
    top = img[np.ix_(r0, c0)]
    top = top + wc[None, :] * (img[np.ix_(r0, c1)] - top)
    bot = img[np.ix_(r1, c0)]
    bot = bot + wc[None, :] * (img[np.ix_(r1, c1)] - bot)
    return top + wr[:, None] * (bot - top)
