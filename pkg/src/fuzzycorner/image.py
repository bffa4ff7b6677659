"""Grayscale image type and PGM (netpbm) I/O.

Everything downstream works on 8-bit grayscale. PGM is the native format
(both ASCII "P2" and binary "P5"); PNG reading is optional and needs Pillow.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GrayImage",
    "PgmError",
    "read_pgm",
    "write_pgm",
    "to_gray",
    "load_image",
    "save_pgm",
]

# BT.601 luma weights for RGB -> gray
_LUMA = np.array([0.299, 0.587, 0.114])

_WHITESPACE = b" \t\r\n\x0b\x0c"


class PgmError(ValueError):
    """Raised when a PGM stream cannot be parsed."""


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable width x height grid of 8-bit intensities.

    ``pixels`` is a read-only (height, width) uint8 array; construction
    rejects anything that is not a 2-D integer grid with values in [0, 255].
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2:
            raise ValueError(f"pixels must be a 2-D array, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image dimensions must be >= 1, got {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError(f"pixel values must be integers, got dtype {arr.dtype}")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError(
                f"intensities must lie in [0, 255], got range "
                f"[{arr.min()}, {arr.max()}]"
            )
        arr = arr.astype(np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_flat(cls, width: int, height: int, values) -> "GrayImage":
        """Build from a row-major flat sequence of width*height intensities."""
        flat = np.asarray(values)
        if flat.size != width * height:
            raise ValueError(
                f"expected {width * height} values for {width}x{height}, "
                f"got {flat.size}"
            )
        return cls(flat.reshape(height, width))


def _next_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    """Scan the next header token, skipping whitespace and '#' comments."""
    n = len(buf)
    while pos < n:
        c = buf[pos]
        if c in _WHITESPACE:
            pos += 1
        elif c == ord("#"):
            nl = buf.find(b"\n", pos)
            pos = n if nl < 0 else nl + 1
        else:
            break
    start = pos
    while pos < n and buf[pos] not in _WHITESPACE:
        pos += 1
    return buf[start:pos], pos


def _header_int(buf: bytes, pos: int, field: str) -> tuple[int, int]:
    tok, pos = _next_token(buf, pos)
    if not tok:
        raise PgmError(f"truncated header: missing {field}")
    try:
        value = int(tok)
    except ValueError:
        raise PgmError(f"non-numeric {field}: {tok!r}") from None
    return value, pos


def read_pgm(source) -> GrayImage:
    """Parse a PGM byte stream (bytes or binary file object).

    Accepts magic "P2" (ASCII) or "P5" (binary) with maxval <= 255; '#'
    comments are allowed between header tokens. P2 and P5 encodings of the
    same data produce identical images.
    """
    if isinstance(source, (bytes, bytearray)):
        buf = bytes(source)
    else:
        buf = source.read()

    magic, pos = _next_token(buf, 0)
    if magic not in (b"P2", b"P5"):
        raise PgmError(f"malformed magic: expected P2 or P5, got {magic!r}")
    width, pos = _header_int(buf, pos, "width")
    height, pos = _header_int(buf, pos, "height")
    if width < 1 or height < 1:
        raise PgmError(f"invalid dimensions {width}x{height}")
    maxval, pos = _header_int(buf, pos, "maxval")
    if maxval > 255:
        raise PgmError(f"maxval exceeds 8-bit range: {maxval}")
    if maxval < 1:
        raise PgmError(f"invalid maxval: {maxval}")

    count = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates maxval from the payload
        if pos >= len(buf) or buf[pos] not in _WHITESPACE:
            raise PgmError("truncated pixel data: missing payload")
        pos += 1
        payload = buf[pos : pos + count]
        if len(payload) < count:
            raise PgmError(
                f"truncated pixel data: expected {count} bytes, got {len(payload)}"
            )
        flat = np.frombuffer(payload, dtype=np.uint8).astype(np.int64)
    else:
        flat = np.empty(count, dtype=np.int64)
        for i in range(count):
            tok, pos = _next_token(buf, pos)
            if not tok:
                raise PgmError(
                    f"truncated pixel data: expected {count} values, got {i}"
                )
            try:
                flat[i] = int(tok)
            except ValueError:
                raise PgmError(f"non-numeric pixel value: {tok!r}") from None

    if flat.size and flat.max() > maxval:
        raise PgmError(f"pixel value {flat.max()} exceeds maxval {maxval}")
    if flat.size and flat.min() < 0:
        raise PgmError(f"negative pixel value: {flat.min()}")
    return GrayImage.from_flat(width, height, flat)


def write_pgm(image: GrayImage, format: str = "ascii") -> bytes:
    """Serialize to PGM bytes; maxval is always 255.

    ``format`` is "ascii" (P2) or "binary" (P5). Round-trips through
    :func:`read_pgm` bit-exactly.
    """
    if format == "binary":
        header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
        return header + image.pixels.tobytes()
    if format == "ascii":
        header = f"P2\n{image.width} {image.height}\n255\n"
        rows = "\n".join(" ".join(str(v) for v in row) for row in image.pixels)
        return (header + rows + "\n").encode("ascii")
    raise ValueError(f"format must be 'ascii' or 'binary', got {format!r}")


def to_gray(rgb, width: int, height: int) -> GrayImage:
    """Convert interleaved RGB triplets to gray via BT.601 luma weights.

    gray = round(0.299 R + 0.587 G + 0.114 B), clamped to [0, 255].
    """
    flat = np.asarray(rgb, dtype=np.float64).reshape(-1)
    if flat.size != 3 * width * height:
        raise ValueError(
            f"expected {3 * width * height} RGB values for {width}x{height}, "
            f"got {flat.size}"
        )
    triplets = flat.reshape(height, width, 3)
    gray = np.floor(triplets @ _LUMA + 0.5)
    return GrayImage(np.clip(gray, 0, 255).astype(np.int64))


def _read_png(path: str) -> GrayImage:
    try:
        from PIL import Image as PILImage
    except ImportError:
        raise PgmError(
            f"cannot read {path}: PNG support requires Pillow (pip install Pillow)"
        ) from None
    with PILImage.open(path) as im:
        if im.mode == "L":
            return GrayImage(np.asarray(im, dtype=np.int64))
        rgb = np.asarray(im.convert("RGB"), dtype=np.int64)
    return to_gray(rgb, rgb.shape[1], rgb.shape[0])


def load_image(path) -> GrayImage:
    """Read an image file by extension: .pgm/.pnm natively, .png via Pillow."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".png":
        return _read_png(str(path))
    with open(path, "rb") as fh:
        return read_pgm(fh)


def save_pgm(image: GrayImage, path, format: str = "binary") -> None:
    with open(path, "wb") as fh:
        fh.write(write_pgm(image, format=format))
