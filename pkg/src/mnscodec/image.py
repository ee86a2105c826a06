"""Grayscale raster container, binary PGM I/O, and block-level pixel helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_WHITESPACE = b" \t\n\r\x0b\x0c"
_COMMENT = 0x23  # '#'


class PgmFormatError(ValueError):
    """Byte stream that does not parse as a binary 8-bit PGM (P5)."""


@dataclass(frozen=True)
class BlockRect:
    """Axis-aligned square pixel region; (x, y) is the top-left corner."""

    x: int
    y: int
    size: int

    def quadrants(self) -> tuple["BlockRect", "BlockRect", "BlockRect", "BlockRect"]:
        """Four half-size sub-blocks in TL, TR, BL, BR order."""
        h = self.size // 2
        return (
            BlockRect(self.x, self.y, h),
            BlockRect(self.x + h, self.y, h),
            BlockRect(self.x, self.y + h, h),
            BlockRect(self.x + h, self.y + h, h),
        )


class GrayImage:
    """8-bit single-channel raster, immutable after construction."""

    def __init__(self, pixels) -> None:
        arr = np.array(pixels)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D pixel array, got shape {arr.shape}")
        if arr.size == 0:
            raise ValueError("image must contain at least one pixel")
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer):
                raise ValueError("pixel values must be integers in [0, 255]")
            if arr.min() < 0 or arr.max() > 255:
                raise ValueError("pixel values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        self.pixels = arr

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, GrayImage) and np.array_equal(self.pixels, other.pixels)

    def __repr__(self) -> str:
        return f"GrayImage({self.width}x{self.height})"


def _skip_separators(data: bytes, pos: int) -> int:
    # PGM headers allow '#' comments wherever whitespace may appear
    n = len(data)
    while pos < n:
        c = data[pos]
        if c in _WHITESPACE:
            pos += 1
        elif c == _COMMENT:
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    return pos


def _read_header_int(data: bytes, pos: int, field: str) -> tuple[int, int]:
    pos = _skip_separators(data, pos)
    start = pos
    while pos < len(data) and data[pos] not in _WHITESPACE and data[pos] != _COMMENT:
        pos += 1
    token = data[start:pos]
    if not token.isdigit():
        raise PgmFormatError(f"invalid {field}: {token!r}")
    return int(token), pos


def load_pgm(data: bytes) -> GrayImage:
    """Parse a binary PGM (magic P5, maxval 255) byte string."""
    if data[:2] != b"P5":
        raise PgmFormatError(f"bad magic: expected b'P5', got {bytes(data[:2])!r}")
    width, pos = _read_header_int(data, 2, "width")
    height, pos = _read_header_int(data, pos, "height")
    maxval, pos = _read_header_int(data, pos, "maxval")
    if width < 1:
        raise PgmFormatError(f"invalid width: {width}")
    if height < 1:
        raise PgmFormatError(f"invalid height: {height}")
    if maxval != 255:
        raise PgmFormatError(f"unsupported maxval {maxval} (only 255)")
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise PgmFormatError("missing whitespace between maxval and payload")
    pos += 1
    expected = width * height
    payload = data[pos : pos + expected]
    if len(payload) < expected:
        raise PgmFormatError(f"truncated payload: expected {expected} bytes, got {len(payload)}")
    return GrayImage(np.frombuffer(payload, dtype=np.uint8).reshape(height, width))


def save_pgm(image: GrayImage) -> bytes:
    """Serialize as binary PGM; single-space header separators, newline before payload."""
    return b"P5 %d %d 255\n" % (image.width, image.height) + image.pixels.tobytes()


def pad_to_multiple(image: GrayImage, m: int) -> GrayImage:
    """Grow each axis to the next multiple of m by replicating edge pixels."""
    if m < 1:
        raise ValueError("padding multiple must be >= 1")
    new_h = -(-image.height // m) * m
    new_w = -(-image.width // m) * m
    if (new_h, new_w) == (image.height, image.width):
        return image
    padded = np.pad(image.pixels, ((0, new_h - image.height), (0, new_w - image.width)), mode="edge")
    return GrayImage(padded)


def _raster(image) -> np.ndarray:
    """Accept a GrayImage or a bare 2-D array (decoder iterates on float rasters)."""
    return image.pixels if isinstance(image, GrayImage) else np.asarray(image)


def _check_rect(arr: np.ndarray, rect: BlockRect) -> None:
    h, w = arr.shape
    if rect.size < 1 or rect.x < 0 or rect.y < 0 or rect.x + rect.size > w or rect.y + rect.size > h:
        raise ValueError(f"{rect} out of bounds for {w}x{h} raster")


def block_pixels(image, rect: BlockRect) -> np.ndarray:
    """The rect's pixels as a float64 block."""
    arr = _raster(image)
    _check_rect(arr, rect)
    return arr[rect.y : rect.y + rect.size, rect.x : rect.x + rect.size].astype(np.float64)


def block_mean(image, rect: BlockRect) -> float:
    """Arithmetic mean of the rect's pixels, kept in real arithmetic."""
    arr = _raster(image)
    _check_rect(arr, rect)
    return float(arr[rect.y : rect.y + rect.size, rect.x : rect.x + rect.size].mean())


def downsample_mean2(image, rect: BlockRect) -> np.ndarray:
    """Mean-filter the rect by 2x2 groups, halving its side length.

    Output pixel (i, j) is the mean of the 2x2 pixel group whose corner is
    (rect.x + 2j, rect.y + 2i); values stay real.
    """
    arr = _raster(image)
    _check_rect(arr, rect)
    if rect.size % 2:
        raise ValueError(f"rect size {rect.size} must be even")
    a = arr[rect.y : rect.y + rect.size, rect.x : rect.x + rect.size].astype(np.float64)
    return (a[0::2, 0::2] + a[0::2, 1::2] + a[1::2, 0::2] + a[1::2, 1::2]) * 0.25


def co_domain_rect(range_rect: BlockRect, img_w: int, img_h: int) -> BlockRect:
    """Double-size block sharing the range's center, shifted to stay in bounds.

    Clamping translates per axis by the minimum amount; the 2x size is never
    changed.
    """
    if range_rect.size % 2:
        raise ValueError("range size must be even")
    d = range_rect.size * 2
    if d > img_w or d > img_h:
        raise ValueError(f"no {d}x{d} domain fits a {img_w}x{img_h} image")
    x = min(max(range_rect.x - range_rect.size // 2, 0), img_w - d)
    y = min(max(range_rect.y - range_rect.size // 2, 0), img_h - d)
    return BlockRect(x, y, d)
