"""Grayscale image and binary mask containers plus PGM/PNG file I/O.

Images are held as float64 arrays in [0, 1], shape (height, width).
Loading normalizes intensities affinely to span [0, 1]; color input is
reduced first with the Rec. 601 luminance weights.  Masks are uint8
arrays of {0, 1}; on disk they use 0/255.  PGM is the bit-exact fixture
format (binary P5, 8 bit); PNG covers general input.
"""

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

LUMA_WEIGHTS = (0.299, 0.587, 0.114)

MIN_SIDE = 3


@dataclass
class GrayImage:
    """Immutable grayscale image, float64 in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"image must be 2-D, got shape {arr.shape}")
        if min(arr.shape) < MIN_SIDE:
            raise ValueError(
                f"image must be at least {MIN_SIDE}x{MIN_SIDE}, got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("image values must lie in [0, 1]")
        arr.flags.writeable = False
        self.data = arr

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape


@dataclass
class BinaryMask:
    """Immutable binary mask, uint8 in {0, 1}."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
        if arr.size == 0:
            raise ValueError("mask must be non-empty")
        if arr.max(initial=0) > 1:
            raise ValueError("mask values must be 0 or 1")
        arr.flags.writeable = False
        self.data = arr

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape


def normalize(values):
    """Affine rescale to [0, 1]; a constant array maps to all zeros."""
    v = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot normalize non-finite values")
    lo = float(v.min())
    hi = float(v.max())
    if hi == lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def _read_pgm(raw):
    pos = 0

    def token():
        nonlocal pos
        while True:
            while pos < len(raw) and raw[pos : pos + 1].isspace():
                pos += 1
            if pos < len(raw) and raw[pos : pos + 1] == b"#":
                while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            else:
                break
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PGM header")
        return raw[start:pos]

    if token() != b"P5":
        raise ValueError("not a binary PGM (P5) file")
    width = int(token())
    height = int(token())
    maxval = int(token())
    if width <= 0 or height <= 0:
        raise ValueError(f"bad PGM dimensions {width}x{height}")
    if not 0 < maxval < 256:
        raise ValueError(f"only 8-bit PGM supported, maxval={maxval}")
    pos += 1
    pixels = np.frombuffer(raw, dtype=np.uint8, count=width * height, offset=pos)
    if pixels.size != width * height:
        raise ValueError("truncated PGM raster")
    return pixels.reshape(height, width).astype(np.float64), maxval


def _write_pgm(path, pixels):
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(pixels, dtype=np.uint8).tobytes())


def _decode_raw(raw, origin="image data"):
    """Decode PGM or PNG bytes as raw luminance values plus sample maximum."""
    if raw[:2] == b"P5":
        return _read_pgm(raw)
    if raw[:8] == b"\x89PNG\r\n\x1a\n":
        img = Image.open(io.BytesIO(raw))
        if img.mode in ("I", "I;16", "I;16B", "F"):
            raise ValueError(f"only 8-bit PNG supported, mode={img.mode}")
        if img.mode == "P":
            img = img.convert("RGB")
        arr = np.asarray(img, dtype=np.float64)
        if arr.ndim == 3:
            r, g, b = LUMA_WEIGHTS
            arr = r * arr[:, :, 0] + g * arr[:, :, 1] + b * arr[:, :, 2]
        return arr, 255
    raise ValueError(f"unsupported image format in {origin}")


def _read_raw(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    return _decode_raw(raw, origin=str(path))


def decode_image(data):
    """Decode PGM or PNG bytes as a normalized GrayImage."""
    values, _ = _decode_raw(data)
    return GrayImage(normalize(values))


def decode_mask(data):
    """Decode PGM or PNG bytes as a BinaryMask (foreground where > half)."""
    values, maxval = _decode_raw(data)
    return BinaryMask((values / maxval > 0.5).astype(np.uint8))


def load_image(path):
    """Load a PGM or PNG file as a normalized GrayImage."""
    values, _ = _read_raw(path)
    return GrayImage(normalize(values))


def load_mask(path):
    """Load a PGM or PNG file as a BinaryMask (foreground where > half)."""
    values, maxval = _read_raw(path)
    return BinaryMask((values / maxval > 0.5).astype(np.uint8))


def encode_image_png(image):
    """Encode a GrayImage as 8-bit grayscale PNG bytes."""
    pixels = np.rint(image.data * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(pixels, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def save_image(image, path):
    """Write a GrayImage as 8-bit PGM or PNG, chosen by file extension."""
    pixels = np.rint(image.data * 255.0).astype(np.uint8)
    _save_pixels(pixels, path)


def save_mask(mask, path):
    """Write a BinaryMask as 8-bit PGM or PNG with values 0/255."""
    _save_pixels(mask.data * np.uint8(255), path)


def _save_pixels(pixels, path):
    name = str(path).lower()
    if name.endswith(".pgm"):
        _write_pgm(path, pixels)
    elif name.endswith(".png"):
        Image.fromarray(pixels, mode="L").save(path, format="PNG")
    else:
        raise ValueError(f"unsupported output extension for {path}")
