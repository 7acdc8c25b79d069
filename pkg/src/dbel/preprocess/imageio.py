"""Image file I/O: PNG / PGM / PPM in, 8-bit binary PGM out."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from dbel.errors import FormatError

IMAGE_SUFFIXES = {".png", ".pgm", ".ppm", ".pnm"}


def read_image(path) -> np.ndarray:
    """Return an 8-bit array shaped (h, w) for grayscale or (h, w, 3) for colour."""
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("L", "RGB"):
                pass
            elif im.mode in ("1", "P", "LA"):
                im = im.convert("L" if im.mode != "P" else "RGB")
            elif im.mode == "RGBA":
                im = im.convert("RGB")
            else:
                raise FormatError(f"{path}: unsupported image mode {im.mode}")
            return np.asarray(im, dtype=np.uint8).copy()
    except (UnidentifiedImageError, OSError) as exc:
        raise FormatError(f"{path}: cannot decode image ({exc})") from exc


def to_u8(img: np.ndarray) -> np.ndarray:
    """[0, 1] floats -> round(255 x) as uint8."""
    x = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.floor(255.0 * x + 0.5).astype(np.uint8)


def write_pgm(path, img: np.ndarray) -> None:
    """Write a [0, 1] float image as binary (P5) 8-bit PGM."""
    data = to_u8(img)
    if data.ndim != 2:
        raise FormatError(f"PGM output needs a 2-D image, got {data.shape}")
    h, w = data.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + data.tobytes())


def write_png(path, img_u8: np.ndarray) -> None:
    Image.fromarray(np.asarray(img_u8, dtype=np.uint8)).save(path, format="PNG")
