"""One-level orthonormal 2-D Haar analysis/synthesis and the LL+HH enhancement."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dbel.errors import DimensionError, FormatError

LUMA_PERMILLE = np.array([299, 587, 114], dtype=np.int64)


@dataclass(frozen=True)
class SubbandSet:
    """The four half-resolution subbands of one grayscale image.

    ``LH`` carries horizontal edges (row differences), ``HL`` vertical
    edges (column differences), ``HH`` the diagonal detail.
    """

    LL: np.ndarray
    LH: np.ndarray
    HL: np.ndarray
    HH: np.ndarray

    @property
    def shape(self):
        return self.LL.shape

    def stack(self) -> np.ndarray:
        return np.stack([self.LL, self.LH, self.HL, self.HH])


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """8-bit (h, w) / (h, w, 1) / (h, w, 3) image -> float64 luma in [0, 1]."""
    img = np.asarray(img)
    if img.ndim == 2:
        return img.astype(np.float64) / 255.0
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise FormatError(f"expected 1 or 3 channels, got shape {img.shape}")
    if img.shape[2] == 1:
        return img[:, :, 0].astype(np.float64) / 255.0
    # integer weights keep white at exactly 1.0
    return (img.astype(np.int64) @ LUMA_PERMILLE) / 255000.0


def _pad_even(img: np.ndarray) -> np.ndarray:
    h, w = img.shape
    if h % 2 or w % 2:
        img = np.pad(img, ((0, h % 2), (0, w % 2)), mode="edge")
    return img


def haar_dwt2(img: np.ndarray) -> SubbandSet:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise DimensionError(f"expected a non-empty 2-D image, got shape {img.shape}")
    x = _pad_even(img)
    p00, p01 = x[0::2, 0::2], x[0::2, 1::2]
    p10, p11 = x[1::2, 0::2], x[1::2, 1::2]
    return SubbandSet(
        LL=(p00 + p01 + p10 + p11) / 2,
        LH=(p00 + p01 - p10 - p11) / 2,
        HL=(p00 - p01 + p10 - p11) / 2,
        HH=(p00 - p01 - p10 + p11) / 2,
    )


def haar_idwt2(sub: SubbandSet) -> np.ndarray:
    shapes = {np.shape(b) for b in (sub.LL, sub.LH, sub.HL, sub.HH)}
    if len(shapes) != 1:
        raise DimensionError(f"subband extents disagree: {sorted(shapes)}")
    ll, lh, hl, hh = (np.asarray(b, dtype=np.float64) for b in (sub.LL, sub.LH, sub.HL, sub.HH))
    h, w = ll.shape
    out = np.empty((2 * h, 2 * w))
    out[0::2, 0::2] = (ll + lh + hl + hh) / 2
    out[0::2, 1::2] = (ll + lh - hl - hh) / 2
    out[1::2, 0::2] = (ll - lh + hl - hh) / 2
    out[1::2, 1::2] = (ll - lh - hl + hh) / 2
    return out


def minmax_normalize(x: np.ndarray) -> np.ndarray:
    lo, hi = float(x.min()), float(x.max())
    if hi - lo <= 1e-12 * max(1.0, abs(hi)):
        return np.zeros_like(x, dtype=np.float64)
    return (x - lo) / (hi - lo)


def enhance(img: np.ndarray) -> np.ndarray:
    """Grayscale -> Haar level 1 -> normalized LL + HH at half resolution."""
    sub = haar_dwt2(to_grayscale(img))
    return minmax_normalize(sub.LL + sub.HH)


def enhance_full_resolution(img: np.ndarray) -> np.ndarray:
    """Alternative reading: inverse transform keeping only LL and HH, full size."""
    sub = haar_dwt2(to_grayscale(img))
    zeros = np.zeros_like(sub.LL)
    h, w = np.shape(img)[:2]
    recon = haar_idwt2(SubbandSet(sub.LL, zeros, zeros, sub.HH))[:h, :w]
    return minmax_normalize(recon)
