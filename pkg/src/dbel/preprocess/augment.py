"""Affine augmentation: reflections, small rotations and shear, bilinear sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import ndimage

from dbel.errors import ArgumentError

MAX_ROTATION_DEG = 5.0
MAX_SHEAR = 0.05


@dataclass(frozen=True)
class AugmentSpec:
    rotation_deg: float = 0.0
    shear: float = 0.0
    reflect_x: bool = False
    reflect_y: bool = False

    def __post_init__(self):
        if not -MAX_ROTATION_DEG <= self.rotation_deg <= MAX_ROTATION_DEG:
            raise ArgumentError(f"rotation {self.rotation_deg} outside +/-{MAX_ROTATION_DEG} degrees")
        if not -MAX_SHEAR <= self.shear <= MAX_SHEAR:
            raise ArgumentError(f"shear {self.shear} outside +/-{MAX_SHEAR}")

    @property
    def is_identity(self) -> bool:
        return not (self.rotation_deg or self.shear or self.reflect_x or self.reflect_y)

    def matrix(self) -> np.ndarray:
        """Forward map on centred (row, col) coordinates: shear @ rotate @ reflect."""
        reflect = np.diag([-1.0 if self.reflect_y else 1.0, -1.0 if self.reflect_x else 1.0])
        t = math.radians(self.rotation_deg)
        c, s = math.cos(t), math.sin(t)
        rotate = np.array([[c, -s], [s, c]])
        shear = np.array([[1.0, 0.0], [self.shear, 1.0]])
        return shear @ rotate @ reflect


def augment(img: np.ndarray, spec: AugmentSpec) -> np.ndarray:
    """Apply ``spec`` as one affine warp about the image centre.

    Samples falling outside the source image read as 0; extents are kept.
    """
    img = np.asarray(img, dtype=np.float64)
    if spec.is_identity:
        return img.copy()
    h, w = img.shape
    centre = np.array([(h - 1) / 2.0, (w - 1) / 2.0])
    inverse = np.linalg.inv(spec.matrix())
    if spec.rotation_deg == 0 and spec.shear == 0:
        inverse = np.round(inverse)  # pure flips: keep integer sampling exact
    offset = centre - inverse @ centre
    return ndimage.affine_transform(img, inverse, offset=offset, order=1, mode="constant", cval=0.0)


def sample_spec(rng: Union[int, np.random.Generator, None]) -> AugmentSpec:
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    rotation = float(gen.uniform(-MAX_ROTATION_DEG, MAX_ROTATION_DEG))
    shear = float(gen.uniform(-MAX_SHEAR, MAX_SHEAR))
    reflect_x, reflect_y = (bool(v) for v in gen.random(2) < 0.5)
    return AugmentSpec(rotation, shear, reflect_x, reflect_y)


def random_augment(img: np.ndarray, rng: Union[int, np.random.Generator, None] = None) -> np.ndarray:
    return augment(img, sample_spec(rng))
