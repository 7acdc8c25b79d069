"""Seeded synthetic image sets for desk-scale runs.

``cell_images`` mimics thin-smear crops: a stained red cell on a light
background, with dark chromatin dots in the parasitized class and faint
pale stain blotches (artifacts) in either class. ``grating_images`` is the
auxiliary donor task: horizontal vs vertical gratings.
"""
from __future__ import annotations

from typing import Tuple

import numpy as np


def _disc(yy, xx, cy, cx, r, softness=1.5):
    d = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
    return np.clip((r - d) / softness + 0.5, 0.0, 1.0)


def cell_images(n: int, size: int = 164, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Balanced RGB uint8 cells, shape (n, size, size, 3); label 1 = parasitized."""
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % 2
    rng.shuffle(labels)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    images = np.empty((n, size, size, 3), dtype=np.uint8)
    background = np.array([232.0, 226.0, 228.0])
    for k in range(n):
        c = size / 2 + rng.uniform(-0.05, 0.05, 2) * size
        r = size * rng.uniform(0.32, 0.42)
        cell = _disc(yy, xx, c[0], c[1], r, softness=2.5)
        stain = np.array([205.0, 140.0, 155.0]) + rng.normal(0, 6, 3)
        img = background * (1 - cell[..., None]) + stain * cell[..., None]
        if rng.random() < 0.5:  # pale artifact, present in both classes
            a = c + rng.uniform(-0.5, 0.5, 2) * r
            blot = _disc(yy, xx, a[0], a[1], size * rng.uniform(0.06, 0.12), softness=6.0) * 0.35
            img = img * (1 - blot[..., None]) + 245.0 * blot[..., None]
        if labels[k] == 1:
            for _ in range(rng.integers(1, 4)):
                ang, rad = rng.uniform(0, 2 * np.pi), rng.uniform(0, 0.7) * r
                py, px = c[0] + rad * np.sin(ang), c[1] + rad * np.cos(ang)
                dot = _disc(yy, xx, py, px, size * rng.uniform(0.025, 0.045), softness=1.2)
                ring = np.array([95.0, 45.0, 125.0]) + rng.normal(0, 8, 3)
                img = img * (1 - dot[..., None]) + ring * dot[..., None]
        img = img + rng.normal(0, 5.0, img.shape)
        images[k] = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    return images, labels.astype(np.int64)


def grating_images(n: int, height: int, width: int, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Float images in [0, 1], shape (n, height, width); label 1 = vertical stripes."""
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % 2
    rng.shuffle(labels)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    out = np.empty((n, height, width))
    for k in range(n):
        period = rng.uniform(3.0, 10.0)
        phase = rng.uniform(0, 2 * np.pi)
        axis = xx if labels[k] == 1 else yy
        img = 0.5 + 0.35 * np.sin(2 * np.pi * axis / period + phase)
        img += rng.normal(0, 0.08, img.shape)
        out[k] = np.clip(img, 0.0, 1.0)
    return out, labels.astype(np.int64)
