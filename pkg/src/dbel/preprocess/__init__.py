"""Wavelet enhancement, affine augmentation and image I/O."""
from dbel.preprocess.augment import AugmentSpec, augment, random_augment, sample_spec
from dbel.preprocess.imageio import read_image, write_pgm, write_png
from dbel.preprocess.wavelet import (
    SubbandSet,
    enhance,
    enhance_full_resolution,
    haar_dwt2,
    haar_idwt2,
    minmax_normalize,
    to_grayscale,
)

__all__ = [
    "AugmentSpec", "SubbandSet", "augment", "enhance", "enhance_full_resolution",
    "haar_dwt2", "haar_idwt2", "minmax_normalize", "random_augment", "read_image",
    "sample_spec", "to_grayscale", "write_pgm", "write_png",
]
