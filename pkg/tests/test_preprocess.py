import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbel.errors import ArgumentError, DimensionError, FormatError
from dbel.preprocess import (
    AugmentSpec,
    SubbandSet,
    augment,
    enhance,
    enhance_full_resolution,
    haar_dwt2,
    haar_idwt2,
    random_augment,
    read_image,
    sample_spec,
    to_grayscale,
    write_pgm,
    write_png,
)


def test_grayscale_examples():
    assert np.all(to_grayscale(np.zeros((2, 2, 3), np.uint8)) == 0)
    assert to_grayscale(np.full((1, 1, 3), 255, np.uint8))[0, 0] == 1.0
    assert to_grayscale(np.array([[[255, 0, 0]]], np.uint8))[0, 0] == pytest.approx(0.299)
    assert to_grayscale(np.array([[51]], np.uint8))[0, 0] == pytest.approx(0.2)


def test_grayscale_bad_channels():
    with pytest.raises(FormatError):
        to_grayscale(np.zeros((2, 2, 4), np.uint8))


def test_dwt_hand_block():
    sub = haar_dwt2(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert (sub.LL.item(), sub.HL.item(), sub.LH.item(), sub.HH.item()) == (5.0, -1.0, -2.0, 0.0)


def test_dwt_constant_image():
    sub = haar_dwt2(np.full((6, 4), 0.3))
    np.testing.assert_allclose(sub.LL, 0.6)
    for band in (sub.LH, sub.HL, sub.HH):
        assert np.all(band == 0)


def test_dwt_odd_extents_edge_padded():
    img = np.arange(15.0).reshape(3, 5)
    sub = haar_dwt2(img)
    assert sub.shape == (2, 3)
    padded = np.pad(img, ((0, 1), (0, 1)), mode="edge")
    np.testing.assert_allclose(haar_idwt2(sub), padded)


def test_dwt_energy_random_8x8():
    x = np.random.default_rng(0).random((8, 8))
    sub = haar_dwt2(x)
    assert np.sum(sub.stack() ** 2) == pytest.approx(np.sum(x ** 2), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2 ** 31))
def test_perfect_reconstruction_property(hh, ww, seed):
    x = np.random.default_rng(seed).random((2 * hh, 2 * ww))
    sub = haar_dwt2(x)
    assert np.max(np.abs(haar_idwt2(sub) - x)) <= 1e-6
    assert abs(np.sum(sub.stack() ** 2) - np.sum(x ** 2)) <= 1e-5


def test_reconstruction_164():
    x = np.random.default_rng(1).random((164, 164))
    assert np.max(np.abs(haar_idwt2(haar_dwt2(x)) - x)) <= 1e-6


def test_idwt_examples():
    c = 0.7
    const = haar_idwt2(SubbandSet(np.full((2, 2), 2 * c), np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2))))
    np.testing.assert_allclose(const, c)
    z = np.zeros((1, 1))
    np.testing.assert_array_equal(haar_idwt2(SubbandSet(z, z, z, np.ones((1, 1)))), [[0.5, -0.5], [-0.5, 0.5]])


def test_idwt_extent_mismatch():
    with pytest.raises(DimensionError):
        haar_idwt2(SubbandSet(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2))))


def test_enhance_shape_and_range():
    img = np.random.default_rng(2).integers(0, 256, (164, 164, 3), dtype=np.uint8)
    out = enhance(img)
    assert out.shape == (82, 82)
    assert out.min() == 0.0 and out.max() == 1.0


def test_enhance_odd_input_half_extent():
    img = np.random.default_rng(3).integers(0, 256, (11, 9, 3), dtype=np.uint8)
    assert enhance(img).shape == (6, 5)


def test_enhance_constant_image_is_zero():
    assert np.all(enhance(np.full((10, 10, 3), 77, np.uint8)) == 0)


def test_enhance_checkerboard():
    board = (np.indices((8, 8)).sum(axis=0) % 2 * 255).astype(np.uint8)
    sub = haar_dwt2(to_grayscale(board))
    # every 2x2 block is [[0,1],[1,0]]: LL = 1 everywhere, |HH| = 1 (its maximum for [0,1] data)
    np.testing.assert_allclose(sub.LL, 1.0)
    np.testing.assert_allclose(np.abs(sub.HH), 1.0)
    board[:4] = 255 - board[:4]  # phase flip in top half changes sign of HH
    out = enhance(board)
    assert out.shape == (4, 4)
    assert out.max() > out.min()


def test_enhance_full_resolution_reading():
    img = np.random.default_rng(4).integers(0, 256, (16, 16, 3), dtype=np.uint8)
    out = enhance_full_resolution(img)
    assert out.shape == (16, 16)
    assert 0.0 <= out.min() and out.max() <= 1.0


# ----------------------------------------------------------------- augmentation

def test_augment_identity_bit_exact():
    x = np.random.default_rng(5).random((9, 7))
    assert np.array_equal(augment(x, AugmentSpec()), x)


def test_augment_x_reflection():
    out = augment(np.array([[1.0, 2.0], [3.0, 4.0]]), AugmentSpec(reflect_x=True))
    np.testing.assert_array_equal(out, [[2.0, 1.0], [4.0, 3.0]])
    out = augment(np.array([[1.0, 2.0], [3.0, 4.0]]), AugmentSpec(reflect_y=True))
    np.testing.assert_array_equal(out, [[3.0, 4.0], [1.0, 2.0]])


def test_rotation_round_trip_smooth_image():
    yy, xx = np.mgrid[0:41, 0:41] / 40.0
    img = 0.5 * (yy + xx)
    back = augment(augment(img, AugmentSpec(rotation_deg=5.0)), AugmentSpec(rotation_deg=-5.0))
    assert np.mean(np.abs(back - img)) <= 0.05


def test_augment_keeps_extents():
    x = np.random.default_rng(6).random((13, 17))
    out = augment(x, AugmentSpec(3.0, -0.04, True, False))
    assert out.shape == x.shape


@pytest.mark.parametrize("kwargs", [{"rotation_deg": 5.5}, {"shear": -0.06}, {"rotation_deg": -10}])
def test_augment_spec_range(kwargs):
    with pytest.raises(ArgumentError):
        AugmentSpec(**kwargs)


def test_random_augment_deterministic():
    x = np.random.default_rng(7).random((20, 20))
    assert np.array_equal(random_augment(x, 11), random_augment(x, 11))


def test_sampled_specs_within_table_ranges():
    rng = np.random.default_rng(8)
    specs = [sample_spec(rng) for _ in range(10_000)]
    rot = np.array([s.rotation_deg for s in specs])
    shear = np.array([s.shear for s in specs])
    assert rot.min() >= -5 and rot.max() <= 5
    assert shear.min() >= -0.05 and shear.max() <= 0.05
    flips = np.mean([s.reflect_x for s in specs])
    assert 0.45 < flips < 0.55


# -------------------------------------------------------------------------- io

def test_pgm_roundtrip(tmp_path):
    img = np.random.default_rng(9).random((5, 7))
    path = tmp_path / "x.pgm"
    write_pgm(path, img)
    assert path.read_bytes().startswith(b"P5\n7 5\n255\n")
    back = read_image(path)
    np.testing.assert_array_equal(back, np.floor(255 * img + 0.5).astype(np.uint8))


def test_png_read_rgb(tmp_path):
    img = np.random.default_rng(10).integers(0, 256, (4, 6, 3), dtype=np.uint8)
    write_png(tmp_path / "a.png", img)
    np.testing.assert_array_equal(read_image(tmp_path / "a.png"), img)


def test_read_garbage(tmp_path):
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not an image")
    with pytest.raises(FormatError):
        read_image(bad)
