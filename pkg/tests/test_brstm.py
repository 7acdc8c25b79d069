import numpy as np
import pytest

from dbel.brstm import (
    BRANCHES,
    BrstmConfig,
    build_model,
    evaluate,
    extract_features,
    forward,
    forward_all,
    pretrain_donor,
    stem_forward,
    stm_block_forward,
    tiny_config,
    train,
    transplant_auxiliary,
)
from dbel.errors import ConfigError, DataError, DimensionError, TransplantError
from dbel.nn import Tape, Tensor, float64_mode, softmax_crossentropy
from dbel.synthetic import grating_images
from finite_diff import numeric_grad, rel_error


def small_config(**kw):
    base = dict(input_height=16, input_width=16, stem_width=4, branch_widths=(4, 4, 4),
                squeezed_widths=(4, 4, 4), boosted_widths=(16, 16, 16), reduction_width=8,
                dense_widths=(16, 8, 2), batch_size=16, epochs=3, learning_rate=0.01,
                augment=False)
    base.update(kw)
    return BrstmConfig(**base)


@pytest.fixture(scope="module")
def default_model():
    return build_model(BrstmConfig(), seed=0)


# ---------------------------------------------------------------------- config

def test_default_widths(default_model):
    cfg = default_model.config
    assert cfg.boosted_widths == (128, 256, 512)
    assert all(b == 4 * s for b, s in zip(cfg.boosted_widths, cfg.squeezed_widths))
    assert cfg.num_classes == 2 and cfg.feature_width == 256
    assert default_model["stm3.E.squeeze.w"].shape[0] == 128


def test_table_defaults():
    cfg = BrstmConfig()
    assert (cfg.learning_rate, cfg.momentum, cfg.epochs) == (1e-3, 0.9, 10)


@pytest.mark.parametrize("change", [
    dict(boosted_widths=(128, 256, 500)),
    dict(dense_widths=(512, 256, 3)),
    dict(kernel_size=4),
    dict(input_height=4),
    dict(momentum=1.0),
])
def test_invalid_config(change):
    with pytest.raises(ConfigError):
        BrstmConfig(**change)


def test_config_round_trip():
    cfg = tiny_config(seed=7)
    assert BrstmConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError):
        cfg.replace(bogus=1)


def test_same_seed_bit_identical():
    a, b = build_model(tiny_config(), seed=3), build_model(tiny_config(), seed=3)
    for name in a.params:
        assert np.array_equal(a[name].data, b[name].data)
    c = build_model(tiny_config(), seed=4)
    assert not np.array_equal(a["A.conv.w"].data, c["A.conv.w"].data)


# --------------------------------------------------------------------- forward

def test_stm1_output_shape(default_model):
    x = Tensor(np.random.default_rng(0).random((1, 8, 82, 82)), dtype=np.float32)
    out = stm_block_forward(default_model, x, 1)
    assert out.shape == (1, 128, 41, 41)


def test_stem_preserves_extents(default_model):
    x = Tensor(np.random.default_rng(0).random((1, 1, 82, 82)), dtype=np.float32)
    assert stem_forward(default_model, x).shape == (1, 8, 82, 82)


def test_stm_wrong_channels(default_model):
    with pytest.raises(DimensionError):
        stm_block_forward(default_model, Tensor(np.zeros((1, 3, 16, 16))), 1)


def test_zero_input_zero_output():
    model = build_model(tiny_config(), seed=1)
    x = Tensor(np.zeros((2, 2, 8, 8)), dtype=np.float32)
    np.testing.assert_array_equal(stm_block_forward(model, x, 1).data, 0.0)
    np.testing.assert_array_equal(extract_features(model, np.zeros((3, 8, 8))), 0.0)


def test_branch_order_permutes_channels():
    model = build_model(tiny_config(), seed=2)
    x = Tensor(np.random.default_rng(1).random((2, 2, 8, 8)), dtype=np.float32)
    ref = stm_block_forward(model, x, 1).data
    order = ("D", "B", "E", "C")
    out = stm_block_forward(model, x, 1, order=order).data
    w = model.config.squeezed_widths[0]
    for k, br in enumerate(order):
        j = BRANCHES.index(br)
        np.testing.assert_array_equal(out[:, k * w:(k + 1) * w], ref[:, j * w:(j + 1) * w])


def test_head_contract(default_model):
    x = np.random.default_rng(2).random((3, 82, 82)).astype(np.float32)
    x[2] = x[0]
    logits, feats = forward_all(default_model, x)
    assert logits.shape == (3, 2) and feats.shape == (3, 256)
    assert np.all(np.isfinite(logits.data))
    np.testing.assert_array_equal(logits.data[0], logits.data[2])
    np.testing.assert_array_equal(extract_features(default_model, x), extract_features(default_model, x))


def test_input_shape_checked():
    model = build_model(tiny_config())
    with pytest.raises(DimensionError):
        forward(model, np.zeros((2, 9, 8)))


def test_gradient_reaches_every_parameter(default_model):
    rng = np.random.default_rng(6)
    tape = Tape()
    logits = forward(default_model, rng.random((6, 82, 82)), tape=tape)
    loss, _ = softmax_crossentropy(logits, np.array([0, 1, 0, 1, 1, 0]), tape=tape)
    tape.backward(loss)
    dead = [n for n, p in default_model.params.items() if not np.any(p.grad != 0)]
    for p in default_model.parameters():
        p.zero_grad()
    assert dead == []


def test_end_to_end_gradient_check():
    with float64_mode():
        model = build_model(tiny_config(dropout_rates=(0.0, 0.0)), seed=11)
        rng = np.random.default_rng(12)
        for name, p in model.params.items():
            if name.endswith(".b"):  # move pre-activations off the relu kink at exactly 0
                p.data[...] = rng.uniform(0.05, 0.2, p.shape)
        x = rng.normal(size=(3, 8, 8))
        y = np.array([0, 1, 1])

        def loss_value():
            return float(softmax_crossentropy(forward(model, x), y)[0].data)

        tape = Tape()
        loss, _ = softmax_crossentropy(forward(model, x, tape=tape), y, tape=tape)
        tape.backward(loss)
        analytic = np.concatenate([p.grad.ravel() for p in model.parameters()])
        numeric = np.concatenate([numeric_grad(loss_value, p.data, step=1e-6).ravel()
                                  for p in model.parameters()])
    assert rel_error(analytic, numeric) <= 1e-4


# -------------------------------------------------------------------- training

def test_lr_zero_leaves_parameters():
    cfg = tiny_config(learning_rate=0.0, epochs=3, augment=False, dropout_rates=(0.0, 0.0))
    model = build_model(cfg)
    before = model.snapshot()
    x, y = grating_images(12, 8, 8, seed=1)
    tlog = train(model, (x, y), (x[:4], y[:4]), cfg)
    for name, value in before.items():
        assert np.array_equal(model[name].data, value)
    losses = [s.train_loss for s in tlog.history]
    assert max(losses) - min(losses) <= 1e-6


def test_train_log_header_and_determinism():
    cfg = small_config(epochs=2, augment=True)
    x, y = grating_images(40, 16, 16, seed=2)
    a, b = build_model(cfg), build_model(cfg)
    la = train(a, (x[:32], y[:32]), (x[32:], y[32:]))
    lb = train(b, (x[:32], y[:32]), (x[32:], y[32:]))
    assert la.to_dict() == lb.to_dict()
    assert la.to_dict()["header"]["learning_rate"] == 0.01
    assert 1 <= la.best_epoch <= 2
    for name in a.params:
        assert np.array_equal(a[name].data, b[name].data)


def test_toy_texture_overfit():
    cfg = small_config(epochs=30, learning_rate=0.02)
    x, y = grating_images(200, 16, 16, seed=3)
    model = build_model(cfg)
    tlog = train(model, (x, y), (x[:40], y[:40]))
    acc, _ = evaluate(model, x, y)
    assert acc >= 0.95
    assert len(tlog.history) <= 30


def test_train_rejects_bad_data():
    model = build_model(tiny_config())
    x, y = grating_images(4, 8, 8)
    with pytest.raises(DataError):
        train(model, (x, y[:3]), (x, y))
    with pytest.raises(DataError):
        train(model, (x[:0], y[:0]), (x, y))


@pytest.fixture(scope="module")
def donor():
    x, y = grating_images(80, 16, 16, seed=4)
    return pretrain_donor(x, y, small_config(), seed=0, epochs=6)


def test_donor_shapes_and_loss(donor):
    target = build_model(small_config())
    for name, value in donor.branch_weights().items():
        assert value.shape == target[name].shape
    losses = [s.train_loss for s in donor.log.history]
    assert losses[-1] < losses[0]


def test_donor_deterministic(donor):
    x, y = grating_images(80, 16, 16, seed=4)
    again = pretrain_donor(x, y, small_config(), seed=0, epochs=6)
    for name, value in donor.branch_weights().items():
        assert np.array_equal(value, again.model[name].data)


def test_transplant_and_freeze(donor):
    cfg = small_config(epochs=1)
    model = transplant_auxiliary(build_model(cfg, seed=9), donor)
    aux = set(model.auxiliary_names())
    assert aux == {n for n in model.params if n.split(".")[1] in ("B", "C")}
    for name in aux:
        assert np.array_equal(model[name].data, donor.model[name].data)
        assert model[name].frozen
    before = model.snapshot()
    x, y = grating_images(32, 16, 16, seed=5)
    train(model, (x, y), (x[:8], y[:8]))
    for name in aux:
        assert np.array_equal(model[name].data, before[name])
    for name in model.params:
        if name.split(".")[1] in ("D", "E") and name.endswith(".w"):
            assert not np.array_equal(model[name].data, before[name]), name


def test_transplant_shape_mismatch(donor):
    with pytest.raises(TransplantError):
        transplant_auxiliary(build_model(small_config(branch_widths=(5, 4, 4))), donor)
