"""Boosted-BR-STM network: stem, three split-transform-merge blocks, reduction, dense head.

Layout of one STM block (input ``x``)::

    for branch in B, C, D, E:
        conv kxk (own dilation, same padding) -> relu -> 1x1 squeeze -> pool 2x2/2
        (B, D: max pool; C, E: average pool)
    output = concat(B, C, D, E)          # boosted width = 4 x squeezed width

B and C are the auxiliary branches; they receive donor weights and are
frozen by :func:`dbel.brstm.training.transplant_auxiliary`.
"""
from __future__ import annotations

from collections import OrderedDict
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from dbel.brstm.config import AUXILIARY_BRANCHES, BRANCHES, BrstmConfig
from dbel.errors import DimensionError
from dbel.nn import (
    Parameter,
    Tape,
    Tensor,
    avgpool2d,
    channel_concat,
    conv2d,
    dense,
    dropout,
    global_avgpool,
    maxpool2d,
    relu,
    softmax,
)

MAX_POOL_BRANCHES = ("B", "D")


class BrstmModel:
    """Named parameter collection plus the input standardization statistics."""

    def __init__(self, config: BrstmConfig, params: "OrderedDict[str, Parameter]", dtype=np.float32):
        self.config = config
        self.params = params
        self.dtype = np.dtype(dtype).type
        self.input_mean = np.zeros(config.input_channels, dtype=self.dtype)
        self.input_std = np.ones(config.input_channels, dtype=self.dtype)

    def __getitem__(self, name: str) -> Parameter:
        return self.params[name]

    def parameters(self) -> List[Parameter]:
        return list(self.params.values())

    def trainable(self) -> List[Parameter]:
        return [p for p in self.params.values() if not p.frozen]

    def branch_names(self, block: int, branch: str) -> List[str]:
        prefix = f"stm{block}.{branch}."
        return [n for n in self.params if n.startswith(prefix)]

    def auxiliary_names(self) -> List[str]:
        return [n for b in (1, 2, 3) for br in AUXILIARY_BRANCHES for n in self.branch_names(b, br)]

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {n: p.data.copy() for n, p in self.params.items()}

    def restore(self, snap: Dict[str, np.ndarray]) -> None:
        for n, value in snap.items():
            self.params[n].data[...] = value

    def set_standardization(self, mean, std) -> None:
        mean = np.asarray(mean, dtype=self.dtype).reshape(self.config.input_channels)
        std = np.asarray(std, dtype=self.dtype).reshape(self.config.input_channels)
        self.input_mean = mean
        self.input_std = np.where(std > 0, std, 1).astype(self.dtype)

    def num_parameters(self) -> int:
        return sum(p.data.size for p in self.params.values())


def _he(rng: np.random.Generator, shape, fan_in: int, dtype) -> np.ndarray:
    return (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(dtype)


def build_model(config: BrstmConfig, seed: Optional[int] = None, dtype=None) -> BrstmModel:
    """Initialize every parameter with He fan-in scaling; deterministic in ``seed``."""
    from dbel.nn import default_dtype

    dtype = dtype or default_dtype()
    rng = np.random.default_rng(config.seed if seed is None else seed)
    params: "OrderedDict[str, Parameter]" = OrderedDict()
    k = config.kernel_size

    def conv(name: str, c_out: int, c_in: int, size: int) -> None:
        params[f"{name}.w"] = Parameter(_he(rng, (c_out, c_in, size, size), c_in * size * size, dtype),
                                        name=f"{name}.w", dtype=dtype)
        params[f"{name}.b"] = Parameter(np.zeros(c_out), name=f"{name}.b", dtype=dtype)

    def fc(name: str, d_in: int, d_out: int) -> None:
        params[f"{name}.w"] = Parameter(_he(rng, (d_in, d_out), d_in, dtype), name=f"{name}.w", dtype=dtype)
        params[f"{name}.b"] = Parameter(np.zeros(d_out), name=f"{name}.b", dtype=dtype)

    conv("A.conv", config.stem_width, config.input_channels, 3)
    width = config.stem_width
    for block in range(3):
        for branch in BRANCHES:
            prefix = f"stm{block + 1}.{branch}"
            conv(f"{prefix}.conv", config.branch_widths[block], width, k)
            conv(f"{prefix}.squeeze", config.squeezed_widths[block], config.branch_widths[block], 1)
        width = config.boosted_widths[block]
    conv("F.conv", config.reduction_width, width, 1)
    d1, d2, d3 = config.dense_widths
    fc("head.fc1", config.reduction_width, d1)
    fc("head.fc2", d1, d2)
    fc("head.fc3", d2, d3)
    return BrstmModel(config, params, dtype)


def stem_forward(model: BrstmModel, x: Tensor, tape: Optional[Tape] = None) -> Tensor:
    """Block A: conv 3x3 -> relu -> extent-preserving 3x3 average smoothing."""
    h = conv2d(x, model["A.conv.w"], model["A.conv.b"], padding=1, tape=tape)
    h = relu(h, tape=tape)
    return avgpool2d(h, window=3, stride=1, padding=1, tape=tape)


def branch_forward(model: BrstmModel, x: Tensor, block: int, branch: str,
                   tape: Optional[Tape] = None) -> Tensor:
    cfg = model.config
    d = cfg.dilations[BRANCHES.index(branch)]
    prefix = f"stm{block}.{branch}"
    pad = d * (cfg.kernel_size - 1) // 2
    h = conv2d(x, model[f"{prefix}.conv.w"], model[f"{prefix}.conv.b"], dilation=d, padding=pad, tape=tape)
    h = relu(h, tape=tape)
    h = conv2d(h, model[f"{prefix}.squeeze.w"], model[f"{prefix}.squeeze.b"], tape=tape)
    if branch in MAX_POOL_BRANCHES:
        return maxpool2d(h, 2, 2, tape=tape)[0]
    return avgpool2d(h, 2, 2, tape=tape)


def stm_block_forward(model: BrstmModel, x: Tensor, block: int, tape: Optional[Tape] = None,
                      order=BRANCHES) -> Tensor:
    """Split-transform-merge block ``block`` (1-based); halves extents."""
    expected = model.config.stem_width if block == 1 else model.config.boosted_widths[block - 2]
    if x.data.ndim != 4 or x.shape[1] != expected:
        raise DimensionError(f"STM block {block} expects {expected} channels, got shape {x.shape}")
    parts = [branch_forward(model, x, block, br, tape=tape) for br in order]
    return channel_concat(parts, tape=tape)


def _as_input(model: BrstmModel, batch) -> Tensor:
    data = batch.data if isinstance(batch, Tensor) else np.asarray(batch)
    cfg = model.config
    if data.ndim == 3:
        data = data[:, None]
    expected = (cfg.input_channels, cfg.input_height, cfg.input_width)
    if data.ndim != 4 or data.shape[1:] != expected:
        raise DimensionError(f"batch shape {data.shape} does not match (n, {expected})")
    mean = model.input_mean.reshape(1, -1, 1, 1)
    std = model.input_std.reshape(1, -1, 1, 1)
    return Tensor((data.astype(model.dtype) - mean) / std, dtype=model.dtype)


def forward_all(
    model: BrstmModel,
    batch,
    training: bool = False,
    rng: Union[int, np.random.Generator, None] = None,
    tape: Optional[Tape] = None,
) -> Tuple[Tensor, Tensor]:
    """Run the network; returns (logits, penultimate features)."""
    cfg = model.config
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    h = stem_forward(model, _as_input(model, batch), tape=tape)
    for block in (1, 2, 3):
        h = stm_block_forward(model, h, block, tape=tape)
    h = relu(conv2d(h, model["F.conv.w"], model["F.conv.b"], tape=tape), tape=tape)
    h = global_avgpool(h, tape=tape)
    h = relu(dense(h, model["head.fc1.w"], model["head.fc1.b"], tape=tape), tape=tape)
    h, _ = dropout(h, cfg.dropout_rates[0], rng=gen, training=training, tape=tape)
    feats = relu(dense(h, model["head.fc2.w"], model["head.fc2.b"], tape=tape), tape=tape)
    h, _ = dropout(feats, cfg.dropout_rates[1], rng=gen, training=training, tape=tape)
    logits = dense(h, model["head.fc3.w"], model["head.fc3.b"], tape=tape)
    return logits, feats


def forward(model: BrstmModel, batch, training: bool = False, rng=None, tape: Optional[Tape] = None) -> Tensor:
    return forward_all(model, batch, training=training, rng=rng, tape=tape)[0]


def _chunks(n: int, size: int) -> Iterator[slice]:
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


def extract_features(model: BrstmModel, batch, chunk: int = 64) -> np.ndarray:
    """Post-relu activations of the penultimate dense layer, inference mode."""
    data = np.asarray(batch.data if isinstance(batch, Tensor) else batch)
    parts = [forward_all(model, data[s])[1].data for s in _chunks(len(data), chunk)]
    if not parts:
        return np.zeros((0, model.config.feature_width), dtype=model.dtype)
    return np.concatenate(parts)


def predict_proba(model: BrstmModel, batch, chunk: int = 64) -> np.ndarray:
    """Softmax class probabilities, inference mode."""
    data = np.asarray(batch.data if isinstance(batch, Tensor) else batch)
    parts = [softmax(forward(model, data[s]).data.astype(np.float64)) for s in _chunks(len(data), chunk)]
    if not parts:
        return np.zeros((0, model.config.num_classes))
    return np.concatenate(parts)
