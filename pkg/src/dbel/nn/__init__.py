"""Minimal deterministic tensor core: ops with reverse-mode gradients and SGD."""
from dbel.nn.ops import (
    avgpool2d,
    channel_concat,
    conv2d,
    dense,
    dropout,
    global_avgpool,
    maxpool2d,
    relu,
    softmax,
    softmax_crossentropy,
)
from dbel.nn.optim import OptimizerState, sgd_step
from dbel.nn.tensor import (
    Parameter,
    Tape,
    Tensor,
    default_dtype,
    float64_mode,
    set_default_dtype,
)

__all__ = [
    "Parameter", "Tape", "Tensor", "OptimizerState",
    "avgpool2d", "channel_concat", "conv2d", "dense", "dropout", "global_avgpool",
    "maxpool2d", "relu", "softmax", "softmax_crossentropy", "sgd_step",
    "default_dtype", "float64_mode", "set_default_dtype",
]
