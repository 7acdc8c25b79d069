"""SGD with (heavy-ball) momentum."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from dbel.errors import ArgumentError
from dbel.nn.tensor import Parameter


@dataclass
class OptimizerState:
    learning_rate: float
    momentum: float = 0.9
    velocity: List[Optional[np.ndarray]] = field(default_factory=list)

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ArgumentError("learning_rate must be non-negative")
        if not 0.0 <= self.momentum < 1.0:
            raise ArgumentError("momentum must lie in [0, 1)")

    @classmethod
    def for_params(cls, params: Sequence[Parameter], learning_rate: float, momentum: float = 0.9):
        state = cls(learning_rate, momentum)
        state.velocity = [None if p.frozen else np.zeros_like(p.data) for p in params]
        return state


def sgd_step(params: Sequence[Parameter], state: OptimizerState) -> None:
    """``v <- momentum * v + grad; p <- p - lr * v``, then zero every gradient.

    Parameters are updated in place. Frozen parameters are skipped.
    """
    if len(state.velocity) != len(params):
        state.velocity = [None if p.frozen else np.zeros_like(p.data) for p in params]
    lr = state.learning_rate
    for k, p in enumerate(params):
        if p.frozen:
            p.zero_grad()
            continue
        v = state.velocity[k]
        if v is None or v.shape != p.data.shape:
            v = np.zeros_like(p.data)
        v *= p.data.dtype.type(state.momentum)
        v += p.grad
        state.velocity[k] = v
        if lr:
            p.data -= p.data.dtype.type(lr) * v
        p.zero_grad()
