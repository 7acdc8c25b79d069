"""Tensor containers, parameters and the reverse-mode tape.

Arrays are plain numpy arrays wrapped in :class:`Tensor` so that ops can
attach gradients. Convolutional activations use NCHW layout; dense
activations are ``(n, d)``.
"""
from __future__ import annotations

import contextlib
from typing import Callable, Iterator, List, Optional

import numpy as np

from dbel.errors import NumericError, StateError

_DTYPE = np.float32


def default_dtype() -> type:
    return _DTYPE


def set_default_dtype(dtype) -> None:
    global _DTYPE
    dtype = np.dtype(dtype).type
    if dtype not in (np.float32, np.float64):
        raise ValueError(f"unsupported dtype {dtype}")
    _DTYPE = dtype


@contextlib.contextmanager
def float64_mode() -> Iterator[None]:
    """Temporarily compute in 64-bit floats (used by gradient checks)."""
    previous = _DTYPE
    set_default_dtype(np.float64)
    try:
        yield
    finally:
        set_default_dtype(previous)


def check_finite(array: np.ndarray, where: str) -> np.ndarray:
    if not np.all(np.isfinite(array)):
        raise NumericError(f"non-finite values produced by {where}")
    return array


class Tensor:
    """An array plus an (optional) accumulated gradient."""

    __slots__ = ("data", "grad", "requires_grad")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        self.data = np.asarray(data, dtype=dtype or _DTYPE)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.data.dtype, copy=True)
        else:
            self.grad += grad

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.dtype})"


class Parameter(Tensor):
    """A trainable tensor. Frozen parameters never receive gradient."""

    __slots__ = ("name", "frozen")

    def __init__(self, value, name: str = "", frozen: bool = False, dtype=None):
        super().__init__(value, requires_grad=True, dtype=dtype)
        self.name = name
        self.frozen = frozen
        self.grad = np.zeros_like(self.data)

    @property
    def trainable(self) -> bool:
        return not self.frozen

    def accumulate(self, grad: np.ndarray) -> None:
        if self.frozen:
            return
        self.grad += grad

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def __repr__(self) -> str:
        flag = ", frozen" if self.frozen else ""
        return f"Parameter({self.name!r}, shape={self.shape}{flag})"


def needs_grad(*tensors: Optional[Tensor]) -> bool:
    """True if any input would receive a gradient."""
    for t in tensors:
        if t is None:
            continue
        if isinstance(t, Parameter):
            if not t.frozen:
                return True
        elif t.requires_grad:
            return True
    return False


class Tape:
    """Ordered record of executed ops; ``backward`` replays them in reverse."""

    def __init__(self):
        self._entries: List[tuple] = []
        self._consumed = False

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def op_names(self) -> List[str]:
        return [name for name, _ in self._entries]

    def record(self, name: str, backward: Callable[[], None]) -> None:
        if self._consumed:
            raise StateError("tape already replayed; start a new tape")
        self._entries.append((name, backward))

    def backward(self, output: Tensor, grad=None) -> None:
        """Seed ``output`` with ``grad`` (ones by default) and back-propagate."""
        if not self._entries:
            raise StateError("backward called without a recorded forward pass")
        if self._consumed:
            raise StateError("tape already replayed")
        seed = np.ones_like(output.data) if grad is None else np.asarray(grad, dtype=output.dtype)
        if seed.shape != output.data.shape:
            seed = np.broadcast_to(seed, output.data.shape)
        output.grad = np.array(seed, dtype=output.dtype, copy=True)
        for _, step in reversed(self._entries):
            step()
        self._consumed = True
        self._entries.clear()
