"""Differentiable operators.

Each op takes :class:`Tensor` inputs and an optional :class:`Tape`. When a
tape is given and some input needs a gradient, the op records a closure
that pushes the output gradient back to its inputs.
"""
from __future__ import annotations

from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from dbel.errors import ArgumentError, DimensionError
from dbel.nn.tensor import Parameter, Tape, Tensor, check_finite, needs_grad


def _out_extent(size: int, k: int, stride: int, dilation: int, padding: int) -> int:
    span = (k - 1) * dilation + 1
    return (size + 2 * padding - span) // stride + 1


def _tap_slice(offset: int, count: int, stride: int) -> slice:
    return slice(offset, offset + stride * (count - 1) + 1, stride)


def _require_rank4(x: Tensor, op: str) -> None:
    if x.data.ndim != 4:
        raise DimensionError(f"{op} expects an (n, c, h, w) tensor, got shape {x.shape}")


def conv2d(
    x: Tensor,
    kernel: Parameter,
    bias: Optional[Parameter] = None,
    stride: int = 1,
    dilation: int = 1,
    padding: int = 0,
    tape: Optional[Tape] = None,
) -> Tensor:
    """Zero-padded, dilated 2-D cross-correlation (no kernel flip)."""
    if stride < 1 or dilation < 1:
        raise ArgumentError("stride and dilation must be positive")
    if padding < 0:
        raise ArgumentError("padding must be non-negative")
    _require_rank4(x, "conv2d")
    if kernel.data.ndim != 4:
        raise DimensionError(f"kernel must be (c_out, c_in, kh, kw), got {kernel.shape}")
    n, c_in, h, w = x.shape
    c_out, k_in, kh, kw = kernel.shape
    if k_in != c_in:
        raise DimensionError(f"kernel expects {k_in} input channels, input has {c_in}")
    if bias is not None and bias.shape != (c_out,):
        raise DimensionError(f"bias shape {bias.shape} does not match {c_out} output channels")
    if (kh - 1) * dilation + 1 > h + 2 * padding or (kw - 1) * dilation + 1 > w + 2 * padding:
        raise DimensionError("effective kernel extent exceeds padded input")

    ho = _out_extent(h, kh, stride, dilation, padding)
    wo = _out_extent(w, kw, stride, dilation, padding)
    # Channel-major layout. One GEMM of the stacked tap weights against the whole
    # padded input, then each tap's response is shifted into place:
    #   out[o, n, r, c] = sum_ij Y[i, j, o, n, r*s + i*d, c*s + j*d]
    # Only c_out-wide arrays are sliced, never the (wider) input.
    xc = x.data.transpose(1, 0, 2, 3)
    if padding:
        xc = np.pad(xc, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    else:
        xc = np.ascontiguousarray(xc)
    hp, wp = xc.shape[2], xc.shape[3]
    xflat = xc.reshape(c_in, n * hp * wp)
    wk = kernel.data
    wstack = np.ascontiguousarray(wk.transpose(2, 3, 0, 1)).reshape(kh * kw * c_out, c_in)
    windows = [(i, j, _tap_slice(i * dilation, ho, stride), _tap_slice(j * dilation, wo, stride))
               for i in range(kh) for j in range(kw)]

    responses = (wstack @ xflat).reshape(kh, kw, c_out, n, hp, wp)
    out = None
    for i, j, rows, cols in windows:
        term = responses[i, j][:, :, rows, cols]
        out = term.copy() if out is None else out.__iadd__(term)
    del responses
    if bias is not None:
        out += bias.data[:, None, None, None]
    # the result is an (n, c, h, w) view of channel-major memory
    out = out.transpose(1, 0, 2, 3)
    result = Tensor(check_finite(out, "conv2d"), requires_grad=needs_grad(x, kernel, bias))

    if tape is not None and result.requires_grad:

        def backward() -> None:
            g = result.grad
            if g is None:
                return
            gc = g.transpose(1, 0, 2, 3)
            if bias is not None and not bias.frozen:
                bias.accumulate(gc.sum(axis=(1, 2, 3)))
            want_x = x.requires_grad
            want_k = not kernel.frozen
            if not (want_x or want_k):
                return
            shifted = np.zeros((kh, kw, c_out, n, hp, wp), dtype=g.dtype)
            for i, j, rows, cols in windows:
                shifted[i, j][:, :, rows, cols] = gc
            shifted = shifted.reshape(kh * kw * c_out, n * hp * wp)
            if want_k:
                gw = (shifted @ xflat.T).reshape(kh, kw, c_out, c_in)
                kernel.accumulate(gw.transpose(2, 3, 0, 1))
            if want_x:
                gxc = (wstack.T @ shifted).reshape(c_in, n, hp, wp)
                if padding:
                    gxc = gxc[:, :, padding:padding + h, padding:padding + w]
                x.accumulate(gxc.transpose(1, 0, 2, 3))

        tape.record("conv2d", backward)
    return result


def _check_pool(x: Tensor, window: int, stride: int, padding: int, op: str) -> Tuple[int, int]:
    _require_rank4(x, op)
    if window < 1 or stride < 1:
        raise ArgumentError("pooling window and stride must be positive")
    if padding < 0 or padding >= window:
        raise ArgumentError("pooling padding must satisfy 0 <= padding < window")
    h, w = x.shape[2] + 2 * padding, x.shape[3] + 2 * padding
    if window > h or window > w:
        raise DimensionError(f"pooling window {window} larger than input {x.shape[2:]}")
    return (h - window) // stride + 1, (w - window) // stride + 1


def maxpool2d(
    x: Tensor, window: int = 2, stride: int = 2, tape: Optional[Tape] = None
) -> Tuple[Tensor, np.ndarray]:
    """Window maximum. Returns the output and the flat in-window argmax.

    Ties resolve to the first maximal element in row-major order, so the
    backward pass routes each gradient to exactly one input.
    """
    ho, wo = _check_pool(x, window, stride, 0, "maxpool2d")
    stack = np.stack([x.data[:, :, _tap_slice(i, ho, stride), _tap_slice(j, wo, stride)]
                      for i in range(window) for j in range(window)])
    mask = stack.argmax(axis=0).astype(np.int8 if window * window < 128 else np.int32)  # first max wins
    best = stack.max(axis=0)
    del stack
    result = Tensor(best, requires_grad=x.requires_grad)

    if tape is not None and x.requires_grad:

        def backward() -> None:
            g = result.grad
            if g is None:
                return
            gx = np.zeros_like(x.data)
            for t in range(window * window):
                i, j = divmod(t, window)
                rows, cols = _tap_slice(i, ho, stride), _tap_slice(j, wo, stride)
                gx[:, :, rows, cols] += np.where(mask == t, g, 0)
            x.accumulate(gx)

        tape.record("maxpool2d", backward)
    return result, mask


def avgpool2d(
    x: Tensor, window: int = 2, stride: int = 2, padding: int = 0, tape: Optional[Tape] = None
) -> Tensor:
    """Window mean over ``window**2`` samples (zero padding counts toward the mean)."""
    ho, wo = _check_pool(x, window, stride, padding, "avgpool2d")
    xp = x.data
    if padding:
        xp = np.pad(xp, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    scale = 1.0 / (window * window)
    acc = None
    for i in range(window):
        rows = _tap_slice(i, ho, stride)
        for j in range(window):
            patch = xp[:, :, rows, _tap_slice(j, wo, stride)]
            acc = patch.copy() if acc is None else acc + patch
    result = Tensor(acc * xp.dtype.type(scale), requires_grad=x.requires_grad)

    if tape is not None and x.requires_grad:

        def backward() -> None:
            g = result.grad
            if g is None:
                return
            gs = g * g.dtype.type(scale)
            gxp = np.zeros_like(xp)
            for i in range(window):
                rows = _tap_slice(i, ho, stride)
                for j in range(window):
                    gxp[:, :, rows, _tap_slice(j, wo, stride)] += gs
            if padding:
                gxp = gxp[:, :, padding:-padding, padding:-padding]
            x.accumulate(gxp)

        tape.record("avgpool2d", backward)
    return result


def global_avgpool(x: Tensor, tape: Optional[Tape] = None) -> Tensor:
    """Mean over the spatial axes: (n, c, h, w) -> (n, c)."""
    _require_rank4(x, "global_avgpool")
    h, w = x.shape[2:]
    result = Tensor(x.data.mean(axis=(2, 3)), requires_grad=x.requires_grad)

    if tape is not None and x.requires_grad:

        def backward() -> None:
            g = result.grad
            if g is None:
                return
            gx = np.broadcast_to(g[:, :, None, None] / (h * w), x.shape)
            x.accumulate(gx)

        tape.record("global_avgpool", backward)
    return result


def dense(x: Tensor, weights: Parameter, bias: Optional[Parameter] = None, tape: Optional[Tape] = None) -> Tensor:
    """Affine map ``x @ weights + bias`` for ``x`` of shape (n, d)."""
    if x.data.ndim != 2:
        raise DimensionError(f"dense expects (n, d) input, got {x.shape}")
    if weights.data.ndim != 2 or weights.shape[0] != x.shape[1]:
        raise DimensionError(f"weights {weights.shape} incompatible with input {x.shape}")
    if bias is not None and bias.shape != (weights.shape[1],):
        raise DimensionError(f"bias {bias.shape} incompatible with weights {weights.shape}")
    out = x.data @ weights.data
    if bias is not None:
        out = out + bias.data
    result = Tensor(check_finite(out, "dense"), requires_grad=needs_grad(x, weights, bias))

    if tape is not None and result.requires_grad:

        def backward() -> None:
            g = result.grad
            if g is None:
                return
            if not weights.frozen:
                weights.accumulate(x.data.T @ g)
            if bias is not None and not bias.frozen:
                bias.accumulate(g.sum(axis=0))
            if x.requires_grad:
                x.accumulate(g @ weights.data.T)

        tape.record("dense", backward)
    return result


def relu(x: Tensor, tape: Optional[Tape] = None) -> Tensor:
    active = x.data > 0
    result = Tensor(np.where(active, x.data, 0).astype(x.dtype), requires_grad=x.requires_grad)

    if tape is not None and x.requires_grad:

        def backward() -> None:
            if result.grad is not None:
                x.accumulate(np.where(active, result.grad, 0))

        tape.record("relu", backward)
    return result


def dropout(
    x: Tensor,
    rate: float,
    rng: Union[int, np.random.Generator, None] = None,
    training: bool = True,
    tape: Optional[Tape] = None,
) -> Tuple[Tensor, Optional[np.ndarray]]:
    """Inverted dropout. Returns the output and the keep-mask (``None`` at inference)."""
    if not 0.0 <= rate < 1.0:
        raise ArgumentError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x, None
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    keep = gen.random(x.shape) >= rate
    scale = x.dtype.type(1.0 / (1.0 - rate))
    mask = keep.astype(x.dtype) * scale
    result = Tensor(x.data * mask, requires_grad=x.requires_grad)

    if tape is not None and x.requires_grad:

        def backward() -> None:
            if result.grad is not None:
                x.accumulate(result.grad * mask)

        tape.record("dropout", backward)
    return result, keep


def channel_concat(parts: Sequence[Tensor], tape: Optional[Tape] = None) -> Tensor:
    """Concatenate NCHW tensors along the channel axis in the given order."""
    parts = list(parts)
    if not parts:
        raise DimensionError("channel_concat needs at least one part")
    for p in parts:
        _require_rank4(p, "channel_concat")
    n, _, h, w = parts[0].shape
    for p in parts[1:]:
        if p.shape[0] != n or p.shape[2:] != (h, w):
            raise DimensionError(f"cannot concatenate {p.shape} with {parts[0].shape}")
    if len(parts) == 1:
        return parts[0]
    widths = [p.shape[1] for p in parts]
    result = Tensor(np.concatenate([p.data for p in parts], axis=1),
                    requires_grad=any(p.requires_grad for p in parts))

    if tape is not None and result.requires_grad:

        def backward() -> None:
            g = result.grad
            if g is None:
                return
            start = 0
            for p, width in zip(parts, widths):
                if p.requires_grad:
                    p.accumulate(g[:, start:start + width])
                start += width

        tape.record("channel_concat", backward)
    return result


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_crossentropy(
    logits: Tensor, targets, tape: Optional[Tape] = None
) -> Tuple[Tensor, np.ndarray]:
    """Mean negative log-likelihood of ``targets`` under softmax(logits).

    Returns a scalar loss tensor and the row-stochastic probabilities.
    """
    if logits.data.ndim != 2:
        raise DimensionError(f"logits must be (n, c), got {logits.shape}")
    n, c = logits.shape
    if c < 2:
        raise ArgumentError("need at least two classes")
    targets = np.asarray(targets, dtype=np.int64).reshape(-1)
    if targets.shape[0] != n:
        raise DimensionError(f"{targets.shape[0]} targets for {n} rows")
    if np.any(targets < 0) or np.any(targets >= c):
        raise ArgumentError(f"targets must lie in [0, {c})")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    probs = np.exp(log_probs)
    loss_value = -log_probs[np.arange(n), targets].mean()
    loss = Tensor(check_finite(np.asarray(loss_value), "softmax_crossentropy"),
                  requires_grad=logits.requires_grad)

    if tape is not None and logits.requires_grad:

        def backward() -> None:
            if loss.grad is None:
                return
            g = probs.copy()
            g[np.arange(n), targets] -= 1
            logits.accumulate(g * (loss.grad / n))

        tape.record("softmax_crossentropy", backward)
    return loss, probs
