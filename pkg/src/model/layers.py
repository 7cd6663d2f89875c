"""
Forward/backward layer primitives for one sample in (C, H, W) layout.

Every *_forward returns (out, cache); the matching *_backward takes
(dout, cache) and returns the input gradient, plus parameter gradients
where the layer has parameters.
"""

from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _same_pad(k: int) -> Tuple[int, int]:
    before = (k - 1) // 2
    return before, k - 1 - before


def conv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """
    Stride-1 "same" convolution.

    x: (C, H, W); w: (F, C, kh, kw); b: (F,) -> out (F, H, W)
    """
    C, H, W = x.shape
    F, Cw, kh, kw = w.shape
    if C != Cw:
        raise ValueError(f"Input has {C} channels, filters expect {Cw}")

    x_pad = np.pad(x, ((0, 0), _same_pad(kh), _same_pad(kw)))
    cols = sliding_window_view(x_pad, (kh, kw), axis=(1, 2))  # (C, H, W, kh, kw)
    out = np.tensordot(w, cols, axes=([1, 2, 3], [0, 3, 4])) + b[:, None, None]
    return out, (x_pad, cols, w)


def conv_backward(dout: np.ndarray, cache):
    x_pad, cols, w = cache
    F, C, kh, kw = w.shape
    _, H, W = dout.shape

    dw = np.tensordot(dout, cols, axes=([1, 2], [1, 2]))  # (F, C, kh, kw)
    db = dout.sum(axis=(1, 2))

    dcols = np.tensordot(w, dout, axes=([0], [0]))  # (C, kh, kw, H, W)
    dx_pad = np.zeros_like(x_pad)
    for i in range(kh):
        for j in range(kw):
            dx_pad[:, i:i + H, j:j + W] += dcols[:, i, j]

    top, _ = _same_pad(kh)
    left, _ = _same_pad(kw)
    dx = dx_pad[:, top:top + H, left:left + W]
    return dx, dw, db


def relu_forward(x: np.ndarray):
    return np.maximum(x, 0), x


def relu_backward(dout: np.ndarray, cache):
    x = cache
    return np.where(x > 0, dout, 0).astype(dout.dtype, copy=False)


def maxpool_freq_forward(x: np.ndarray, pool: int = 2):
    """Pool the frequency axis by `pool` (floor), time untouched."""
    C, H, W = x.shape
    Ho = H // pool
    if Ho < 1:
        raise ValueError(f"Cannot pool {H} rows by {pool}")
    blocks = x[:, :Ho * pool, :].reshape(C, Ho, pool, W)
    idx = blocks.argmax(axis=2)  # first maximum on ties
    out = np.take_along_axis(blocks, idx[:, :, None, :], axis=2)[:, :, 0, :]
    return out, (x.shape, idx, pool)


def maxpool_freq_backward(dout: np.ndarray, cache):
    shape, idx, pool = cache
    C, H, W = shape
    Ho = dout.shape[1]
    dblocks = np.zeros((C, Ho, pool, W), dtype=dout.dtype)
    np.put_along_axis(dblocks, idx[:, :, None, :], dout[:, :, None, :], axis=2)
    dx = np.zeros(shape, dtype=dout.dtype)
    dx[:, :Ho * pool, :] = dblocks.reshape(C, Ho * pool, W)
    return dx


def gap_forward(x: np.ndarray):
    """Global average pool (F, H, W) -> (F,)."""
    return x.mean(axis=(1, 2)), x.shape


def gap_backward(dout: np.ndarray, cache):
    F, H, W = cache
    return np.broadcast_to((dout / (H * W))[:, None, None], (F, H, W)).copy()


def affine_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """x: (D,), w: (D, M), b: (M,)"""
    return x @ w + b, (x, w)


def affine_backward(dout: np.ndarray, cache):
    x, w = cache
    return w @ dout, np.outer(x, dout), dout.copy()


def dropout_forward(x: np.ndarray, p: float, rng: Optional[np.random.Generator]):
    """Inverted dropout; rng=None means inference (identity)."""
    if rng is None or p <= 0:
        return x, None
    mask = (rng.random(x.shape) >= p).astype(x.dtype) / (1.0 - p)
    return x * mask, mask


def dropout_backward(dout: np.ndarray, cache):
    mask = cache
    return dout if mask is None else dout * mask


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def softmax_loss(logits: np.ndarray, target: int):
    """Cross-entropy of one sample; returns (loss, probs, dlogits = p - onehot)."""
    shifted = logits - logits.max()
    log_z = np.log(np.exp(shifted).sum())
    log_probs = shifted - log_z
    probs = np.exp(log_probs)
    dlogits = probs.copy()
    dlogits[target] -= 1
    return float(-log_probs[target]), probs, dlogits
