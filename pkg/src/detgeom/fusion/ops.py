"""Numeric primitives for the fusion reference: resizing, convolutions,
activations, and single-block multi-head self-attention.

Everything operates on plain float64 numpy arrays; feature maps are
(channels, height, width) and token matrices are (tokens, dim).  The bilinear
convention is the half-pixel (align-corners-false) one with clamp-to-edge
sampling, and adaptive average pooling uses floor/ceil window bounds, so both
preserve constant inputs exactly.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "bilinear_resize",
    "adaptive_avg_pool",
    "conv1x1",
    "conv3x3",
    "sigmoid",
    "relu",
    "softmax",
    "multi_head_attention",
    "feed_forward",
]


def _axis_weights(in_size: int, out_size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Half-pixel source coordinates; lo/hi sample indices clamped to the edge.
    dst = np.arange(out_size, dtype=np.float64)
    src = (dst + 0.5) * (in_size / out_size) - 0.5
    lo = np.floor(src).astype(np.int64)
    frac = src - lo
    lo_c = np.clip(lo, 0, in_size - 1)
    hi_c = np.clip(lo + 1, 0, in_size - 1)
    return lo_c, hi_c, frac


def bilinear_resize(x: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear interpolation of a (C, H, W) array to (C, out_h, out_w)."""
    if out_h <= 0 or out_w <= 0:
        raise ValueError(f"target size must be positive, got {(out_h, out_w)}")
    _, in_h, in_w = x.shape
    y0, y1, fy = _axis_weights(in_h, out_h)
    x0, x1, fx = _axis_weights(in_w, out_w)
    top = x[:, y0, :] * (1.0 - fy)[None, :, None] + x[:, y1, :] * fy[None, :, None]
    out = (
        top[:, :, x0] * (1.0 - fx)[None, None, :]
        + top[:, :, x1] * fx[None, None, :]
    )
    return out


def adaptive_avg_pool(x: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Adaptive average pooling of a (C, H, W) array to (C, out_h, out_w)."""
    if out_h <= 0 or out_w <= 0:
        raise ValueError(f"target size must be positive, got {(out_h, out_w)}")
    c, in_h, in_w = x.shape
    out = np.empty((c, out_h, out_w), dtype=np.float64)
    for i in range(out_h):
        y0 = (i * in_h) // out_h
        y1 = -((-(i + 1) * in_h) // out_h)
        for j in range(out_w):
            x0 = (j * in_w) // out_w
            x1 = -((-(j + 1) * in_w) // out_w)
            out[:, i, j] = x[:, y0:y1, x0:x1].mean(axis=(1, 2))
    return out


def conv1x1(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Pointwise convolution: weight (C_out, C_in) applied per pixel."""
    if weight.shape[1] != x.shape[0]:
        raise ValueError(
            f"weight expects {weight.shape[1]} input channels, map has {x.shape[0]}"
        )
    return np.tensordot(weight, x, axes=([1], [0])) + bias[:, None, None]


def conv3x3(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """3x3 convolution with zero padding 1; weight is (C_out, C_in, 3, 3)."""
    if weight.shape[1] != x.shape[0]:
        raise ValueError(
            f"weight expects {weight.shape[1]} input channels, map has {x.shape[0]}"
        )
    _, h, w = x.shape
    padded = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    out = np.zeros((weight.shape[0], h, w), dtype=np.float64)
    for dy in range(3):
        for dx in range(3):
            patch = padded[:, dy:dy + h, dx:dx + w]
            out += np.tensordot(weight[:, :, dy, dx], patch, axes=([1], [0]))
    return out + bias[:, None, None]


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def multi_head_attention(
    tokens: np.ndarray,
    wq: np.ndarray, bq: np.ndarray,
    wk: np.ndarray, bk: np.ndarray,
    wv: np.ndarray, bv: np.ndarray,
    wo: np.ndarray, bo: np.ndarray,
    num_heads: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Scaled dot-product self-attention over a (T, D) token matrix.

    Returns the projected output (T, D) and the attention weights
    (heads, T, T); every weight row sums to 1.
    """
    t, d = tokens.shape
    if d % num_heads != 0:
        raise ValueError(f"token dim {d} is not divisible by {num_heads} heads")
    dh = d // num_heads
    q = tokens @ wq + bq
    k = tokens @ wk + bk
    v = tokens @ wv + bv
    ctx = np.empty((t, d), dtype=np.float64)
    attn = np.empty((num_heads, t, t), dtype=np.float64)
    for h in range(num_heads):
        sl = slice(h * dh, (h + 1) * dh)
        scores = (q[:, sl] @ k[:, sl].T) / np.sqrt(dh)
        attn[h] = softmax(scores, axis=-1)
        ctx[:, sl] = attn[h] @ v[:, sl]
    return ctx @ wo + bo, attn


def feed_forward(
    tokens: np.ndarray,
    w1: np.ndarray, b1: np.ndarray,
    w2: np.ndarray, b2: np.ndarray,
) -> np.ndarray:
    """Two-layer position-wise network with a ReLU in between."""
    return relu(tokens @ w1 + b1) @ w2 + b2
