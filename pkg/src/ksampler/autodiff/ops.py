"""Differentiable operations: layers, activations, losses, binarization.

Every op computes its forward value eagerly on numpy arrays and, when a
Graph is active, records a backward closure producing exact gradients
(straight-through binarization being the one deliberate exception).
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DimensionError, ValidationError
from .tensor import Tensor, as_tensor, record_op


def _coerce(x):
    if isinstance(x, Tensor):
        return x
    return Tensor(x)


# ---------------------------------------------------------------------------
# elementwise arithmetic

def add(a, b):
    a, b = _coerce(a), _coerce(b)
    if a.shape != b.shape:
        raise DimensionError(f"add: shapes {a.shape} and {b.shape} differ")
    out = Tensor(a.data + b.data, dtype=a.data.dtype)
    return record_op(out, (a, b), lambda g: (g, g))


def sub(a, b):
    a, b = _coerce(a), _coerce(b)
    if a.shape != b.shape:
        raise DimensionError(f"sub: shapes {a.shape} and {b.shape} differ")
    out = Tensor(a.data - b.data, dtype=a.data.dtype)
    return record_op(out, (a, b), lambda g: (g, -g))


def mul(a, b):
    a, b = _coerce(a), _coerce(b)
    if a.shape != b.shape:
        raise DimensionError(f"mul: shapes {a.shape} and {b.shape} differ")
    out = Tensor(a.data * b.data, dtype=a.data.dtype)
    return record_op(out, (a, b), lambda g: (g * b.data, g * a.data))


def div(a, b):
    a, b = _coerce(a), _coerce(b)
    if a.shape != b.shape:
        raise DimensionError(f"div: shapes {a.shape} and {b.shape} differ")
    out = Tensor(a.data / b.data, dtype=a.data.dtype)

    def backward(g):
        return g / b.data, -g * a.data / (b.data * b.data)

    return record_op(out, (a, b), backward)


def scale(x, c):
    """Multiply by a python constant."""
    x = _coerce(x)
    c = float(c)
    out = Tensor(x.data * c, dtype=x.data.dtype)
    return record_op(out, (x,), lambda g: (g * c,))


def smul(s, x):
    """Scalar tensor times tensor (the one broadcast the solvers need)."""
    s, x = _coerce(s), _coerce(x)
    if s.data.size != 1:
        raise DimensionError("smul: first operand must be scalar")
    out = Tensor(s.data * x.data, dtype=x.data.dtype)

    def backward(g):
        gs = np.sum(g * x.data).reshape(s.data.shape)
        return gs, g * s.data

    return record_op(out, (s, x), backward)


def sum_all(x):
    x = _coerce(x)
    out = Tensor(np.sum(x.data), dtype=x.data.dtype)
    return record_op(out, (x,), lambda g: (np.broadcast_to(g, x.shape).astype(x.data.dtype),))


def mean_all(x):
    x = _coerce(x)
    n = x.data.size
    out = Tensor(np.mean(x.data), dtype=x.data.dtype)
    return record_op(
        out, (x,), lambda g: (np.broadcast_to(g / n, x.shape).astype(x.data.dtype),)
    )


def mean_axis(x, axis):
    """Mean over one axis (used for readout-axis pooling)."""
    x = _coerce(x)
    n = x.shape[axis]
    out = Tensor(np.mean(x.data, axis=axis), dtype=x.data.dtype)

    def backward(g):
        return (np.repeat(np.expand_dims(g / n, axis), n, axis=axis),)

    return record_op(out, (x,), backward)


def sqrt(x):
    x = _coerce(x)
    out = Tensor(np.sqrt(x.data), dtype=x.data.dtype)
    return record_op(out, (x,), lambda g: (g * 0.5 / out.data,))


def reshape(x, shape):
    x = _coerce(x)
    out = Tensor(x.data.reshape(shape), dtype=x.data.dtype)
    return record_op(out, (x,), lambda g: (g.reshape(x.shape),))


def concat(a, b, axis=0):
    a, b = _coerce(a), _coerce(b)
    out = Tensor(np.concatenate([a.data, b.data], axis=axis), dtype=a.data.dtype)
    split = a.shape[axis]

    def backward(g):
        ga, gb = np.split(g, [split], axis=axis)
        return ga, gb

    return record_op(out, (a, b), backward)


# ---------------------------------------------------------------------------
# activations

def relu(x):
    x = _coerce(x)
    out = Tensor(np.maximum(x.data, 0), dtype=x.data.dtype)
    # subgradient at 0 is 0
    return record_op(out, (x,), lambda g: (g * (x.data > 0),))


def leaky_relu(x, slope=0.01):
    x = _coerce(x)
    out = Tensor(np.where(x.data > 0, x.data, slope * x.data), dtype=x.data.dtype)
    return record_op(out, (x,), lambda g: (g * np.where(x.data > 0, 1.0, slope),))


def sigmoid(x):
    x = _coerce(x)
    # stable in both tails
    y = np.where(
        x.data >= 0,
        1.0 / (1.0 + np.exp(-np.abs(x.data))),
        np.exp(-np.abs(x.data)) / (1.0 + np.exp(-np.abs(x.data))),
    )
    out = Tensor(y, dtype=x.data.dtype)
    return record_op(out, (x,), lambda g: (g * out.data * (1.0 - out.data),))


# ---------------------------------------------------------------------------
# layers

def dense(x, w, b):
    """Affine map: x[*, in] @ w[in, out] + b[out]."""
    x, w, b = _coerce(x), _coerce(w), _coerce(b)
    if x.shape[-1] != w.shape[0] or w.shape[1] != b.shape[0]:
        raise DimensionError(
            f"dense: x{x.shape} w{w.shape} b{b.shape} do not chain"
        )
    out = Tensor(x.data @ w.data + b.data, dtype=x.data.dtype)

    def backward(g):
        gx = g @ w.data.T
        if x.data.ndim == 1:
            gw = np.outer(x.data, g)
            gb = g
        else:
            gw = x.data.T @ g
            gb = g.sum(axis=0)
        return gx, gw, gb

    return record_op(out, (x, w, b), backward)


def conv2d(x, kernels, stride=1, pad=0):
    """Cross-correlation of x[ch_in, H, W] with kernels[ch_out, ch_in, k, k].

    Zero padding; output height is (H + 2 pad - k) / stride + 1 and must be
    integral. k must be odd (pad = (k-1)/2 gives the shape-preserving mode).
    """
    x, kernels = _coerce(x), _coerce(kernels)
    if x.data.ndim != 3 or kernels.data.ndim != 4:
        raise DimensionError("conv2d: expected x[ci,H,W], kernels[co,ci,k,k]")
    co, ci, k, k2 = kernels.shape
    if k != k2 or k % 2 == 0:
        raise DimensionError("conv2d: kernels must be square with odd size")
    if x.shape[0] != ci:
        raise DimensionError(f"conv2d: {x.shape[0]} input channels, kernels expect {ci}")
    h, w = x.shape[1], x.shape[2]
    if (h + 2 * pad - k) % stride or (w + 2 * pad - k) % stride:
        raise DimensionError("conv2d: non-integral output size")
    ho = (h + 2 * pad - k) // stride + 1
    wo = (w + 2 * pad - k) // stride + 1

    xp = np.pad(x.data, ((0, 0), (pad, pad), (pad, pad))) if pad else x.data
    win = sliding_window_view(xp, (k, k), axis=(1, 2))[:, ::stride, ::stride]
    cols = win.transpose(0, 3, 4, 1, 2).reshape(ci * k * k, ho * wo)
    kmat = kernels.data.reshape(co, ci * k * k)
    out = Tensor((kmat @ cols).reshape(co, ho, wo), dtype=x.data.dtype)

    def backward(g):
        g2 = g.reshape(co, ho * wo)
        gk = (g2 @ cols.T).reshape(co, ci, k, k)
        gcols = (kmat.T @ g2).reshape(ci, k, k, ho, wo)
        gxp = np.zeros_like(xp)
        for a in range(k):
            for b in range(k):
                gxp[:, a : a + stride * ho : stride, b : b + stride * wo : stride] += gcols[
                    :, a, b
                ]
        gx = gxp[:, pad : pad + h, pad : pad + w] if pad else gxp
        return gx, gk

    return record_op(out, (x, kernels), backward)


def bias_add(x, b):
    """Per-channel bias on a [ch, H, W] tensor."""
    x, b = _coerce(x), _coerce(b)
    if x.shape[0] != b.shape[0] or b.data.ndim != 1:
        raise DimensionError(f"bias_add: x{x.shape} vs b{b.shape}")
    out = Tensor(x.data + b.data[:, None, None], dtype=x.data.dtype)
    return record_op(out, (x, b), lambda g: (g, g.sum(axis=(1, 2))))


def avg_pool2(x):
    """2x2 average pooling on [ch, H, W]; dims must be even."""
    x = _coerce(x)
    c, h, w = x.shape
    if h % 2 or w % 2:
        raise DimensionError("avg_pool2: odd spatial dims")
    out = Tensor(
        x.data.reshape(c, h // 2, 2, w // 2, 2).mean(axis=(2, 4)), dtype=x.data.dtype
    )

    def backward(g):
        return (np.repeat(np.repeat(g, 2, axis=1), 2, axis=2) * 0.25,)

    return record_op(out, (x,), backward)


def upsample_nearest2(x):
    """2x nearest-neighbor upsampling on [ch, H, W]."""
    x = _coerce(x)
    c, h, w = x.shape
    out = Tensor(np.repeat(np.repeat(x.data, 2, axis=1), 2, axis=2), dtype=x.data.dtype)

    def backward(g):
        return (g.reshape(c, h, 2, w, 2).sum(axis=(2, 4)),)

    return record_op(out, (x,), backward)


# ---------------------------------------------------------------------------
# losses and binarization

def bce_with_logits(a, m):
    """Mean binary cross-entropy of logits a against binary labels m.

    Evaluated in the log-sum-exp form, so it stays finite for logits of
    magnitude up to at least 1e4. Labels are constants; gradients flow to
    the logits only.
    """
    a = _coerce(a)
    mdata = m.data if isinstance(m, Tensor) else np.asarray(m, dtype=a.data.dtype)
    if a.shape != mdata.shape:
        raise DimensionError(f"bce_with_logits: logits {a.shape} vs labels {mdata.shape}")
    if not np.all((mdata == 0) | (mdata == 1)):
        raise ValidationError("bce_with_logits: labels must be 0 or 1")
    n = a.data.size
    z = a.data
    loss = np.maximum(z, 0) - z * mdata + np.log1p(np.exp(-np.abs(z)))
    out = Tensor(np.sum(loss) / n, dtype=a.data.dtype)

    def backward(g):
        s = np.where(
            z >= 0,
            1.0 / (1.0 + np.exp(-np.abs(z))),
            np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))),
        )
        return (g * (s - mdata) / n,)

    return record_op(out, (a,), backward)


def st_binarize(p, budget, forced=()):
    """Top-k binarization with a straight-through backward pass.

    Forward returns 1 on every forced index plus the (budget - |forced|)
    largest remaining entries of p, ties broken by lower index. Backward
    passes the upstream gradient through unchanged.
    """
    p = _coerce(p)
    n = p.data.size
    forced = np.asarray(sorted(set(int(i) for i in forced)), dtype=int)
    if budget > n:
        raise ValidationError(f"st_binarize: budget {budget} exceeds length {n}")
    if forced.size > budget:
        raise ValidationError("st_binarize: forced set larger than budget")
    if forced.size and (forced.min() < 0 or forced.max() >= n):
        raise ValidationError("st_binarize: forced index out of range")
    bits = np.zeros(n, dtype=p.data.dtype)
    bits[forced] = 1.0
    free = budget - forced.size
    if free > 0:
        candidates = np.setdiff1d(np.arange(n), forced, assume_unique=True)
        # descending value, ascending index on ties
        order = candidates[np.lexsort((candidates, -p.data[candidates]))]
        bits[order[:free]] = 1.0
    out = Tensor(bits, dtype=p.data.dtype)
    return record_op(out, (p,), lambda g: (g,))
