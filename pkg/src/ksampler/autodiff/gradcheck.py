"""Finite-difference verification of tape gradients."""

import numpy as np

from .tensor import Graph, Tensor


def gradient_check(f, x, h=1e-5):
    """Compare the tape gradient of a scalar function against central
    finite differences, coordinate by coordinate.

    f takes a Tensor and returns a scalar Tensor; it must be smooth at x
    (the caller avoids relu kinks and top-k ties). Returns the largest
    coordinate deviation normalized by the largest gradient magnitude.
    """
    x = Tensor(np.asarray(x.data if isinstance(x, Tensor) else x, dtype=np.float64),
               requires_grad=True, dtype=np.float64)
    with Graph() as g:
        y = f(x)
    g.backward(y)
    analytic = x.grad.copy()

    fd = np.zeros_like(x.data)
    flat = x.data.reshape(-1)
    fd_flat = fd.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = float(f(Tensor(x.data, dtype=np.float64)).data)
        flat[i] = orig - h
        lo = float(f(Tensor(x.data, dtype=np.float64)).data)
        flat[i] = orig
        fd_flat[i] = (hi - lo) / (2 * h)

    denom = max(np.max(np.abs(fd)), np.max(np.abs(analytic)), 1e-12)
    return float(np.max(np.abs(analytic - fd)) / denom)
