"""Image reconstruction: zero-filled adjoint, a small encoder-decoder
network, and an unrolled reconstructor with conjugate-gradient data
consistency.

Two physics-aware tape ops bridge the complex MRI operators into the
real-valued autodiff engine: masked_zero_filled (differentiable in the
mask weights, which is what the straight-through estimator consumes) and
sense_normal (the self-adjoint data-consistency operator, differentiable
in the image). Both carry hand-derived backward passes that the tests
verify against finite differences and the adjoint identity.
"""

import numpy as np

from . import mri
from .autodiff import Tensor, ops, parameter
from .autodiff.tensor import record_op
from .errors import DimensionError, NumericError, ValidationError


# ---------------------------------------------------------------------------
# physics tape ops

def masked_zero_filled(mask_weights, y, maps):
    """Coil-combined adjoint of column-masked k-space, as a tape op.

    mask_weights is a length-W tensor (binary on the forward path, but the
    op is linear in arbitrary weights); y and maps are complex constants.
    Output is the 2-channel image sum_c conj(S_c) ifft2c(m o y_c).
    """
    m = mask_weights if isinstance(mask_weights, Tensor) else Tensor(mask_weights)
    if m.data.size != y.shape[-1]:
        raise DimensionError("mask weight length does not match phase-encode dim")
    zf = np.sum(np.conj(maps) * mri.ifft2c(y * m.data[None, None, :]), axis=0)
    out = Tensor(mri.to_channels(zf))

    def backward(g):
        gc = g[0] + 1j * g[1]
        v = mri.fft2c(maps * gc[None])
        gm = np.real(np.sum(np.conj(y) * v, axis=(0, 1)))
        return (gm.astype(m.data.dtype),)

    return record_op(out, (m,), backward)


def sense_normal(x, maps, mask_lines, lam):
    """Regularized normal operator (A^H M A + lam I) x on a 2-channel image.

    Self-adjoint in the real inner product, so the backward pass applies
    the identical operator to the upstream gradient.
    """
    x = x if isinstance(x, Tensor) else Tensor(x)
    cols = np.asarray(mask_lines, dtype=float)

    def apply_op(arr2):
        xc = arr2[0] + 1j * arr2[1]
        k = mri.fft2c(maps * xc[None]) * cols[None, None, :]
        img = np.sum(np.conj(maps) * mri.ifft2c(k), axis=0) + lam * xc
        return mri.to_channels(img)

    out = Tensor(apply_op(x.data))
    return record_op(out, (x,), lambda g: (apply_op(g).astype(x.data.dtype),))


def zero_filled(y, maps, mask):
    """Plain (non-tape) zero-filled reconstruction, complex image out."""
    return mri.adjoint(mri.apply_mask(y, mask), maps, mask)


def nrmse_loss(x_rec, x_gt):
    """||x_gt - x_rec||_2 / ||x_gt||_2 over 2-channel values.

    x_rec is a tape tensor; x_gt is a constant (2-channel array or complex
    image).
    """
    gt = mri.to_channels(x_gt) if np.iscomplexobj(x_gt) else np.asarray(x_gt)
    denom = float(np.linalg.norm(gt))
    if denom == 0:
        raise ValidationError("nrmse: ground truth has zero norm")
    diff = ops.sub(x_rec, Tensor(gt))
    return ops.scale(ops.sqrt(ops.sum_all(ops.mul(diff, diff))), 1.0 / denom)


def nrmse_value(x_rec, x_gt):
    """Scalar NRMSE between two plain arrays (complex or real)."""
    denom = np.linalg.norm(x_gt)
    if denom == 0:
        raise ValidationError("nrmse: ground truth has zero norm")
    return float(np.linalg.norm(x_gt - x_rec) / denom)


# ---------------------------------------------------------------------------
# encoder-decoder network

def _he_conv(rng, co, ci, k):
    std = np.sqrt(2.0 / (ci * k * k))
    return parameter(rng.standard_normal((co, ci, k, k)) * std)


class UNetLite:
    """Two-channel encoder-decoder with two pooling stages and skip
    concatenations; output shape equals input shape."""

    def __init__(self, base=8, seed=0):
        rng = np.random.default_rng(seed)
        b = base
        self.convs = {
            "enc1": _he_conv(rng, b, 2, 3),
            "enc2": _he_conv(rng, 2 * b, b, 3),
            "mid": _he_conv(rng, 2 * b, 2 * b, 3),
            "dec2": _he_conv(rng, b, 4 * b, 3),
            "dec1": _he_conv(rng, b, 2 * b, 3),
            "out": _he_conv(rng, 2, b, 3),
        }
        self.biases = {
            name: parameter(np.zeros(self.convs[name].shape[0]))
            for name in self.convs
        }
        self.base = b

    def named_parameters(self):
        named = {}
        for name in self.convs:
            named[f"{name}.w"] = self.convs[name]
            named[f"{name}.b"] = self.biases[name]
        return named

    def parameters(self):
        return list(self.named_parameters().values())

    def set_trainable(self, flag):
        for p in self.parameters():
            p.requires_grad = flag

    def _block(self, x, name, slope=0.1):
        h = ops.conv2d(x, self.convs[name], stride=1, pad=1)
        h = ops.bias_add(h, self.biases[name])
        return ops.leaky_relu(h, slope)

    def forward(self, x):
        if x.shape[0] != 2:
            raise DimensionError("UNetLite expects a 2-channel image")
        e1 = self._block(x, "enc1")
        e2 = self._block(ops.avg_pool2(e1), "enc2")
        mid = self._block(ops.avg_pool2(e2), "mid")
        d2 = self._block(ops.concat(ops.upsample_nearest2(mid), e2), "dec2")
        d1 = self._block(ops.concat(ops.upsample_nearest2(d2), e1), "dec1")
        h = ops.conv2d(d1, self.convs["out"], stride=1, pad=1)
        return ops.bias_add(h, self.biases["out"])

    def __call__(self, x):
        return self.forward(x)


def unet_reconstruct(net, y, maps, mask):
    """Network applied to the 2-channel zero-filled image; complex out."""
    zf = mri.to_channels(zero_filled(y, maps, mask))
    out = net.forward(Tensor(zf))
    return mri.from_channels(out.data)


# ---------------------------------------------------------------------------
# conjugate-gradient data consistency

def cg_solve(maps, mask, rhs, z, lambda_dc, iters=10, tol=1e-6, callback=None):
    """Approximately solve (A^H M A + lam I) x = rhs + lam z.

    rhs and z are 2-channel tensors (or arrays); the solve runs as tape
    ops so unrolled differentiation through a fixed iteration count works.
    Stops when the relative residual drops below tol.
    """
    if lambda_dc <= 0:
        raise ValidationError("lambda_dc must be positive")
    rhs = rhs if isinstance(rhs, Tensor) else Tensor(rhs)
    z = z if isinstance(z, Tensor) else Tensor(z)
    if not (np.all(np.isfinite(rhs.data)) and np.all(np.isfinite(z.data))):
        raise NumericError("cg_solve: non-finite right-hand side")
    cols = mask.lines if isinstance(mask, mri.SamplingMask) else np.asarray(mask)

    b = ops.add(rhs, ops.scale(z, lambda_dc))
    x = Tensor(np.zeros_like(b.data))
    r = b
    p = r
    rs = ops.sum_all(ops.mul(r, r))
    bnorm = float(np.sqrt(rs.data))
    if callback is not None:
        callback(0, bnorm)
    if bnorm == 0:
        return x
    for it in range(1, iters + 1):
        ep = sense_normal(p, maps, cols, lambda_dc)
        alpha = ops.div(rs, ops.sum_all(ops.mul(p, ep)))
        x = ops.add(x, ops.smul(alpha, p))
        r = ops.sub(r, ops.smul(alpha, ep))
        rs_new = ops.sum_all(ops.mul(r, r))
        resnorm = float(np.sqrt(rs_new.data))
        if callback is not None:
            callback(it, resnorm)
        if resnorm <= tol * bnorm:
            break
        beta = ops.div(rs_new, rs)
        p = ops.add(r, ops.smul(beta, p))
        rs = rs_new
    return x


# ---------------------------------------------------------------------------
# unrolled reconstruction

class ModlConfig:
    """Unroll count, data-consistency weight and CG settings."""

    def __init__(self, denoiser, unrolls=3, lambda_dc=0.05, cg_iters=10, cg_tol=1e-6):
        if unrolls < 1:
            raise ValidationError("unroll count must be >= 1")
        if lambda_dc <= 0 or cg_tol <= 0:
            raise ValidationError("lambda_dc and cg_tol must be positive")
        self.denoiser = denoiser
        self.unrolls = unrolls
        self.lambda_dc = lambda_dc
        self.cg_iters = cg_iters
        self.cg_tol = cg_tol


def modl_reconstruct(cfg, y, maps, mask, as_tensor=False):
    """Alternate CG data-consistency solves with the learned denoiser.

    x0 is the zero-filled image and seeds the auxiliary variable; the
    unroll count tallies CG x-updates and shares denoiser weights.
    """
    cols = mask.lines if isinstance(mask, mri.SamplingMask) else np.asarray(mask)
    ymasked = y * cols[None, None, :]
    rhs = Tensor(mri.to_channels(mri.adjoint(ymasked, maps, cols)))
    zt = rhs  # the zero-filled image seeds the auxiliary variable
    x = zt
    for n in range(cfg.unrolls):
        x = cg_solve(
            maps, cols, rhs, zt, cfg.lambda_dc, iters=cfg.cg_iters, tol=cfg.cg_tol
        )
        if n < cfg.unrolls - 1:
            zt = cfg.denoiser.forward(x)
    if as_tensor:
        return x
    return mri.from_channels(x.data)
