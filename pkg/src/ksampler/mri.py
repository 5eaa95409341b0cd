"""Multi-coil Cartesian MRI encoding.

Centered orthonormal 2-D Fourier transforms, coil sensitivity weighting
and phase-encode line masking. With sum-of-squares normalized maps and
full sampling the composite operator satisfies adjoint(forward(x)) = x,
which the solvers and several trivial test cases rely on.

Complex images are numpy complex arrays; the 2-channel real layout used
by the networks is produced by to_channels / from_channels.
"""

import numpy as np

from .errors import DimensionError, ValidationError


def _check_even(h, w):
    if h < 4 or w < 4 or h % 2 or w % 2:
        raise ValidationError(f"grid {h}x{w} must be even and at least 4x4")


def fft2c(x):
    """Centered orthonormal 2-D FFT (DC lands at H/2, W/2)."""
    _check_even(x.shape[-2], x.shape[-1])
    shifted = np.fft.ifftshift(x, axes=(-2, -1))
    k = np.fft.fft2(shifted, axes=(-2, -1), norm="ortho")
    return np.fft.fftshift(k, axes=(-2, -1))


def ifft2c(k):
    """Inverse of fft2c."""
    _check_even(k.shape[-2], k.shape[-1])
    shifted = np.fft.ifftshift(k, axes=(-2, -1))
    x = np.fft.ifft2(shifted, axes=(-2, -1), norm="ortho")
    return np.fft.fftshift(x, axes=(-2, -1))


def to_channels(z):
    """complex[..., H, W] -> real[..., 2, H, W]."""
    return np.stack([z.real, z.imag], axis=-3)


def from_channels(x):
    """real[..., 2, H, W] -> complex[..., H, W]."""
    return x[..., 0, :, :] + 1j * x[..., 1, :, :]


class SamplingMask:
    """Binary selection over phase-encode lines with an exact budget and a
    forced centered low-frequency band."""

    def __init__(self, lines, budget, low_freq_width):
        lines = np.asarray(lines, dtype=np.uint8)
        if lines.ndim != 1:
            raise DimensionError("mask lines must be a 1-D vector")
        n_pe = lines.size
        if budget > n_pe:
            raise ValidationError(f"budget {budget} exceeds {n_pe} lines")
        if int(lines.sum()) != budget:
            raise ValidationError(
                f"mask has {int(lines.sum())} sampled lines, budget is {budget}"
            )
        band = band_indices(n_pe, low_freq_width)
        if not np.all(lines[band] == 1):
            raise ValidationError("low-frequency band not fully sampled")
        self.lines = lines
        self.n_pe = n_pe
        self.budget = budget
        self.low_freq_width = low_freq_width

    @property
    def indices(self):
        return np.flatnonzero(self.lines)

    def movable(self):
        """Sampled lines outside the forced band."""
        band = set(band_indices(self.n_pe, self.low_freq_width).tolist())
        return np.array([i for i in self.indices if i not in band], dtype=int)

    def unsampled(self):
        return np.flatnonzero(self.lines == 0)

    def replace(self, out_line, in_line):
        """New mask with one sampled line exchanged."""
        lines = self.lines.copy()
        if lines[out_line] != 1 or lines[in_line] != 0:
            raise ValidationError("replace: swap endpoints not in expected state")
        lines[out_line] = 0
        lines[in_line] = 1
        return SamplingMask(lines, self.budget, self.low_freq_width)

    def __eq__(self, other):
        return (
            isinstance(other, SamplingMask)
            and self.n_pe == other.n_pe
            and self.budget == other.budget
            and self.low_freq_width == other.low_freq_width
            and np.array_equal(self.lines, other.lines)
        )

    def __repr__(self):
        return f"SamplingMask(n_pe={self.n_pe}, budget={self.budget}, band={self.low_freq_width})"

    def save(self, path):
        """Text format: one header line `n_pe budget low_freq_width`, then
        the sorted sampled-line indices space-separated."""
        with open(path, "w") as fh:
            fh.write(f"{self.n_pe} {self.budget} {self.low_freq_width}\n")
            fh.write(" ".join(str(i) for i in self.indices) + "\n")

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            header = fh.readline().split()
            idx = [int(tok) for tok in fh.read().split()]
        if len(header) != 3:
            raise ValidationError(f"malformed mask header in {path}")
        n_pe, budget, width = (int(v) for v in header)
        lines = np.zeros(n_pe, dtype=np.uint8)
        lines[idx] = 1
        return cls(lines, budget, width)

    @classmethod
    def from_indices(cls, n_pe, indices, low_freq_width):
        lines = np.zeros(n_pe, dtype=np.uint8)
        lines[list(indices)] = 1
        return cls(lines, int(lines.sum()), low_freq_width)

    @classmethod
    def full(cls, n_pe, low_freq_width=0):
        return cls(np.ones(n_pe, dtype=np.uint8), n_pe, low_freq_width)


def band_indices(n_pe, width):
    """Centered low-frequency band around the DC column n_pe // 2."""
    if width < 0 or width > n_pe:
        raise ValidationError(f"band width {width} out of range for {n_pe} lines")
    start = n_pe // 2 - width // 2
    return np.arange(start, start + width)


def default_band_width(n_pe, frac=0.08):
    """Even-rounded calibration band, at least 2 lines."""
    return max(2, 2 * round(frac * n_pe / 2))


def uniform_random_mask(n_pe, accel, low_freq_frac=0.08, seed=0):
    """Budget floor(n_pe/accel); centered band of round(low_freq_frac*n_pe)
    lines forced on; the rest drawn uniformly without replacement."""
    if accel < 1:
        raise ValidationError(f"acceleration {accel} must be >= 1")
    budget = int(n_pe // accel)
    width = int(round(low_freq_frac * n_pe))
    return random_mask(n_pe, budget, width, seed)


def random_mask(n_pe, budget, low_freq_width, seed):
    """Uniform random mask at an explicit budget and band width."""
    band = band_indices(n_pe, low_freq_width)
    if band.size > budget:
        raise ValidationError(
            f"low-frequency band ({band.size} lines) exceeds budget {budget}"
        )
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    lines = np.zeros(n_pe, dtype=np.uint8)
    lines[band] = 1
    pool = np.flatnonzero(lines == 0)
    extra = rng.choice(pool, size=budget - band.size, replace=False)
    lines[extra] = 1
    return SamplingMask(lines, budget, low_freq_width)


def _mask_cols(mask):
    return mask.lines if isinstance(mask, SamplingMask) else np.asarray(mask)


def forward(x, maps, mask):
    """Per coil: mask o fft2c(S_c o x). Noise is added elsewhere."""
    if maps.shape[-2:] != x.shape:
        raise DimensionError(f"maps {maps.shape} do not match image {x.shape}")
    m = _mask_cols(mask)
    if m.size != x.shape[-1]:
        raise DimensionError("mask length does not match phase-encode dim")
    return fft2c(maps * x[None]) * m[None, None, :]


def adjoint(y, maps, mask):
    """Coil-combined adjoint: sum_c conj(S_c) o ifft2c(mask o y_c)."""
    if maps.shape != y.shape:
        raise DimensionError(f"maps {maps.shape} do not match k-space {y.shape}")
    m = _mask_cols(mask)
    if m.size != y.shape[-1]:
        raise DimensionError("mask length does not match phase-encode dim")
    return np.sum(np.conj(maps) * ifft2c(y * m[None, None, :]), axis=0)


def apply_mask(y, mask):
    """Zero every k-space column whose mask bit is 0."""
    m = _mask_cols(mask)
    if m.size != y.shape[-1]:
        raise DimensionError(
            f"mask covers {m.size} lines, k-space has {y.shape[-1]}"
        )
    return y * m[None, None, :] if y.ndim == 3 else y * m[None, :]


def extract_lowfreq(y, width):
    """Coil-averaged centered low-frequency block, H x width complex."""
    if width % 2:
        raise ValidationError("low-frequency width must be even")
    w = y.shape[-1]
    if width > w:
        raise ValidationError(f"width {width} exceeds {w} phase-encode lines")
    mean = np.mean(y, axis=0) if y.ndim == 3 else y
    start = w // 2 - width // 2
    return mean[:, start : start + width]


def sos_combine(imgs):
    """Pixelwise root sum of squared coil magnitudes."""
    return np.sqrt(np.sum(np.abs(imgs) ** 2, axis=0))
