"""Synthetic multi-coil dataset generation and on-disk layout.

Phantoms are smoothed random ellipse superpositions with complex
amplitudes, coil maps are border-centered Gaussian bumps with smooth
phase ramps normalized to unit sum-of-squares, and noise is circular
complex Gaussian. A dataset directory holds manifest.json plus one KSF1
container per record (entries x_gt, maps, y_full, z) and optional
<id>.mask label files.
"""

import json
import math
import os
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.ndimage import gaussian_filter

from . import ksfile, mri
from .errors import ValidationError


def ellipse_image(h, w, cy, cx, ry, rx, angle, amplitude):
    """Indicator of one rotated ellipse scaled by a complex amplitude."""
    yy, xx = np.mgrid[0:h, 0:w]
    dy, dx = yy - cy, xx - cx
    c, s = math.cos(angle), math.sin(angle)
    u = (c * dx + s * dy) / rx
    v = (-s * dx + c * dy) / ry
    return ((u * u + v * v) <= 1.0) * amplitude


def generate_phantom(h, w, n_ellipses, seed):
    """Random ellipse superposition, Gaussian-smoothed, max magnitude 1."""
    if n_ellipses < 1:
        raise ValidationError("need at least one ellipse")
    rng = np.random.default_rng(seed)
    img = np.zeros((h, w), dtype=complex)
    for _ in range(n_ellipses):
        cy = rng.uniform(0.2 * h, 0.8 * h)
        cx = rng.uniform(0.2 * w, 0.8 * w)
        ry = rng.uniform(0.06, 0.28) * h
        rx = rng.uniform(0.06, 0.28) * w
        angle = rng.uniform(0, np.pi)
        amp = rng.uniform(0.4, 1.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        img += ellipse_image(h, w, cy, cx, ry, rx, angle, amp)
    img = gaussian_filter(img.real, 1.0) + 1j * gaussian_filter(img.imag, 1.0)
    peak = np.max(np.abs(img))
    if peak > 0:
        img = img / peak
    return img


def simulate_coil_maps(c, h, w, seed):
    """Smooth complex coil profiles, sum-of-squares normalized exactly."""
    if c < 1:
        raise ValidationError("need at least one coil")
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w]
    radius = 0.55 * min(h, w)
    width = 0.5 * min(h, w)
    maps = np.empty((c, h, w), dtype=complex)
    for ci in range(c):
        theta = 2 * np.pi * ci / c + rng.uniform(-0.2, 0.2)
        cy = h / 2 + radius * math.sin(theta)
        cx = w / 2 + radius * math.cos(theta)
        mag = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * width**2))
        ramp = (
            rng.uniform(-1.5, 1.5) * (xx / w)
            + rng.uniform(-1.5, 1.5) * (yy / h)
            + rng.uniform(0, 2 * np.pi)
        )
        maps[ci] = mag * np.exp(1j * ramp)
    sos = np.sqrt(np.sum(np.abs(maps) ** 2, axis=0))
    return maps / sos


def add_noise(y, sigma, seed):
    """i.i.d. circular complex Gaussian, std sigma per real component."""
    if sigma < 0:
        raise ValidationError("noise sigma must be nonnegative")
    if sigma == 0:
        return y.copy()
    rng = np.random.default_rng(seed)
    return y + sigma * (
        rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
    )


@dataclass
class DatasetConfig:
    h: int = 64
    w: int = 64
    coils: int = 4
    accel: float = 4.0
    noise_sigma: float = 0.005
    low_freq_width: int = 0  # 0 means: even-rounded 8% of w
    min_ellipses: int = 3
    max_ellipses: int = 8

    def resolved_low_freq_width(self):
        return self.low_freq_width or mri.default_band_width(self.w)

    def budget(self):
        if self.accel < 1:
            raise ValidationError("acceleration factor must be >= 1")
        return int(self.w // self.accel)


@dataclass
class DatasetManifest:
    version: int
    h: int
    w: int
    coils: int
    accel: float
    noise_sigma: float
    low_freq_width: int
    budget: int
    seed: int
    train: list = field(default_factory=list)
    test: list = field(default_factory=list)

    @property
    def n_train(self):
        return len(self.train)

    @property
    def n_test(self):
        return len(self.test)

    def save(self, data_dir):
        path = os.path.join(data_dir, "manifest.json")
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, data_dir):
        path = os.path.join(data_dir, "manifest.json")
        with open(path) as fh:
            return cls(**json.load(fh))


@dataclass
class ScanRecord:
    """One training example: image, maps, full k-space, low-frequency
    observation and, once labeled, its reference mask."""

    id: str
    x_gt: np.ndarray
    maps: np.ndarray
    y_full: np.ndarray
    z: np.ndarray
    m_ref: mri.SamplingMask | None = None


def _record_seeds(seed, index):
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return ss.spawn(3)


def synthesize_record(rec_id, index, cfg, seed):
    s_phantom, s_maps, s_noise = _record_seeds(seed, index)
    rng = np.random.default_rng(s_phantom)
    n_ell = int(rng.integers(cfg.min_ellipses, cfg.max_ellipses + 1))
    x = generate_phantom(cfg.h, cfg.w, n_ell, rng)
    maps = simulate_coil_maps(cfg.coils, cfg.h, cfg.w, s_maps)
    y = mri.forward(x, maps, mri.SamplingMask.full(cfg.w))
    y = add_noise(y, cfg.noise_sigma, s_noise)
    z = mri.extract_lowfreq(y, cfg.resolved_low_freq_width())
    return ScanRecord(rec_id, x, maps, y, z)


def record_path(data_dir, rec_id):
    return os.path.join(data_dir, f"{rec_id}.ksf")


def mask_path(data_dir, rec_id):
    return os.path.join(data_dir, f"{rec_id}.mask")


def save_record(data_dir, rec):
    ksfile.save(
        record_path(data_dir, rec.id),
        {
            "x_gt": mri.to_channels(rec.x_gt),
            "maps": mri.to_channels(rec.maps),
            "y_full": mri.to_channels(rec.y_full),
            "z": mri.to_channels(rec.z),
        },
    )


def load_record(data_dir, rec_id):
    entries = ksfile.load(record_path(data_dir, rec_id))
    rec = ScanRecord(
        id=rec_id,
        x_gt=mri.from_channels(entries["x_gt"]),
        maps=mri.from_channels(entries["maps"]),
        y_full=mri.from_channels(entries["y_full"]),
        z=mri.from_channels(entries["z"]),
    )
    mpath = mask_path(data_dir, rec_id)
    if os.path.exists(mpath):
        rec.m_ref = mri.SamplingMask.from_file(mpath)
    return rec


def build_dataset(data_dir, n_train, n_test, cfg, seed):
    """Write manifest plus per-record containers; train/test seed streams
    are disjoint, so rebuilding with one seed is byte-identical."""
    os.makedirs(data_dir, exist_ok=True)
    manifest = DatasetManifest(
        version=1,
        h=cfg.h,
        w=cfg.w,
        coils=cfg.coils,
        accel=cfg.accel,
        noise_sigma=cfg.noise_sigma,
        low_freq_width=cfg.resolved_low_freq_width(),
        budget=cfg.budget(),
        seed=seed,
    )
    if manifest.budget < manifest.low_freq_width:
        raise ValidationError(
            f"budget {manifest.budget} smaller than the forced band "
            f"{manifest.low_freq_width}; lower the acceleration"
        )
    for i in range(n_train):
        rec = synthesize_record(f"train-{i:04d}", i, cfg, seed)
        save_record(data_dir, rec)
        manifest.train.append(rec.id)
    for j in range(n_test):
        rec = synthesize_record(f"test-{j:04d}", 10_000_000 + j, cfg, seed)
        save_record(data_dir, rec)
        manifest.test.append(rec.id)
    manifest.save(data_dir)
    return manifest


def validate_dataset(data_dir):
    """Check every manifest-listed record file exists and parses."""
    manifest = DatasetManifest.load(data_dir)
    for rec_id in manifest.train + manifest.test:
        rec = load_record(data_dir, rec_id)
        if rec.x_gt.shape != (manifest.h, manifest.w):
            raise ValidationError(f"{rec_id}: image dims disagree with manifest")
        if rec.maps.shape[0] != manifest.coils:
            raise ValidationError(f"{rec_id}: coil count disagrees with manifest")
    return manifest
