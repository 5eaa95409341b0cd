import numpy as np
import pytest

from ksampler import datasynth, mri
from ksampler.errors import ValidationError


def test_single_ellipse_construction():
    img = datasynth.ellipse_image(16, 16, 8, 8, 4, 6, 0.0, 2.0 + 0j)
    assert img[8, 8] == 2.0
    assert img[8, 8 + 5] == 2.0  # inside along x
    assert img[8 + 5, 8] == 0.0  # outside along y
    assert img[0, 0] == 0.0


def test_phantom_deterministic_and_normalized():
    a = datasynth.generate_phantom(32, 32, 4, seed=5)
    b = datasynth.generate_phantom(32, 32, 4, seed=5)
    assert np.array_equal(a, b)
    assert np.max(np.abs(a)) == pytest.approx(1.0, abs=1e-12)


def test_phantom_seed_dependence():
    a = datasynth.generate_phantom(32, 32, 4, seed=1)
    b = datasynth.generate_phantom(32, 32, 4, seed=2)
    assert not np.array_equal(a, b)


def test_coil_maps_single_coil_unit_magnitude():
    maps = datasynth.simulate_coil_maps(1, 16, 16, seed=0)
    assert np.max(np.abs(np.abs(maps[0]) - 1.0)) < 1e-12


@pytest.mark.parametrize("c", [2, 4])
def test_coil_maps_sos_normalized(c):
    maps = datasynth.simulate_coil_maps(c, 16, 16, seed=3)
    sos = np.sum(np.abs(maps) ** 2, axis=0)
    assert np.max(np.abs(sos - 1.0)) < 1e-12


def test_coil_maps_distinct_across_seeds():
    a = datasynth.simulate_coil_maps(4, 16, 16, seed=0)
    b = datasynth.simulate_coil_maps(4, 16, 16, seed=1)
    assert not np.allclose(a, b)


def test_noise_zero_sigma_identity():
    y = np.ones((1, 4, 4), dtype=complex)
    out = datasynth.add_noise(y, 0.0, seed=0)
    assert np.array_equal(out, y)


def test_noise_negative_sigma_rejected():
    with pytest.raises(ValidationError):
        datasynth.add_noise(np.zeros((1, 4, 4), complex), -0.1, seed=0)


def test_noise_monte_carlo_moments():
    n = 1_000_000
    y = np.zeros((1, 1, n), dtype=complex)
    sigma = 0.3
    out = datasynth.add_noise(y, sigma, seed=7)
    comps = np.concatenate([out.real.ravel(), out.imag.ravel()])
    assert abs(comps.std() - sigma) / sigma < 0.02
    assert abs(comps.mean()) < 3 * sigma / np.sqrt(comps.size)


def test_build_dataset_and_roundtrip(tmp_path):
    cfg = datasynth.DatasetConfig(h=16, w=16, coils=2, noise_sigma=0.0)
    manifest = datasynth.build_dataset(tmp_path, 3, 2, cfg, seed=11)
    assert manifest.n_train == 3 and manifest.n_test == 2
    assert manifest.budget == 4
    files = sorted(p.name for p in tmp_path.glob("*.ksf"))
    assert len(files) == 5

    back = datasynth.DatasetManifest.load(tmp_path)
    assert back == manifest

    rec = datasynth.load_record(tmp_path, manifest.train[0])
    # noiseless full-mask synthesis chain: adjoint reproduces the phantom
    full = mri.SamplingMask.full(16)
    err = np.max(np.abs(mri.adjoint(rec.y_full, rec.maps, full) - rec.x_gt))
    assert err < 1e-10
    assert rec.z.shape == (16, manifest.low_freq_width)


def test_rebuild_is_byte_identical(tmp_path):
    cfg = datasynth.DatasetConfig(h=16, w=16, coils=2)
    d1, d2 = tmp_path / "a", tmp_path / "b"
    datasynth.build_dataset(d1, 2, 1, cfg, seed=4)
    datasynth.build_dataset(d2, 2, 1, cfg, seed=4)
    for p1 in sorted(d1.iterdir()):
        p2 = d2 / p1.name
        assert p1.read_bytes() == p2.read_bytes()


def test_record_roundtrip_bit_exact(tmp_path):
    cfg = datasynth.DatasetConfig(h=16, w=16, coils=3)
    rec = datasynth.synthesize_record("r0", 0, cfg, seed=2)
    datasynth.save_record(tmp_path, rec)
    back = datasynth.load_record(tmp_path, "r0")
    assert np.array_equal(back.x_gt, rec.x_gt)
    assert np.array_equal(back.maps, rec.maps)
    assert np.array_equal(back.y_full, rec.y_full)
    assert np.array_equal(back.z, rec.z)


def test_validate_dataset(tmp_path):
    cfg = datasynth.DatasetConfig(h=16, w=16, coils=2)
    datasynth.build_dataset(tmp_path, 2, 1, cfg, seed=0)
    manifest = datasynth.validate_dataset(tmp_path)
    assert manifest.n_train == 2


def test_infeasible_band_rejected(tmp_path):
    cfg = datasynth.DatasetConfig(h=16, w=16, coils=2, accel=16.0)
    with pytest.raises(ValidationError):
        datasynth.build_dataset(tmp_path, 1, 1, cfg, seed=0)
