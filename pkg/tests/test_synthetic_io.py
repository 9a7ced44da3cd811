import struct

import numpy as np
import pytest

from stochcca import (SyntheticSpec, exact_solution, generate_synthetic,
                      load_csv_pair, load_mnist_idx_split, planted_dataset,
                      save_csv_pair)


def test_generate_synthetic_population_correlations():
    spec = SyntheticSpec(8, 6, 50_000, [0.9, 0.5], noise_scale=1.0, seed=13)
    ds = generate_synthetic(spec, 1e-4, 1e-4)
    ref = exact_solution(ds)
    assert abs(ref.rho[0] - 0.9) <= 0.02
    assert abs(ref.rho[1] - 0.5) <= 0.02


def test_generate_synthetic_null_correlations():
    spec = SyntheticSpec(6, 6, 50_000, [0.0, 0.0], seed=14)
    ds = generate_synthetic(spec, 1e-4, 1e-4)
    ref = exact_solution(ds)
    assert ref.rho[0] <= 0.05


def test_generate_synthetic_deterministic():
    spec = SyntheticSpec(5, 4, 300, [0.7], seed=15)
    d1 = generate_synthetic(spec)
    d2 = generate_synthetic(spec)
    np.testing.assert_array_equal(d1.x_view, d2.x_view)
    np.testing.assert_array_equal(d1.y_view, d2.y_view)


def test_synthetic_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(2, 2, 100, [0.5, 0.4, 0.3])  # too many correlations
    with pytest.raises(ValueError):
        SyntheticSpec(3, 3, 100, [0.5, 0.7])       # not descending
    with pytest.raises(ValueError):
        SyntheticSpec(3, 3, 100, [1.0])            # out of range


def test_planted_dataset_exact_spectrum():
    ds = planted_dataset([0.9, 0.5], 4, 3, 60, seed=16)
    ref = exact_solution(ds)
    np.testing.assert_allclose(ref.rho[:2], [0.9, 0.5], atol=1e-10)
    sxx = ds.sxx.dense()
    np.testing.assert_allclose(sxx, np.eye(4), atol=1e-12)


def test_planted_dataset_with_gamma():
    ds = planted_dataset([0.8, 0.3], 3, 3, 50, gamma=1e-2, seed=17)
    ref = exact_solution(ds)
    np.testing.assert_allclose(ref.rho[:2], [0.8, 0.3], atol=1e-10)
    np.testing.assert_allclose(ds.sxx.dense(), np.eye(3), atol=1e-12)


def test_csv_round_trip(tmp_path):
    spec = SyntheticSpec(4, 3, 80, [0.6], seed=18)
    ds = generate_synthetic(spec, 1e-3, 1e-3)
    px, py = tmp_path / "x.csv", tmp_path / "y.csv"
    save_csv_pair(ds, px, py)
    loaded = load_csv_pair(px, py, 1e-3, 1e-3)
    np.testing.assert_allclose(loaded.x_view, ds.x_view, atol=1e-12)
    np.testing.assert_allclose(loaded.y_view, ds.y_view, atol=1e-12)


def test_csv_tiny_literal(tmp_path):
    px, py = tmp_path / "x.csv", tmp_path / "y.csv"
    px.write_text("1,2\n3,4\n")
    py.write_text("1,2\n3,4\n")
    ds = load_csv_pair(px, py)
    assert (ds.dx, ds.dy, ds.n_samples) == (2, 2, 2)


def test_csv_single_row_dataset(tmp_path):
    px, py = tmp_path / "x.csv", tmp_path / "y.csv"
    px.write_text("1.5,2.5\n")
    py.write_text("4.0,5.0,6.0\n")
    ds = load_csv_pair(px, py, 1e-2, 1e-2)
    assert ds.n_samples == 1
    assert np.abs(ds.x_view).max() == 0.0  # centering removes everything
    ref = exact_solution(ds)
    assert ref.rho[0] == pytest.approx(0.0, abs=1e-12)


def test_csv_error_messages(tmp_path):
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1,2\n3,4,5\n")
    ok = tmp_path / "ok.csv"
    ok.write_text("1,2\n3,4\n")
    with pytest.raises(ValueError, match=r"line 2"):
        load_csv_pair(ragged, ok)

    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,zap\n")
    with pytest.raises(ValueError, match=r"line 2.*zap"):
        load_csv_pair(bad, ok)

    short = tmp_path / "short.csv"
    short.write_text("1,2\n")
    with pytest.raises(ValueError, match=r"mismatch.*2.*1|mismatch"):
        load_csv_pair(ok, short)


def make_idx3(images):
    images = np.asarray(images, dtype=np.uint8)
    header = struct.pack(">iiii", 0x00000803, images.shape[0], 28, 28)
    return header + images.tobytes()


def test_mnist_idx_split(tmp_path):
    rng = np.random.default_rng(19)
    imgs = rng.integers(0, 256, size=(5, 28, 28), dtype=np.uint16).astype(np.uint8)
    p = tmp_path / "imgs.idx3"
    p.write_bytes(make_idx3(imgs))
    ds = load_mnist_idx_split(p, 1e-3, 1e-3)
    assert (ds.dx, ds.dy, ds.n_samples) == (392, 392, 5)
    # left half of image 2, scaled and centered, matches the view column
    left = imgs[:, :, :14].reshape(5, -1).astype(float) / 255.0
    left -= left.mean(axis=0, keepdims=True)
    np.testing.assert_allclose(ds.x_view[:, 2], left[2], atol=1e-12)


def test_mnist_blank_images(tmp_path):
    p = tmp_path / "blank.idx3"
    p.write_bytes(make_idx3(np.zeros((2, 28, 28), dtype=np.uint8)))
    ds = load_mnist_idx_split(p)
    assert np.abs(ds.x_view).max() == 0.0
    assert np.abs(ds.y_view).max() == 0.0


def test_mnist_bad_magic(tmp_path):
    p = tmp_path / "bad.idx3"
    p.write_bytes(struct.pack(">iiii", 0x00000801, 1, 28, 28) + b"\x00" * 784)
    with pytest.raises(ValueError, match="magic"):
        load_mnist_idx_split(p)


def test_mnist_truncated(tmp_path):
    p = tmp_path / "trunc.idx3"
    p.write_bytes(make_idx3(np.zeros((3, 28, 28), dtype=np.uint8))[:-100])
    with pytest.raises(ValueError, match="truncated"):
        load_mnist_idx_split(p)
