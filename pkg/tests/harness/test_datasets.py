import numpy as np
import pytest

from src.engine.errors import EmptySetError, LabelRangeError, TruncatedFileError
from src.harness.datasets import (
    CIFAR_RECORD,
    Dataset,
    Provenance,
    Split,
    load_cifar10,
    quantize,
    read_adversarial_set,
    synth_dataset,
    write_adversarial_set,
)


def cifar_bytes(labels, rng) -> bytes:
    records = np.empty((len(labels), CIFAR_RECORD), dtype=np.uint8)
    records[:, 0] = labels
    records[:, 1:] = rng.integers(0, 256, size=(len(labels), CIFAR_RECORD - 1), dtype=np.uint8)
    return records.tobytes()


def test_cifar_record_layout(tmp_path, rng):
    raw = cifar_bytes([3, 9], rng)
    path = tmp_path / "test_batch.bin"
    path.write_bytes(raw)
    ds = load_cifar10(path)

    assert ds.images.shape == (2, 3, 32, 32)
    np.testing.assert_array_equal(ds.labels, [3, 9])
    assert ds.split is Split.TEST and ds.provenance is Provenance.CIFAR10
    # first pixel byte of record 0 is R[0,0]; byte 1025 is G[0,0]
    assert ds.images[0, 0, 0, 0] == raw[1] / 255.0
    assert ds.images[0, 1, 0, 0] == raw[1 + 1024] / 255.0
    assert ds.images[1, 2, 31, 31] == raw[2 * CIFAR_RECORD - 1] / 255.0


def test_cifar_directory_by_split(tmp_path, rng):
    (tmp_path / "test_batch.bin").write_bytes(cifar_bytes([0, 1, 2], rng))
    assert len(load_cifar10(tmp_path, split="test")) == 3
    with pytest.raises(FileNotFoundError):
        load_cifar10(tmp_path, split="train")

    for i in range(1, 6):
        (tmp_path / f"data_batch_{i}.bin").write_bytes(cifar_bytes([i], rng))
    train = load_cifar10(tmp_path, split="train")
    np.testing.assert_array_equal(train.labels, [1, 2, 3, 4, 5])
    assert train.split is Split.TRAIN


def test_cifar_truncated(tmp_path, rng):
    path = tmp_path / "test_batch.bin"
    path.write_bytes(cifar_bytes([1], rng)[:-1])
    with pytest.raises(TruncatedFileError):
        load_cifar10(path)


def test_cifar_label_out_of_range(tmp_path, rng):
    path = tmp_path / "test_batch.bin"
    path.write_bytes(cifar_bytes([10], rng))
    with pytest.raises(LabelRangeError):
        load_cifar10(path)


def test_synthetic_is_deterministic():
    a = synth_dataset([7, 0], n=20, num_classes=4, shape=(3, 8, 8))
    b = synth_dataset([7, 0], n=20, num_classes=4, shape=(3, 8, 8))
    c = synth_dataset([7, 1], n=20, num_classes=4, shape=(3, 8, 8))
    np.testing.assert_array_equal(a.images, b.images)
    assert not np.array_equal(a.images, c.images)


def test_synthetic_is_balanced_and_in_range():
    ds = synth_dataset(1, n=42, num_classes=4, shape=(3, 16, 16))
    counts = np.bincount(ds.labels, minlength=4)
    assert counts.max() - counts.min() <= 1
    assert ds.images.min() >= 0.0 and ds.images.max() <= 1.0
    assert ds.provenance is Provenance.SYNTHETIC
    assert ds.dataset_id == "synthetic-train-n42"


def test_synthetic_needs_one_sample_per_class():
    with pytest.raises(ValueError):
        synth_dataset(0, n=3, num_classes=4)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.full((1, 1, 8, 8), 2.0), np.array([0]), Split.TEST, Provenance.SYNTHETIC, 2)
    with pytest.raises(LabelRangeError):
        Dataset(np.zeros((1, 1, 8, 8)), np.array([2]), Split.TEST, Provenance.SYNTHETIC, 2)


def test_subset_takes_leading_samples(small_dataset):
    sub = small_dataset.subset(5)
    np.testing.assert_array_equal(sub.labels, small_dataset.labels[:5])
    assert small_dataset.subset(None) is small_dataset
    assert small_dataset.subset(10_000) is small_dataset
    with pytest.raises(EmptySetError):
        small_dataset.subset(0)


def test_adversarial_set_round_trip(tmp_path, small_dataset):
    path = write_adversarial_set(small_dataset, tmp_path / "attacks" / "fgsm.advset")
    assert path.read_bytes().startswith(b"FREQLENS-ADVSET v1 3 8 8 48\n")
    back = read_adversarial_set(path, num_classes=4)
    np.testing.assert_array_equal(back.labels, small_dataset.labels)
    np.testing.assert_array_equal(back.images, quantize(small_dataset.images) / 255.0)
    assert back.provenance is Provenance.ADVERSARIAL
    assert np.max(np.abs(back.images - small_dataset.images)) <= 0.5 / 255 + 1e-12


def test_adversarial_set_truncated(tmp_path, small_dataset):
    path = write_adversarial_set(small_dataset, tmp_path / "a.advset")
    path.write_bytes(path.read_bytes()[:-10])
    with pytest.raises(TruncatedFileError):
        read_adversarial_set(path, num_classes=4)


def test_adversarial_set_bad_header(tmp_path):
    path = tmp_path / "junk.advset"
    path.write_bytes(b"NOT-AN-ADVSET v1 3 8 8 1\n" + bytes(193))
    with pytest.raises(TruncatedFileError):
        read_adversarial_set(path)
