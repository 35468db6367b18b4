import gzip
import struct

import numpy as np
import pytest

from app.data import Dataset, augment, load_cifar10, load_dataset, load_idx, split, write_cifar10, write_idx
from app.data.loaders import CIFAR_DIR, CIFAR_RECORD_BYTES, IDX_IMAGE_MAGIC, IDX_LABEL_MAGIC
from app.exceptions import DataError

from conftest import make_dataset


def idx_images(pixels):
    n, h, w = pixels.shape
    return struct.pack(">IIII", IDX_IMAGE_MAGIC, n, h, w) + pixels.astype(np.uint8).tobytes()


def idx_labels(labels):
    return struct.pack(">II", IDX_LABEL_MAGIC, len(labels)) + bytes(labels)


def cifar_record(label, fill=(0, 0, 0)):
    planes = [bytes([value]) * 1024 for value in fill]
    return bytes([label]) + b"".join(planes)


class ScriptedRng:
    """정해진 값을 차례로 돌려주는 가짜 난수 생성기"""

    def __init__(self, integers, random):
        self._integers = list(integers)
        self._random = list(random)

    def integers(self, low, high=None, size=None):
        return self._integers.pop(0)

    def random(self):
        return self._random.pop(0)


@pytest.fixture
def idx_pair(tmp_path):
    pixels = np.array([[[0, 255, 51], [102, 0, 0]], [[255, 255, 255], [0, 0, 0]]], dtype=np.uint8)
    images = tmp_path / "images-idx3-ubyte"
    labels = tmp_path / "labels-idx1-ubyte"
    images.write_bytes(idx_images(pixels))
    labels.write_bytes(idx_labels([7, 2]))
    return images, labels


def test_load_idx_scales_pixels(idx_pair):
    dataset = load_idx(*idx_pair)
    assert dataset.images.shape == (2, 1, 2, 3)
    assert dataset.images.dtype == np.float32
    assert dataset.images[0, 0, 0, 1] == pytest.approx(1.0)
    assert dataset.images[0, 0, 0, 2] == pytest.approx(0.2)
    assert list(dataset.labels) == [7, 2]


def test_load_idx_from_gzip(idx_pair, tmp_path):
    images, labels = idx_pair
    gz_images = tmp_path / "i.gz"
    gz_labels = tmp_path / "l.gz"
    gz_images.write_bytes(gzip.compress(images.read_bytes()))
    gz_labels.write_bytes(gzip.compress(labels.read_bytes()))
    assert np.array_equal(load_idx(gz_images, gz_labels).images, load_idx(images, labels).images)


def test_idx_bad_magic(idx_pair):
    images, labels = idx_pair
    raw = bytearray(images.read_bytes())
    raw[3] = 0x01
    images.write_bytes(bytes(raw))
    with pytest.raises(DataError, match="bad IDX magic"):
        load_idx(images, labels)


def test_idx_truncated_payload_reports_offset(idx_pair):
    images, labels = idx_pair
    images.write_bytes(images.read_bytes()[:-2])
    with pytest.raises(DataError) as info:
        load_idx(images, labels)
    assert info.value.context["offset"] == 16 + 10


def test_idx_count_mismatch(idx_pair):
    images, labels = idx_pair
    labels.write_bytes(idx_labels([1]))
    with pytest.raises(DataError, match="count mismatch"):
        load_idx(images, labels)


def test_idx_missing_file(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_idx(tmp_path / "nope", tmp_path / "nope2")


def test_idx_round_trip(tmp_path):
    dataset = make_dataset(12, shape=(1, 6, 5))
    write_idx(dataset, tmp_path / "img", tmp_path / "lbl")
    loaded = load_idx(tmp_path / "img", tmp_path / "lbl")
    assert np.allclose(loaded.images, dataset.images, atol=1 / 255)
    assert np.array_equal(loaded.labels, dataset.labels)


def test_load_cifar_plane_order(tmp_path):
    path = tmp_path / "batch.bin"
    path.write_bytes(cifar_record(3, (255, 0, 51)) + cifar_record(9, (0, 255, 0)))
    dataset = load_cifar10([path])
    assert dataset.images.shape == (2, 3, 32, 32)
    assert list(dataset.labels) == [3, 9]
    assert np.allclose(dataset.images[0, :, 5, 7], [1.0, 0.0, 0.2])
    assert dataset.class_names[3] == "cat"


def test_cifar_truncated_record_offset(tmp_path):
    path = tmp_path / "batch.bin"
    path.write_bytes(cifar_record(1) + cifar_record(2)[:100])
    with pytest.raises(DataError) as info:
        load_cifar10([path])
    assert info.value.context["offset"] == CIFAR_RECORD_BYTES


def test_cifar_label_out_of_range(tmp_path):
    path = tmp_path / "batch.bin"
    path.write_bytes(cifar_record(1) + cifar_record(10))
    with pytest.raises(DataError) as info:
        load_cifar10([path])
    assert info.value.context["offset"] == CIFAR_RECORD_BYTES


def test_cifar_round_trip(tmp_path):
    dataset = make_dataset(5, shape=(3, 32, 32), source="cifar10")
    write_cifar10(dataset, tmp_path / "b.bin")
    loaded = load_cifar10([tmp_path / "b.bin"])
    assert np.allclose(loaded.images, dataset.images, atol=1 / 255)


def test_load_dataset_layout(tmp_path):
    mnist = make_dataset(10, shape=(1, 28, 28))
    (tmp_path / "mnist").mkdir()
    write_idx(mnist, tmp_path / "mnist" / "t10k-images-idx3-ubyte", tmp_path / "mnist" / "t10k-labels-idx1-ubyte")
    assert len(load_dataset("mnist", tmp_path, train=False)) == 10
    with pytest.raises(DataError):
        load_dataset("mnist", tmp_path, train=True)

    cifar = make_dataset(4, shape=(3, 32, 32))
    (tmp_path / CIFAR_DIR).mkdir()
    write_cifar10(cifar, tmp_path / CIFAR_DIR / "test_batch.bin")
    loaded = load_dataset("cifar10", tmp_path, train=False)
    assert loaded.source == "cifar10" and loaded.input_shape == (3, 32, 32)


def test_unknown_dataset_id(tmp_path):
    with pytest.raises(DataError, match="unknown dataset"):
        load_dataset("svhn", tmp_path)


def test_dataset_validates_labels_and_counts():
    with pytest.raises(DataError):
        Dataset(images=np.zeros((2, 1, 4, 4), dtype=np.float32), labels=np.array([0, 10]))
    with pytest.raises(DataError):
        Dataset(images=np.zeros((2, 1, 4, 4), dtype=np.float32), labels=np.array([0]))


def test_dataset_is_read_only():
    dataset = make_dataset(4)
    with pytest.raises(ValueError):
        dataset.images[0, 0, 0, 0] = 5.0


def test_split_is_disjoint_and_deterministic():
    dataset = make_dataset(50)
    a_train, a_eval = split(dataset, [30, 15], seed=1)
    b_train, b_eval = split(dataset, [30, 15], seed=1)
    assert len(a_train) == 30 and len(a_eval) == 15
    assert np.array_equal(a_train.images, b_train.images)
    train_rows = {row.tobytes() for row in a_train.images}
    assert not any(row.tobytes() in train_rows for row in a_eval.images)
    other, _ = split(dataset, [30, 15], seed=2)
    assert not np.array_equal(other.labels, a_train.labels)
    with pytest.raises(DataError):
        split(dataset, [40, 20], seed=0)


def test_augment_identity_crop_without_flip():
    image = np.arange(2 * 5 * 6, dtype=np.float32).reshape(2, 5, 6)
    out = augment(image, ScriptedRng([4, 4], [0.9]))
    assert np.array_equal(out, image)


def test_augment_flip():
    image = np.arange(5 * 6, dtype=np.float32).reshape(1, 5, 6)
    out = augment(image, ScriptedRng([4, 4], [0.1]))
    assert np.array_equal(out, image[:, :, ::-1])


def test_augment_corner_crop_pads_with_zeros():
    image = np.ones((1, 6, 6), dtype=np.float32)
    out = augment(image, ScriptedRng([0, 0], [0.9]))
    assert out.shape == image.shape
    assert np.all(out[:, :4, :] == 0) and np.all(out[:, :, :4] == 0)
    assert np.all(out[:, 4:, 4:] == 1)
