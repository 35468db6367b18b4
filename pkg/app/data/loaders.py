"""
데이터셋 파일 적재
IDX (MNIST, Fashion-MNIST) 와 CIFAR-10 바이너리 v1 형식을 읽고 씁니다.
네트워크로 내려받지 않으며, 경로는 설정으로 전달됩니다.
"""
import gzip
import logging
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from ..exceptions import DataError
from .dataset import CLASS_NAMES, Dataset

logger = logging.getLogger(__name__)

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801
CIFAR_RECORD_BYTES = 1 + 3 * 32 * 32

DATASET_IDS = ("mnist", "fashion_mnist", "cifar10")

IDX_FILES = {
    True: ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    False: ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}
CIFAR_DIR = "cifar-10-batches-bin"
CIFAR_TRAIN_FILES = tuple(f"data_batch_{i}.bin" for i in range(1, 6))
CIFAR_TEST_FILES = ("test_batch.bin",)


def _read_bytes(path: Path) -> bytes:
    """파일 전체 읽기 (.gz 이면 압축 해제)"""
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}", path=str(path))
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as f:
        return f.read()


def _parse_idx(raw: bytes, expected_magic: int, path: Path) -> np.ndarray:
    """IDX 헤더(빅엔디언)를 검사하고 unsigned byte 배열을 반환"""
    if len(raw) < 8:
        raise DataError(f"{path}: truncated IDX header", path=str(path), offset=len(raw))
    magic, count = struct.unpack(">II", raw[:8])
    if magic != expected_magic:
        raise DataError(
            f"{path}: bad IDX magic 0x{magic:08x}, expected 0x{expected_magic:08x}",
            path=str(path),
        )
    ndim = magic & 0xFF
    header_bytes = 4 + 4 * ndim
    if len(raw) < header_bytes:
        raise DataError(f"{path}: truncated IDX header", path=str(path), offset=len(raw))
    dims = (count,) + struct.unpack(f">{ndim - 1}I", raw[8:header_bytes]) if ndim > 1 else (count,)
    expected = int(np.prod(dims))
    payload = raw[header_bytes:]
    if len(payload) < expected:
        raise DataError(
            f"{path}: truncated IDX payload ({len(payload)} of {expected} bytes)",
            path=str(path),
            offset=header_bytes + len(payload),
        )
    return np.frombuffer(payload, dtype=np.uint8, count=expected).reshape(dims)


def load_idx(images_path: Path, labels_path: Path, source: str = "mnist") -> Dataset:
    """IDX 이미지/레이블 파일 쌍을 적재 (픽셀은 [0, 1] 로 스케일)"""
    images_path, labels_path = Path(images_path), Path(labels_path)
    images = _parse_idx(_read_bytes(images_path), IDX_IMAGE_MAGIC, images_path)
    labels = _parse_idx(_read_bytes(labels_path), IDX_LABEL_MAGIC, labels_path)
    if images.shape[0] != labels.shape[0]:
        raise DataError(
            f"image/label count mismatch: {images.shape[0]} in {images_path.name}, "
            f"{labels.shape[0]} in {labels_path.name}"
        )
    if labels.size and labels.max() > 9:
        raise DataError(f"{labels_path}: label {int(labels.max())} out of range [0, 9]")

    pixels = (images.astype(np.float32) / 255.0)[:, None, :, :]
    return Dataset(
        images=pixels,
        labels=labels.astype(np.int64),
        source=source,
        class_names=CLASS_NAMES.get(source, CLASS_NAMES["mnist"]),
    )


def load_cifar10(batch_paths: Sequence[Path]) -> Dataset:
    """CIFAR-10 바이너리 배치들을 적재 (레이블 1바이트 + R, G, B 평면 순 3072바이트)"""
    images, labels = [], []
    for path in batch_paths:
        path = Path(path)
        raw = _read_bytes(path)
        if len(raw) % CIFAR_RECORD_BYTES:
            complete = len(raw) // CIFAR_RECORD_BYTES
            raise DataError(
                f"{path}: length {len(raw)} is not a multiple of {CIFAR_RECORD_BYTES}; "
                f"incomplete record at byte offset {complete * CIFAR_RECORD_BYTES}",
                path=str(path),
                offset=complete * CIFAR_RECORD_BYTES,
            )
        records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD_BYTES)
        batch_labels = records[:, 0]
        bad = np.flatnonzero(batch_labels > 9)
        if bad.size:
            index = int(bad[0])
            raise DataError(
                f"{path}: label {int(batch_labels[index])} > 9 in record {index}",
                path=str(path),
                offset=index * CIFAR_RECORD_BYTES,
            )
        images.append(records[:, 1:].reshape(-1, 3, 32, 32))
        labels.append(batch_labels)

    if not images:
        raise DataError("load_cifar10 requires at least one batch file")
    pixels = np.concatenate(images).astype(np.float32) / 255.0
    return Dataset(
        images=pixels,
        labels=np.concatenate(labels).astype(np.int64),
        source="cifar10",
        class_names=CLASS_NAMES["cifar10"],
    )


def write_idx(dataset: Dataset, images_path: Path, labels_path: Path) -> None:
    """단일 채널 데이터셋을 IDX 파일 쌍으로 저장 (픽셀은 0..255 로 반올림)"""
    n, c, h, w = dataset.images.shape
    if c != 1:
        raise DataError(f"IDX stores single-channel images, got {c} channels")
    pixels = np.rint(dataset.images[:, 0] * 255.0).astype(np.uint8)
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGE_MAGIC, n, h, w))
        f.write(pixels.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABEL_MAGIC, n))
        f.write(dataset.labels.astype(np.uint8).tobytes())


def write_cifar10(dataset: Dataset, path: Path) -> None:
    """(N, 3, 32, 32) 데이터셋을 CIFAR-10 바이너리 배치 하나로 저장"""
    if dataset.images.shape[1:] != (3, 32, 32):
        raise DataError(f"CIFAR-10 records hold (3, 32, 32) images, got {dataset.images.shape[1:]}")
    pixels = np.rint(dataset.images * 255.0).astype(np.uint8).reshape(len(dataset), -1)
    records = np.concatenate([dataset.labels.astype(np.uint8)[:, None], pixels], axis=1)
    with open(path, "wb") as f:
        f.write(records.tobytes())


def _find(directory: Path, name: str) -> Path:
    """압축/비압축 파일 중 존재하는 것을 반환"""
    plain = directory / name
    if plain.exists():
        return plain
    gz = directory / f"{name}.gz"
    if gz.exists():
        return gz
    raise DataError(f"dataset file not found: {plain} (or {gz.name})", path=str(plain))


def load_dataset(dataset_id: str, data_dir: Path, train: bool = True) -> Dataset:
    """데이터셋 ID 로 공식 학습/테스트 세트 적재"""
    data_dir = Path(data_dir)
    if dataset_id in ("mnist", "fashion_mnist"):
        directory = data_dir / dataset_id
        images_name, labels_name = IDX_FILES[train]
        dataset = load_idx(_find(directory, images_name), _find(directory, labels_name), source=dataset_id)
    elif dataset_id == "cifar10":
        directory = data_dir / CIFAR_DIR
        names = CIFAR_TRAIN_FILES if train else CIFAR_TEST_FILES
        dataset = load_cifar10([_find(directory, name) for name in names])
    else:
        raise DataError(f"unknown dataset id '{dataset_id}' (expected one of {', '.join(DATASET_IDS)})")

    logger.info("loaded %s %s split: %d images of shape %s",
                dataset_id, "train" if train else "test", len(dataset), dataset.input_shape)
    return dataset
