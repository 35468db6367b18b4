"""
데이터셋 컨테이너와 결정적 분할
"""
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..exceptions import DataError

CLASS_NAMES = {
    "mnist": tuple(str(i) for i in range(10)),
    "fashion_mnist": (
        "T-shirt/top", "Trouser", "Pullover", "Dress", "Coat",
        "Sandal", "Shirt", "Sneaker", "Bag", "Ankle boot",
    ),
    "cifar10": (
        "airplane", "automobile", "bird", "cat", "deer",
        "dog", "frog", "horse", "ship", "truck",
    ),
}


@dataclass(frozen=True)
class Dataset:
    """
    이미지 (N, C, H, W) 값 범위 [0, 1] 과 클래스 인덱스 레이블
    적재 후에는 읽기 전용으로 공유합니다.
    """

    images: np.ndarray
    labels: np.ndarray
    source: str = "synthetic"
    class_names: tuple[str, ...] = field(default_factory=lambda: tuple(str(i) for i in range(10)))

    def __post_init__(self):
        if self.images.ndim != 4:
            raise DataError(f"images must be (N, C, H, W), got shape {self.images.shape}")
        if self.images.shape[0] != self.labels.shape[0]:
            raise DataError(
                f"image/label count mismatch: {self.images.shape[0]} vs {self.labels.shape[0]}",
                source=self.source,
            )
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise DataError(f"labels must lie in [0, {len(self.class_names) - 1}]", source=self.source)
        self.images.setflags(write=False)
        self.labels.setflags(write=False)

    def __len__(self) -> int:
        return self.images.shape[0]

    @property
    def input_shape(self) -> tuple[int, int, int]:
        return tuple(self.images.shape[1:])

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def subset(self, indices: np.ndarray) -> "Dataset":
        """주어진 인덱스로 부분 데이터셋 생성"""
        return Dataset(
            images=self.images[indices],
            labels=self.labels[indices],
            source=self.source,
            class_names=self.class_names,
        )


def split(dataset: Dataset, sizes: Sequence[int], seed: int) -> list[Dataset]:
    """
    시드 기반 균등 셔플 후 앞에서부터 크기대로 분할
    분할들은 서로 겹치지 않으며, 같은 시드면 같은 결과를 냅니다.
    """
    if any(s < 0 for s in sizes):
        raise DataError(f"split sizes must be non-negative: {list(sizes)}")
    if sum(sizes) > len(dataset):
        raise DataError(f"split sizes {list(sizes)} exceed dataset size {len(dataset)}")

    order = np.random.default_rng(seed).permutation(len(dataset))
    parts = []
    start = 0
    for size in sizes:
        parts.append(dataset.subset(order[start:start + size]))
        start += size
    return parts


