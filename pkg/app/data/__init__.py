from .dataset import Dataset, split, CLASS_NAMES
from .augment import augment, augment_batch
from .loaders import (
    DATASET_IDS, load_idx, load_cifar10, load_dataset, write_idx, write_cifar10
)

__all__ = [
    "Dataset", "split", "CLASS_NAMES",
    "augment", "augment_batch",
    "DATASET_IDS", "load_idx", "load_cifar10", "load_dataset", "write_idx", "write_cifar10",
]
