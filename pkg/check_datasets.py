#!/usr/bin/env python
"""
데이터셋 파일 점검 스크립트
DATA_DIR 아래에 필요한 파일이 있는지, 크기와 체크섬이 맞는지 확인합니다.
내려받기는 하지 않습니다.

기대하는 배치:
    DATA_DIR/mnist/{train,t10k}-{images-idx3,labels-idx1}-ubyte[.gz]
    DATA_DIR/fashion_mnist/ (같은 파일 이름)
    DATA_DIR/cifar-10-batches-bin/{data_batch_1..5,test_batch}.bin
"""
import hashlib
import os
import sys
from pathlib import Path

sys.path.insert(0, os.path.dirname(__file__))

from app.config import settings
from app.data.loaders import CIFAR_DIR, CIFAR_RECORD_BYTES, CIFAR_TEST_FILES, CIFAR_TRAIN_FILES, IDX_FILES

# 공식 배포본(.gz) MD5
IDX_MD5 = {
    "mnist": {
        "train-images-idx3-ubyte.gz": "f68b3c2dcbeaaa9fbdd348bbdeb94873",
        "train-labels-idx1-ubyte.gz": "d53e105ee54ea40749a09fcbcd1e9432",
        "t10k-images-idx3-ubyte.gz": "9fb629c4189551a2d022fa330f9573f3",
        "t10k-labels-idx1-ubyte.gz": "ec29112dd5afa0611ce80d1b7f02629c",
    },
    "fashion_mnist": {
        "train-images-idx3-ubyte.gz": "8d4fb7e6c68d591d4c3dfef9ec88bf0d",
        "train-labels-idx1-ubyte.gz": "25c81989df183df01b3e8a0aad5dffbe",
        "t10k-images-idx3-ubyte.gz": "bef4ecab320f06d8554ea6380940ec79",
        "t10k-labels-idx1-ubyte.gz": "bb300cfdad3c16e7a12a480ee83cd310",
    },
}
# 압축 해제된 IDX 파일 크기 (헤더 포함)
IDX_SIZES = {
    "train-images-idx3-ubyte": 16 + 60000 * 28 * 28,
    "train-labels-idx1-ubyte": 8 + 60000,
    "t10k-images-idx3-ubyte": 16 + 10000 * 28 * 28,
    "t10k-labels-idx1-ubyte": 8 + 10000,
}
CIFAR_ARCHIVE = ("cifar-10-binary.tar.gz", "c32a1d4ab5d03f1284b67883e8d87530")
CIFAR_BATCH_BYTES = 10000 * CIFAR_RECORD_BYTES


def md5sum(path: Path) -> str:
    digest = hashlib.md5()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def check_idx(data_dir: Path, dataset_id: str) -> bool:
    ok = True
    directory = data_dir / dataset_id
    for names in IDX_FILES.values():
        for name in names:
            plain, gz = directory / name, directory / f"{name}.gz"
            if gz.exists():
                expected = IDX_MD5[dataset_id][gz.name]
                actual = md5sum(gz)
                status = "ok" if actual == expected else f"MD5 mismatch (expected {expected}, got {actual})"
                ok &= actual == expected
                print(f"  {gz}: {status}")
            elif plain.exists():
                size = plain.stat().st_size
                status = "ok" if size == IDX_SIZES[name] else f"size {size}, expected {IDX_SIZES[name]}"
                ok &= size == IDX_SIZES[name]
                print(f"  {plain}: {status}")
            else:
                ok = False
                print(f"  {plain}[.gz]: missing")
    return ok


def check_cifar(data_dir: Path) -> bool:
    ok = True
    archive = data_dir / CIFAR_ARCHIVE[0]
    if archive.exists():
        actual = md5sum(archive)
        print(f"  {archive}: {'ok' if actual == CIFAR_ARCHIVE[1] else f'MD5 mismatch ({actual})'}")
    directory = data_dir / CIFAR_DIR
    for name in CIFAR_TRAIN_FILES + CIFAR_TEST_FILES:
        path = directory / name
        if not path.exists():
            ok = False
            print(f"  {path}: missing")
            continue
        size = path.stat().st_size
        ok &= size == CIFAR_BATCH_BYTES
        print(f"  {path}: {'ok' if size == CIFAR_BATCH_BYTES else f'size {size}, expected {CIFAR_BATCH_BYTES}'}")
    return ok


def main() -> int:
    data_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else settings.DATA_DIR
    results = {}
    for dataset_id in ("mnist", "fashion_mnist"):
        print(f"{dataset_id}:")
        results[dataset_id] = check_idx(data_dir, dataset_id)
    print("cifar10:")
    results["cifar10"] = check_cifar(data_dir)

    print()
    for dataset_id, ok in results.items():
        print(f"{dataset_id}: {'ready' if ok else 'incomplete'}")
    return 0 if any(results.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
