"""
데이터 증강
각 변에 4픽셀 0 패딩 → 무작위 크롭 → 확률 0.5 좌우 반전
"""
import numpy as np

PAD = 4


def augment(image: np.ndarray, rng) -> np.ndarray:
    """
    이미지 하나 (C, H, W) 증강. 출력 형상은 입력과 같습니다.

    rng 는 integers / random 메서드를 가진 numpy Generator 호환 객체입니다.
    크롭 좌상단 오프셋은 [0, 2*PAD] 범위에서 균등하게 뽑으며, 오프셋 PAD 가 원본 위치입니다.
    """
    c, h, w = image.shape
    canvas = np.zeros((c, h + 2 * PAD, w + 2 * PAD), dtype=image.dtype)
    canvas[:, PAD:PAD + h, PAD:PAD + w] = image

    top = int(rng.integers(0, 2 * PAD + 1))
    left = int(rng.integers(0, 2 * PAD + 1))
    patch = canvas[:, top:top + h, left:left + w]
    if rng.random() < 0.5:
        patch = patch[:, :, ::-1]
    return np.ascontiguousarray(patch)


def augment_batch(images: np.ndarray, rng) -> np.ndarray:
    """배치 (N, C, H, W) 의 각 이미지를 독립적으로 증강"""
    return np.stack([augment(image, rng) for image in images]) if len(images) else images.copy()
