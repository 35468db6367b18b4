"""
학습 루프와 Top-1 정확도 평가
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..data.augment import augment_batch
from ..data.dataset import Dataset
from ..exceptions import DataError, DivergenceError
from .layers import softmax_cross_entropy_batch
from .network import Network
from .optim import AdamState, StepSchedule, adam_step

logger = logging.getLogger(__name__)


@dataclass
class TrainResult:
    """학습 결과: 네트워크와 에폭별 평균 손실/학습률 기록"""

    network: Network
    loss_trace: list[float] = field(default_factory=list)
    lr_trace: list[float] = field(default_factory=list)


def train(
    network: Network,
    train_set: Dataset,
    epochs: int,
    batch_size: int,
    optimizer: Optional[AdamState] = None,
    schedule: Optional[StepSchedule] = None,
    augment: bool = False,
    rng: Optional[np.random.Generator] = None,
    augment_rng: Optional[np.random.Generator] = None,
) -> TrainResult:
    """
    미니배치 Adam 학습

    네트워크 초기화 시드, 셔플 rng, 증강 rng 가 같으면 결과 파라미터가 비트 단위로 같습니다.
    손실이 유한하지 않으면 에폭/배치 번호와 함께 DivergenceError 를 발생시킵니다.
    """
    if len(train_set) == 0:
        raise DataError("training set is empty")
    if batch_size < 1:
        raise DataError(f"batch_size must be >= 1, got {batch_size}")

    optimizer = optimizer or AdamState()
    schedule = schedule or StepSchedule(base_lr=optimizer.lr)
    rng = rng if rng is not None else np.random.default_rng(0)
    augment_rng = augment_rng if augment_rng is not None else rng
    result = TrainResult(network=network)

    params = network.parameters()
    n = len(train_set)
    for epoch in range(epochs):
        optimizer.lr = schedule.lr_at(epoch)
        order = rng.permutation(n)
        losses = []
        for batch_index, start in enumerate(range(0, n, batch_size)):
            idx = order[start:start + batch_size]
            images = train_set.images[idx]
            if augment:
                images = augment_batch(images, augment_rng)
            logits = network.forward(images, train=True)
            loss, logit_grad = softmax_cross_entropy_batch(logits, train_set.labels[idx])
            if not np.isfinite(loss):
                raise DivergenceError(epoch, batch_index, loss)
            grads = network.backward(logit_grad.astype(network.dtype, copy=False))
            adam_step(params, grads, optimizer)
            losses.append(loss)

        result.loss_trace.append(float(np.mean(losses)))
        result.lr_trace.append(optimizer.lr)
        logger.debug("epoch %d/%d loss=%.4f lr=%g", epoch + 1, epochs, result.loss_trace[-1], optimizer.lr)

    return result


def evaluate_top1(network: Network, dataset: Dataset, batch_size: int = 256) -> float:
    """Top-1 정확도 (argmax 동률은 가장 작은 클래스 인덱스)"""
    if len(dataset) == 0:
        raise DataError("evaluation set is empty")
    predictions = network.predict(dataset.images, batch_size=batch_size)
    return float(np.mean(predictions == dataset.labels))
