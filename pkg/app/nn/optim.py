"""
Adam 옵티마이저와 학습률 스케줄
가중치 감쇠는 기울기에 더하지 않고 분리(decoupled)해서 적용합니다.
"""
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..exceptions import NonFiniteGradientError, ShapeMismatchError


@dataclass
class AdamState:
    """파라미터별 1차/2차 모멘트와 스텝 카운터"""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def adam_step(params: Sequence[np.ndarray], grads: Sequence[np.ndarray], state: AdamState) -> Sequence[np.ndarray]:
    """
    편향 보정 Adam 한 스텝 (파라미터를 제자리에서 갱신)

    weight_decay > 0 이면 Adam 변화량 전에 param -= lr * wd * param 을 적용합니다.
    기울기에 NaN/Inf 가 있으면 아무것도 바꾸지 않고 예외를 발생시킵니다.
    """
    if len(params) != len(grads):
        raise ShapeMismatchError("adam_step", (len(params),), (len(grads),))
    for i, (param, grad) in enumerate(zip(params, grads)):
        if param.shape != grad.shape:
            raise ShapeMismatchError(f"adam_step[{i}]", param.shape, grad.shape)
        if not np.all(np.isfinite(grad)):
            raise NonFiniteGradientError(f"non-finite gradient for parameter {i}", parameter=i)

    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]

    state.t += 1
    correction1 = 1.0 - state.beta1 ** state.t
    correction2 = 1.0 - state.beta2 ** state.t

    for param, grad, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        if state.weight_decay > 0:
            param -= state.lr * state.weight_decay * param
        m_hat = m / correction1
        v_hat = v / correction2
        param -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params


@dataclass(frozen=True)
class StepSchedule:
    """지정한 에폭에서 학습률을 factor 배로 줄이는 스케줄 (에폭 번호는 0부터)"""

    base_lr: float = 1e-3
    drop_epochs: tuple[int, ...] = ()
    factor: float = 0.1

    def lr_at(self, epoch: int) -> float:
        drops = sum(1 for e in self.drop_epochs if epoch >= e)
        return self.base_lr * self.factor ** drops
