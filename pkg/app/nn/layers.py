"""
학습 엔진의 기본 연산
직사각형 커널 합성곱, 채널 연결, 최대 풀링, 완전 연결층, ReLU, softmax 교차 엔트로피의
순전파/역전파를 numpy 로 구현합니다.

텐서는 (N, C, H, W) 순서의 numpy 배열입니다. 입력 dtype 을 그대로 유지하므로
학습은 float32, 기울기 검증은 float64 로 수행할 수 있습니다.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..exceptions import ConcatError, LabelRangeError, ShapeMismatchError

ALLOWED_KERNEL_DIMS = (1, 3, 5)


@dataclass
class MultCounter:
    """순전파 중 실제로 실행된 스칼라 곱셈 수 (편향 덧셈, 풀링 제외)"""

    conv: int = 0
    fc: int = 0

    def reset(self) -> None:
        self.conv = 0
        self.fc = 0


@dataclass
class ConvBranch:
    """
    같은 모양의 커널 묶음 하나 (혼합 커널 층의 병렬 가지)
    stride 는 항상 1, 패딩은 같은 해상도를 유지하도록 (k-1)/2 입니다.
    """

    kernel_height: int
    kernel_width: int
    weights: np.ndarray  # (out_channels, in_channels, kh, kw)
    bias: np.ndarray  # (out_channels,)
    shape_id: int = 0
    name: str = "conv"

    def __post_init__(self):
        if self.kernel_height not in ALLOWED_KERNEL_DIMS or self.kernel_width not in ALLOWED_KERNEL_DIMS:
            raise ShapeMismatchError(
                self.name, (ALLOWED_KERNEL_DIMS, ALLOWED_KERNEL_DIMS), (self.kernel_height, self.kernel_width)
            )
        if self.weights.ndim != 4:
            raise ShapeMismatchError(self.name, ("Cout", "Cin", self.kernel_height, self.kernel_width), self.weights.shape)
        expected = (self.weights.shape[0], self.weights.shape[1], self.kernel_height, self.kernel_width)
        if self.weights.shape != expected or self.weights.shape[0] < 1:
            raise ShapeMismatchError(self.name, expected, self.weights.shape)
        if self.bias.shape != (self.weights.shape[0],):
            raise ShapeMismatchError(f"{self.name}.bias", (self.weights.shape[0],), self.bias.shape)

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    @property
    def padding(self) -> tuple[int, int]:
        return (self.kernel_height - 1) // 2, (self.kernel_width - 1) // 2


def im2col(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    """
    같은 해상도 패딩을 적용한 뒤 슬라이딩 윈도우를 행렬로 펼침

    Returns:
        (N*H*W, C*kh*kw) 배열. 열 순서는 (채널, dy, dx) 입니다.
    """
    n, c, h, w = x.shape
    ph, pw = (kh - 1) // 2, (kw - 1) // 2
    padded = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)), mode="constant")
    # windows[n, c, y, x, dy, dx] = padded[n, c, y + dy, x + dx]
    windows = sliding_window_view(padded, (kh, kw), axis=(2, 3))
    return windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * h * w, c * kh * kw)


def col2im(cols: np.ndarray, input_shape: Sequence[int], kh: int, kw: int) -> np.ndarray:
    """im2col 의 기울기 누적 역연산"""
    n, c, h, w = input_shape
    ph, pw = (kh - 1) // 2, (kw - 1) // 2
    cols = cols.reshape(n, h, w, c, kh, kw)
    padded = np.zeros((n, c, h + 2 * ph, w + 2 * pw), dtype=cols.dtype)
    for dy in range(kh):
        for dx in range(kw):
            padded[:, :, dy:dy + h, dx:dx + w] += cols[:, :, :, :, dy, dx].transpose(0, 3, 1, 2)
    return padded[:, :, ph:ph + h, pw:pw + w]


def _check_conv_input(x: np.ndarray, branch: ConvBranch) -> None:
    if x.ndim != 4 or x.shape[1] != branch.in_channels or x.shape[2] < 1 or x.shape[3] < 1:
        expected = ("N", branch.in_channels, "H>=1", "W>=1")
        raise ShapeMismatchError(branch.name, expected, x.shape)


def conv2d_forward(
    x: np.ndarray,
    branch: ConvBranch,
    counter: Optional[MultCounter] = None,
    cols: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    stride 1, 같은 해상도 패딩 합성곱 (교차 상관)

    out[n,oc,y,x] = bias[oc] + Σ in[n,ic,y+dy-ph,x+dx-pw] * w[oc,ic,dy,dx]
    """
    _check_conv_input(x, branch)
    n, _, h, w = x.shape
    if cols is None:
        cols = im2col(x, branch.kernel_height, branch.kernel_width)
    w_mat = branch.weights.reshape(branch.out_channels, -1)

    if counter is not None:
        counter.conv += cols.shape[0] * cols.shape[1] * w_mat.shape[0]

    out = cols @ w_mat.T + branch.bias
    return out.reshape(n, h, w, branch.out_channels).transpose(0, 3, 1, 2)


def conv2d_backward(
    x: np.ndarray,
    branch: ConvBranch,
    upstream: np.ndarray,
    cols: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """합성곱 역전파 → (입력 기울기, 가중치 기울기, 편향 기울기)"""
    _check_conv_input(x, branch)
    n, _, h, w = x.shape
    expected = (n, branch.out_channels, h, w)
    if upstream.shape != expected:
        raise ShapeMismatchError(f"{branch.name}.backward", expected, upstream.shape)

    if cols is None:
        cols = im2col(x, branch.kernel_height, branch.kernel_width)
    grad = upstream.transpose(0, 2, 3, 1).reshape(-1, branch.out_channels)
    w_mat = branch.weights.reshape(branch.out_channels, -1)

    weight_grad = (grad.T @ cols).reshape(branch.weights.shape)
    bias_grad = grad.sum(axis=0)
    input_grad = col2im(grad @ w_mat, x.shape, branch.kernel_height, branch.kernel_width)
    return input_grad, weight_grad, bias_grad


def concat_channels(parts: Sequence[np.ndarray]) -> np.ndarray:
    """가지 출력들을 채널 축으로 연결 (입력 순서 유지)"""
    if not parts:
        raise ConcatError("concat_channels requires at least one part")
    n, _, h, w = parts[0].shape
    for part in parts[1:]:
        if part.shape[0] != n or part.shape[2:] != (h, w):
            raise ConcatError(
                f"branch outputs must share N,H,W (same-resolution padding contract): "
                f"{parts[0].shape} vs {part.shape}"
            )
    if len(parts) == 1:
        return parts[0]
    return np.concatenate(parts, axis=1)


def split_grad(upstream: np.ndarray, channel_sizes: Sequence[int]) -> list[np.ndarray]:
    """연결된 출력의 기울기를 가지별로 다시 나눔"""
    if upstream.shape[1] != sum(channel_sizes):
        raise ShapeMismatchError("split_grad", ("N", sum(channel_sizes), "H", "W"), upstream.shape)
    bounds = np.cumsum(channel_sizes)[:-1]
    return np.split(upstream, bounds, axis=1)


def maxpool2x2(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    2×2, stride 2 최대 풀링
    홀수 마지막 행/열은 버립니다. 동률이면 행 우선 순서의 첫 위치를 argmax 로 기록합니다.
    """
    n, c, h, w = x.shape
    if h < 2 or w < 2:
        raise ShapeMismatchError("maxpool2x2", ("N", "C", ">=2", ">=2"), x.shape)
    h2, w2 = h // 2, w // 2
    windows = x[:, :, :2 * h2, :2 * w2].reshape(n, c, h2, 2, w2, 2)
    windows = windows.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h2, w2, 4)
    mask = windows.argmax(axis=-1)
    out = np.take_along_axis(windows, mask[..., None], axis=-1)[..., 0]
    return out, mask


def maxpool2x2_backward(upstream: np.ndarray, mask: np.ndarray, input_shape: Sequence[int]) -> np.ndarray:
    """풀링 역전파: argmax 위치에만 기울기를 전달"""
    n, c, h, w = input_shape
    h2, w2 = h // 2, w // 2
    if upstream.shape != (n, c, h2, w2):
        raise ShapeMismatchError("maxpool2x2.backward", (n, c, h2, w2), upstream.shape)
    windows = np.zeros((n, c, h2, w2, 4), dtype=upstream.dtype)
    np.put_along_axis(windows, mask[..., None], upstream[..., None], axis=-1)
    windows = windows.reshape(n, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, 2 * h2, 2 * w2)
    grad = np.zeros(tuple(input_shape), dtype=upstream.dtype)
    grad[:, :, :2 * h2, :2 * w2] = windows
    return grad


def fully_connected(
    x: np.ndarray,
    weights: np.ndarray,
    bias: np.ndarray,
    counter: Optional[MultCounter] = None,
    name: str = "fc",
) -> np.ndarray:
    """완전 연결층: logits[j] = bias[j] + Σ in[i] * w[j, i]"""
    if x.shape[-1] != weights.shape[1]:
        raise ShapeMismatchError(name, ("N", weights.shape[1]), x.shape)
    if counter is not None:
        counter.fc += int(np.prod(x.shape[:-1])) * weights.shape[1] * weights.shape[0]
    return x @ weights.T + bias


def fully_connected_backward(
    x: np.ndarray, weights: np.ndarray, upstream: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """완전 연결층 역전파 → (입력 기울기, 가중치 기울기, 편향 기울기)"""
    if upstream.shape[-1] != weights.shape[0]:
        raise ShapeMismatchError("fc.backward", ("N", weights.shape[0]), upstream.shape)
    x2 = x.reshape(-1, weights.shape[1])
    g2 = upstream.reshape(-1, weights.shape[0])
    return (upstream @ weights).reshape(x.shape), g2.T @ x2, g2.sum(axis=0)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    return upstream * (x > 0)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, label: int) -> tuple[float, np.ndarray]:
    """
    단일 샘플 softmax 교차 엔트로피
    loss = log Σ exp(logits) - logits[label] (최댓값을 빼서 안정화)
    """
    num_classes = logits.shape[-1]
    if not 0 <= label < num_classes:
        raise LabelRangeError(f"label {label} out of range [0, {num_classes})", label=int(label))
    shifted = logits - logits.max()
    log_sum = np.log(np.exp(shifted).sum())
    loss = float(log_sum - shifted[label])
    grad = np.exp(shifted - log_sum)
    grad[label] -= 1
    return loss, grad


def softmax_cross_entropy_batch(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """배치 평균 softmax 교차 엔트로피 → (평균 손실, logits 기울기)"""
    n, num_classes = logits.shape
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= num_classes:
        raise LabelRangeError(f"labels out of range [0, {num_classes})")
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_sum = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_sum
    rows = np.arange(n)
    loss = float(-log_probs[rows, labels].mean())
    grad = np.exp(log_probs)
    grad[rows, labels] -= 1
    return loss, grad / n
