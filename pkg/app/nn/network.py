"""
혼합 커널 CNN
NetworkSpec 으로부터 파라미터를 만들고 순전파/역전파를 수행합니다.

구조: [혼합 커널 합성곱 → ReLU → (2×2 풀링)] × 층 수 → 평탄화 → FC(fc_width) → ReLU → FC(클래스 수)
"""
from typing import Optional

import numpy as np

from ..exceptions import ShapeMismatchError
from ..schemas.network import NetworkSpec
from .layers import (
    ConvBranch,
    MultCounter,
    concat_channels,
    conv2d_backward,
    conv2d_forward,
    fully_connected,
    fully_connected_backward,
    im2col,
    maxpool2x2,
    maxpool2x2_backward,
    relu,
    relu_backward,
    split_grad,
)

INIT_SCHEME = "kaiming_uniform_fan_in"


def kaiming_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, dtype=np.float32) -> np.ndarray:
    """fan-in 기준 Kaiming 균등 초기화 (ReLU 용)"""
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Network:
    """학습 가능한 혼합 커널 네트워크"""

    def __init__(self, spec: NetworkSpec, rng: np.random.Generator, dtype=np.float32):
        self.spec = spec
        self.dtype = dtype
        shapes = spec.layer_input_shapes()

        self.layers: list[list[ConvBranch]] = []
        for index, (layer, (in_c, _, _)) in enumerate(zip(spec.layers, shapes)):
            branches = []
            for branch in layer.branches:
                kh, kw = branch.kernel_height, branch.kernel_width
                branches.append(ConvBranch(
                    kernel_height=kh,
                    kernel_width=kw,
                    weights=kaiming_uniform(rng, (branch.out_channels, in_c, kh, kw), in_c * kh * kw, dtype),
                    bias=np.zeros(branch.out_channels, dtype=dtype),
                    shape_id=branch.shape_id,
                    name=f"layer{index + 1}.{kh}x{kw}",
                ))
            self.layers.append(branches)

        c, h, w = shapes[-1]
        flat = c * h * w
        self.fc_weights = kaiming_uniform(rng, (spec.fc_width, flat), flat, dtype)
        self.fc_bias = np.zeros(spec.fc_width, dtype=dtype)
        self.out_weights = kaiming_uniform(rng, (spec.num_classes, spec.fc_width), spec.fc_width, dtype)
        self.out_bias = np.zeros(spec.num_classes, dtype=dtype)

        self._cache: Optional[dict] = None

    def parameters(self) -> list[np.ndarray]:
        """고정된 순서의 파라미터 목록 (층 → 가지(ID 순) → 가중치, 편향 → FC)"""
        params = []
        for branches in self.layers:
            for branch in branches:
                params.extend([branch.weights, branch.bias])
        params.extend([self.fc_weights, self.fc_bias, self.out_weights, self.out_bias])
        return params

    def state(self) -> list[np.ndarray]:
        """파라미터 복사본"""
        return [p.copy() for p in self.parameters()]

    def forward_features(self, x: np.ndarray, counter: Optional[MultCounter] = None, train: bool = False) -> np.ndarray:
        """합성곱/풀링 단계만 수행"""
        caches = []
        for spec_layer, branches in zip(self.spec.layers, self.layers):
            cols = [im2col(x, b.kernel_height, b.kernel_width) for b in branches]
            outputs = [conv2d_forward(x, b, counter, cols=c) for b, c in zip(branches, cols)]
            z = concat_channels(outputs)
            a = relu(z)
            entry = {"x": x, "cols": cols, "z": z}
            if spec_layer.pool:
                entry["pre_pool_shape"] = a.shape
                a, entry["mask"] = maxpool2x2(a)
            caches.append(entry)
            x = a
        if train:
            self._cache = {"layers": caches}
        return x

    def forward(self, x: np.ndarray, counter: Optional[MultCounter] = None, train: bool = False) -> np.ndarray:
        """입력 배치 (N, C, H, W) → logits (N, num_classes)"""
        expected = (x.shape[0],) + tuple(self.spec.input_shape)
        if x.shape != expected:
            raise ShapeMismatchError("network.input", expected, x.shape)
        features = self.forward_features(x, counter, train)
        flat = features.reshape(features.shape[0], -1)
        hidden_z = fully_connected(flat, self.fc_weights, self.fc_bias, counter, name="fc")
        hidden = relu(hidden_z)
        logits = fully_connected(hidden, self.out_weights, self.out_bias, counter, name="classifier")
        if train:
            self._cache.update({
                "features_shape": features.shape,
                "flat": flat,
                "hidden_z": hidden_z,
                "hidden": hidden,
            })
        return logits

    def backward(self, logit_grad: np.ndarray) -> list[np.ndarray]:
        """직전 forward(train=True) 기준 역전파 → parameters() 와 같은 순서의 기울기"""
        cache = self._cache
        if cache is None:
            raise ShapeMismatchError("network.backward", ("cached forward",), ("none",))

        d_hidden, d_out_w, d_out_b = fully_connected_backward(cache["hidden"], self.out_weights, logit_grad)
        d_hidden_z = relu_backward(cache["hidden_z"], d_hidden)
        d_flat, d_fc_w, d_fc_b = fully_connected_backward(cache["flat"], self.fc_weights, d_hidden_z)
        grad = d_flat.reshape(cache["features_shape"])

        layer_grads: list[list[np.ndarray]] = []
        for spec_layer, branches, entry in reversed(list(zip(self.spec.layers, self.layers, cache["layers"]))):
            if spec_layer.pool:
                grad = maxpool2x2_backward(grad, entry["mask"], entry["pre_pool_shape"])
            grad = relu_backward(entry["z"], grad)
            parts = split_grad(grad, [b.out_channels for b in branches])

            x = entry["x"]
            input_grad = np.zeros_like(x)
            branch_grads = []
            for branch, part, cols in zip(branches, parts, entry["cols"]):
                dx, dw, db = conv2d_backward(x, branch, part, cols=cols)
                input_grad += dx
                branch_grads.extend([dw, db])
            layer_grads.append(branch_grads)
            grad = input_grad

        grads = []
        for branch_grads in reversed(layer_grads):
            grads.extend(branch_grads)
        grads.extend([d_fc_w, d_fc_b, d_out_w, d_out_b])
        self._cache = None
        return grads

    def predict(self, x: np.ndarray, batch_size: int = 256) -> np.ndarray:
        """배치 단위 추론 → 예측 클래스 (동률이면 가장 작은 인덱스)"""
        predictions = []
        for start in range(0, x.shape[0], batch_size):
            logits = self.forward(x[start:start + batch_size])
            predictions.append(logits.argmax(axis=1))
        return np.concatenate(predictions) if predictions else np.zeros(0, dtype=np.int64)


def count_forward_mults(network: Network, input_shape: tuple[int, int, int]) -> int:
    """
    합성곱 가지가 순전파 한 번에 실제로 수행하는 스칼라 곱셈 수
    편향 덧셈과 풀링은 세지 않습니다. 비용 모델의 독립 검증용입니다.
    """
    counter = MultCounter()
    x = np.zeros((1,) + tuple(input_shape), dtype=network.dtype)
    network.forward_features(x, counter)
    return counter.conv
