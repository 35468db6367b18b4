from .layers import (
    ConvBranch, MultCounter,
    conv2d_forward, conv2d_backward,
    concat_channels, split_grad,
    maxpool2x2, maxpool2x2_backward,
    fully_connected, fully_connected_backward,
    relu, relu_backward,
    softmax_cross_entropy, softmax_cross_entropy_batch,
)
from .optim import AdamState, StepSchedule, adam_step
from .network import Network, count_forward_mults, INIT_SCHEME
from .train import TrainResult, train, evaluate_top1

__all__ = [
    "ConvBranch", "MultCounter",
    "conv2d_forward", "conv2d_backward",
    "concat_channels", "split_grad",
    "maxpool2x2", "maxpool2x2_backward",
    "fully_connected", "fully_connected_backward",
    "relu", "relu_backward",
    "softmax_cross_entropy", "softmax_cross_entropy_batch",
    "AdamState", "StepSchedule", "adam_step",
    "Network", "count_forward_mults", "INIT_SCHEME",
    "TrainResult", "train", "evaluate_top1",
]
