"""
곱셈 수 비용 모델
합성곱 층: O_h · O_w · C_in · Σ(가지 출력 채널 · K_h · K_w)
완전 연결층: O_h · O_w · O_c · 뉴런 수
모든 값은 정수입니다.
"""
from typing import Iterable, Optional

from ..schemas.genotype import Genotype, NetworkTemplate
from ..schemas.network import BranchSpec, CostReport, NetworkSpec
from .genotype import decode, uniform_genotype


def conv_layer_mults(out_h: int, out_w: int, in_channels: int, branches: Iterable[BranchSpec]) -> int:
    """같은 해상도 패딩 합성곱 층 하나의 곱셈 수"""
    kernel_area = sum(b.out_channels * b.kernel_height * b.kernel_width for b in branches)
    return int(out_h) * int(out_w) * int(in_channels) * int(kernel_area)


def fc_mults(out_h: int, out_w: int, out_c: int, n_neurons: int) -> int:
    return int(out_h) * int(out_w) * int(out_c) * int(n_neurons)


def network_cost(spec: NetworkSpec, input_shape: Optional[tuple[int, int, int]] = None) -> CostReport:
    """
    층별 형상을 전파하며 합성곱 곱셈 수를 합산

    fc_mults 는 첫 번째 완전 연결층 기준으로 보고만 하고, 목적 함수(total_conv_mults)에는 넣지 않습니다.
    """
    shapes = spec.layer_input_shapes(input_shape)
    per_layer = [
        conv_layer_mults(h, w, c, layer.branches)
        for layer, (c, h, w) in zip(spec.layers, shapes)
    ]
    c, h, w = shapes[-1]
    return CostReport(
        per_layer_mults=per_layer,
        total_conv_mults=sum(per_layer),
        fc_mults=fc_mults(h, w, c, spec.fc_width),
        kernel_count=sum(layer.out_channels for layer in spec.layers),
    )


def genotype_cost(genotype: Genotype, template: NetworkTemplate) -> CostReport:
    """유전자형을 해독해 비용 계산"""
    return network_cost(decode(genotype, template))


def template_max_mults(template: NetworkTemplate) -> int:
    """모든 슬롯이 5x5 일 때의 곱셈 수 (카탈로그 최대 비용)"""
    return genotype_cost(uniform_genotype(template, shape_id=9), template).total_conv_mults
