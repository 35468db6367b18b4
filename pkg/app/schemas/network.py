"""
네트워크 구조 관련 Pydantic 스키마
유전자형을 해독한 결과(NetworkSpec)와 비용 보고서(CostReport)를 정의합니다.
"""
from pydantic import BaseModel, Field

from ..exceptions import ShapeUnderflowError


class BranchSpec(BaseModel):
    """혼합 커널 층의 가지 하나 (같은 모양 커널 묶음)"""
    shape_id: int = Field(..., ge=1, le=9)
    kernel_height: int
    kernel_width: int
    out_channels: int = Field(..., ge=1)

    class Config:
        frozen = True


class ConvLayerSpec(BaseModel):
    """합성곱 층 하나: 가지 목록(카탈로그 ID 순)과 뒤따르는 풀링 여부"""
    branches: tuple[BranchSpec, ...]
    pool: bool = False

    class Config:
        frozen = True

    @property
    def out_channels(self) -> int:
        return sum(b.out_channels for b in self.branches)


class NetworkSpec(BaseModel):
    """해독된 네트워크 구조"""
    input_shape: tuple[int, int, int]  # (C, H, W)
    layers: tuple[ConvLayerSpec, ...]
    fc_width: int = Field(..., ge=1)
    num_classes: int = Field(10, ge=2)

    class Config:
        frozen = True

    def layer_input_shapes(self, input_shape: tuple[int, int, int] = None) -> list[tuple[int, int, int]]:
        """
        각 합성곱 층의 입력 형상 (C, H, W) 목록과 마지막 특징 맵 형상

        Returns:
            길이 len(layers) + 1 의 리스트. 마지막 원소는 완전 연결층 입력 형상입니다.
        """
        c, h, w = input_shape or self.input_shape
        shapes = []
        for index, layer in enumerate(self.layers):
            shapes.append((c, h, w))
            c = layer.out_channels
            if layer.pool:
                if h < 2 or w < 2:
                    raise ShapeUnderflowError(
                        f"layer {index + 1}: cannot pool a {h}x{w} feature map",
                        layer=index + 1,
                    )
                h, w = h // 2, w // 2
        shapes.append((c, h, w))
        return shapes


class CostReport(BaseModel):
    """곱셈 수 분석 결과"""
    per_layer_mults: list[int]
    total_conv_mults: int = Field(..., ge=0)
    fc_mults: int = Field(..., ge=0)
    kernel_count: int = Field(..., ge=0)
