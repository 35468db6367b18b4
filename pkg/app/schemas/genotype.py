"""
유전자형 관련 Pydantic 스키마
커널 모양 카탈로그 항목, 유전자형, 네트워크 템플릿을 정의합니다.
"""
from enum import Enum

from pydantic import BaseModel, Field, field_validator, model_validator

REMOVED = 0


class Mode(str, Enum):
    """목적 함수 구성: (곱셈 수, 오류율) 또는 (곱셈 수, 오류율, 커널 수)"""
    TWO_OBJ = "two_obj"
    THREE_OBJ = "three_obj"

    @property
    def n_objectives(self) -> int:
        return 2 if self is Mode.TWO_OBJ else 3


class KernelShape(BaseModel):
    """카탈로그 항목 하나 (높이 × 너비)"""
    id: int = Field(..., ge=1, le=9)
    height: int
    width: int

    class Config:
        frozen = True

    @property
    def label(self) -> str:
        return f"{self.height}x{self.width}"

    @property
    def area(self) -> int:
        return self.height * self.width


class Genotype(BaseModel):
    """
    층별 대립유전자 벡터
    대립유전자는 카탈로그 ID(1..9) 또는 REMOVED(0) 이며, REMOVED 는 three_obj 모드에서만 허용됩니다.
    """
    layers: tuple[tuple[int, ...], ...]
    mode: Mode = Mode.TWO_OBJ

    class Config:
        frozen = True

    @field_validator("layers")
    @classmethod
    def validate_alleles(cls, v):
        if not v:
            raise ValueError("genotype must have at least one layer")
        for index, layer in enumerate(v):
            if not layer:
                raise ValueError(f"layer {index + 1} has no kernel slots")
            bad = [a for a in layer if a < REMOVED or a > 9]
            if bad:
                raise ValueError(f"layer {index + 1}: alleles must lie in 0..9, got {bad[0]}")
        return v

    @model_validator(mode="after")
    def validate_mode(self):
        if self.mode is Mode.TWO_OBJ:
            for index, layer in enumerate(self.layers):
                if REMOVED in layer:
                    raise ValueError(f"layer {index + 1}: REMOVED allele is only allowed in three_obj mode")
        return self

    @property
    def slot_counts(self) -> tuple[int, ...]:
        return tuple(len(layer) for layer in self.layers)

    @property
    def kernel_count(self) -> int:
        return sum(1 for layer in self.layers for a in layer if a != REMOVED)


class NetworkTemplate(BaseModel):
    """탐색 대상 CNN 골격 (층별 슬롯 수, 풀링 위치, FC 폭)"""
    template_id: str
    input_shape: tuple[int, int, int]  # (C, H, W)
    slots: tuple[int, ...]
    pool_after: tuple[bool, ...]
    fc_width: int = Field(..., ge=1)
    num_classes: int = 10
    benchmark_shape_id: int = Field(9, ge=1, le=9)  # 원본 네트워크의 정사각 커널

    class Config:
        frozen = True

    @model_validator(mode="after")
    def validate_layout(self):
        if len(self.slots) != len(self.pool_after):
            raise ValueError("slots and pool_after must have the same length")
        if any(s < 1 for s in self.slots):
            raise ValueError("every layer needs at least one kernel slot")
        return self

    @property
    def total_slots(self) -> int:
        return sum(self.slots)
