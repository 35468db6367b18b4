"""
실행(run) 관련 Pydantic 스키마
탐색/재학습 설정, 체크포인트, 파레토 전선, 기준점, 재학습 보고서를 정의합니다.
"""
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from ..config import settings
from .genotype import Mode

TemplateId = Literal["lenet5", "lenet5_small", "three_layer", "four_layer"]
DatasetId = Literal["mnist", "fashion_mnist", "cifar10"]
Preset = Literal["desk", "full"]

# 프리셋별 (탐색 학습 분할, 평가 분할, 에폭)
SEARCH_PRESETS = {
    "desk": {"mnist": (8000, 2000), "fashion_mnist": (8000, 2000), "cifar10": (8000, 2000), "epochs": 3},
    "full": {"mnist": (50000, 10000), "fashion_mnist": (50000, 10000), "cifar10": (40000, 10000), "epochs": 30},
}
RETRAIN_PRESETS = {"desk": 5, "full": 100}


def default_batch_size() -> int:
    """환경 변수 DEFAULT_BATCH_SIZE 로 바꿀 수 있는 기본 배치 크기"""
    return settings.DEFAULT_BATCH_SIZE


# === 설정 스키마 ===

class EvalConfig(BaseModel):
    """적합도 평가 설정 (탐색 중에는 증강 없음)"""
    template: TemplateId = "lenet5"
    dataset: DatasetId = "mnist"
    search_train_size: int = Field(8000, ge=1)
    eval_size: int = Field(2000, ge=1)
    epochs: int = Field(3, ge=0)
    batch_size: int = Field(default_factory=default_batch_size, ge=1)
    lr: float = Field(1e-3, gt=0)
    seed: int = 0

    class Config:
        frozen = True
        extra = "forbid"


class RunConfig(BaseModel):
    """evolve 서브커맨드 설정 (JSON 파일 + 플래그 덮어쓰기)"""
    template: TemplateId = "lenet5"
    dataset: DatasetId = "mnist"
    mode: Mode = Mode.TWO_OBJ
    population: int = Field(25, ge=2)
    generations: int = Field(100, ge=0)
    mutation_rate: float = Field(0.1, ge=0.0, le=1.0)
    seed: int = 0
    preset: Preset = "desk"
    search_train_size: Optional[int] = Field(None, ge=1)
    eval_size: Optional[int] = Field(None, ge=1)
    epochs: Optional[int] = Field(None, ge=0)
    batch_size: int = Field(default_factory=default_batch_size, ge=1)
    lr: float = Field(1e-3, gt=0)
    parent_selection: Literal["mutate_all", "tournament"] = "mutate_all"
    include_benchmark: bool = False
    workers: Optional[int] = Field(None, ge=1)
    data_dir: Optional[Path] = None
    output_dir: Optional[Path] = None

    class Config:
        extra = "forbid"

    @model_validator(mode="after")
    def validate_population(self):
        if self.population % 2:
            raise ValueError(f"population must be even, got {self.population}")
        return self

    def resolved(self) -> "RunConfig":
        """프리셋으로 비어 있는 분할 크기/에폭을 채운 사본"""
        preset = SEARCH_PRESETS[self.preset]
        train_size, eval_size = preset[self.dataset]
        return self.model_copy(update={
            "search_train_size": self.search_train_size or train_size,
            "eval_size": self.eval_size or eval_size,
            "epochs": preset["epochs"] if self.epochs is None else self.epochs,
        })

    def eval_config(self) -> EvalConfig:
        resolved = self.resolved()
        return EvalConfig(
            template=resolved.template,
            dataset=resolved.dataset,
            search_train_size=resolved.search_train_size,
            eval_size=resolved.eval_size,
            epochs=resolved.epochs,
            batch_size=resolved.batch_size,
            lr=resolved.lr,
            seed=resolved.seed,
        )


class RetrainConfig(BaseModel):
    """retrain 서브커맨드 설정"""
    preset: Preset = "desk"
    dataset: Optional[DatasetId] = None  # 탐색 데이터셋과 다르면 구조 전이
    epochs: Optional[int] = Field(None, ge=0)
    train_size: Optional[int] = Field(None, ge=1)  # None 이면 학습 세트 전체
    batch_size: int = Field(default_factory=default_batch_size, ge=1)
    lr: float = Field(1e-3, gt=0)
    lr_drop_epoch: int = Field(30, ge=0)
    lr_drop_factor: float = Field(0.1, gt=0)
    weight_decay: float = Field(1e-4, ge=0)
    augment: Optional[bool] = None  # None 이면 CIFAR-10 에서만 증강
    seed: int = 0
    compare_benchmark: bool = False
    data_dir: Optional[Path] = None

    class Config:
        extra = "forbid"

    def resolved_epochs(self) -> int:
        return RETRAIN_PRESETS[self.preset] if self.epochs is None else self.epochs

    def resolved_augment(self, dataset_id: str) -> bool:
        return dataset_id == "cifar10" if self.augment is None else self.augment


# === 산출물 스키마 ===

class IndividualRecord(BaseModel):
    """체크포인트에 저장하는 개체 (crowding 이 None 이면 무한대)"""
    layers: list[list[int]]
    mode: Mode
    fitness: list[float]
    rank: Optional[int] = None
    crowding: Optional[float] = None


class Checkpoint(BaseModel):
    """세대별 체크포인트"""
    generation: int = Field(..., ge=0)
    generations_total: int = Field(..., ge=0)
    rng_state: dict
    population: list[IndividualRecord]
    archive: list[IndividualRecord]
    evaluated: list[IndividualRecord]
    archive_history: list[list[list[float]]]


class FrontMember(BaseModel):
    """파레토 전선 구성원 (곱셈 수 오름차순으로 id 부여)"""
    id: int
    key: str
    mode: Mode
    layers: list[list[int]]
    mults: int
    top1_error: float
    kernel_count: int

    @property
    def accuracy(self) -> float:
        return 1.0 - self.top1_error


class ReferencePoint(BaseModel):
    """기준점 하나"""
    tag: str
    member_id: int
    mults: int
    top1_error: float
    kernel_count: int
    rationale: str


class ReferencePoints(BaseModel):
    ref1: ReferencePoint
    ref2: ReferencePoint
    ref3: ReferencePoint

    def get(self, tag: str) -> ReferencePoint:
        return getattr(self, tag)


class KernelCount(BaseModel):
    """커널 분포 행 하나"""
    layer_index: int
    shape_label: str
    count: int


class RetrainReport(BaseModel):
    """재학습 결과 보고서"""
    source: str
    key: str
    dataset: DatasetId
    epochs: int
    augment: bool
    test_accuracy: float
    mults: int
    benchmark_mults: int
    reduction_factor: float
    reduction: str
    benchmark_accuracy: Optional[float] = None
    accuracy_improvement: Optional[float] = None
    lr_trace: list[float] = []
    loss_trace: list[float] = []


class RunSummary(BaseModel):
    """실행 디렉토리 요약"""
    run_id: str
    template: Optional[str] = None
    dataset: Optional[str] = None
    mode: Optional[Mode] = None
    generation: Optional[int] = None
    has_front: bool = False


class CostRequest(BaseModel):
    """비용 계산 요청 (layers 또는 all_square 중 하나)"""
    template: TemplateId = "lenet5"
    dataset: DatasetId = "mnist"
    mode: Mode = Mode.TWO_OBJ
    layers: Optional[list[list[int]]] = None
    all_square: Optional[str] = None

    @model_validator(mode="after")
    def validate_source(self):
        if (self.layers is None) == (self.all_square is None):
            raise ValueError("exactly one of 'layers' or 'all_square' is required")
        return self
