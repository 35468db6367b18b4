"""
커널 모양 카탈로그와 유전자형 연산
무작위 초기화, 돌연변이, 해독(NetworkSpec 변환), 정규 키 생성을 담당합니다.
"""
from typing import Optional

import numpy as np

from ..exceptions import ConfigError, InvariantViolationError
from ..schemas.genotype import REMOVED, Genotype, KernelShape, Mode, NetworkTemplate
from ..schemas.network import BranchSpec, ConvLayerSpec, NetworkSpec

# ID 순서는 실행 간에 고정
CATALOGUE: tuple[KernelShape, ...] = tuple(
    KernelShape(id=i + 1, height=h, width=w)
    for i, (h, w) in enumerate([
        (1, 1), (1, 3), (3, 1), (3, 3), (1, 5), (5, 1), (3, 5), (5, 3), (5, 5),
    ])
)
SHAPES_BY_ID = {shape.id: shape for shape in CATALOGUE}
SHAPES_BY_LABEL = {shape.label: shape for shape in CATALOGUE}

DATASET_INPUT_SHAPES = {
    "mnist": (1, 28, 28),
    "fashion_mnist": (1, 28, 28),
    "cifar10": (3, 32, 32),
}

# template_id -> (층별 슬롯 수, 풀링 위치, FC 폭, 원본 커널 ID)
TEMPLATES = {
    "lenet5": ((32, 64), (True, True), 512, 9),
    "lenet5_small": ((8, 16), (True, True), 64, 9),
    "three_layer": ((64, 64, 64), (True, True, True), 512, 4),
    "four_layer": ((64, 64, 64, 64), (True, True, False, True), 512, 4),
}


def catalogue() -> list[KernelShape]:
    """9개 커널 모양 (ID 순)"""
    return list(CATALOGUE)


def shape_from_label(label: str) -> KernelShape:
    """'5x5' 같은 라벨로 카탈로그 항목 조회"""
    shape = SHAPES_BY_LABEL.get(label.strip().lower())
    if shape is None:
        raise ConfigError(
            f"unknown kernel shape '{label}' (expected one of {', '.join(SHAPES_BY_LABEL)})",
            shape=label,
        )
    return shape


def get_template(template_id: str, dataset_id: str) -> NetworkTemplate:
    """내장 템플릿을 데이터셋 입력 형상에 맞춰 생성"""
    if template_id not in TEMPLATES:
        raise ConfigError(f"unknown template '{template_id}' (expected one of {', '.join(TEMPLATES)})")
    if dataset_id not in DATASET_INPUT_SHAPES:
        raise ConfigError(f"unknown dataset '{dataset_id}' (expected one of {', '.join(DATASET_INPUT_SHAPES)})")

    slots, pools, fc_width, benchmark = TEMPLATES[template_id]
    return NetworkTemplate(
        template_id=template_id,
        input_shape=DATASET_INPUT_SHAPES[dataset_id],
        slots=slots,
        pool_after=pools,
        fc_width=fc_width,
        benchmark_shape_id=benchmark,
    )


def random_genotype(template: NetworkTemplate, mode: Mode, rng: np.random.Generator) -> Genotype:
    """모든 대립유전자를 {1..9} 에서 균등하게 뽑은 유전자형 (초기화 시 REMOVED 없음)"""
    layers = tuple(tuple(int(a) for a in rng.integers(1, 10, size=n)) for n in template.slots)
    return Genotype(layers=layers, mode=mode)


def uniform_genotype(template: NetworkTemplate, shape_id: Optional[int] = None, mode: Mode = Mode.TWO_OBJ) -> Genotype:
    """모든 슬롯이 같은 모양인 유전자형 (기본값은 템플릿의 원본 정사각 커널)"""
    shape_id = shape_id or template.benchmark_shape_id
    if shape_id not in SHAPES_BY_ID:
        raise ConfigError(f"shape id must lie in 1..9, got {shape_id}")
    return Genotype(layers=tuple((shape_id,) * n for n in template.slots), mode=mode)


def mutate(genotype: Genotype, rate: float, rng: np.random.Generator) -> Genotype:
    """
    유전자별 독립 돌연변이

    확률 rate 로 현재 값을 제외한 허용 영역에서 균등하게 다시 뽑습니다.
    허용 영역은 two_obj 에서 {1..9}, three_obj 에서 {0..9} 입니다.
    한 층이 모두 REMOVED 가 되면 그 층의 유전자 하나를 골라 {1..9} 에서 다시 뽑습니다.
    """
    if not 0.0 <= rate <= 1.0:
        raise ConfigError(f"mutation rate must lie in [0, 1], got {rate}")

    low = 1 if genotype.mode is Mode.TWO_OBJ else REMOVED
    size = 10 - low
    layers = []
    for layer in genotype.layers:
        alleles = np.asarray(layer, dtype=np.int64)
        changed = rng.random(alleles.size) < rate
        # 현재 위치에서 1..size-1 칸 이동하면 현재 값을 제외한 균등 추출이 됩니다
        offsets = rng.integers(1, size, size=alleles.size)
        alleles = np.where(changed, (alleles - low + offsets) % size + low, alleles)
        if np.all(alleles == REMOVED):
            alleles[int(rng.integers(alleles.size))] = int(rng.integers(1, 10))
        layers.append(tuple(int(a) for a in alleles))
    return Genotype(layers=tuple(layers), mode=genotype.mode)


def shape_counts(layer: tuple[int, ...]) -> np.ndarray:
    """층 하나의 ID 별 개수 (인덱스 0 은 REMOVED)"""
    return np.bincount(np.asarray(layer, dtype=np.int64), minlength=10)


def decode(genotype: Genotype, template: NetworkTemplate) -> NetworkSpec:
    """유전자형 → NetworkSpec (층마다 같은 모양끼리 묶은 가지를 ID 순으로 배치)"""
    if genotype.slot_counts != template.slots:
        raise InvariantViolationError(
            f"genotype slot counts {genotype.slot_counts} do not match template "
            f"'{template.template_id}' {template.slots}"
        )

    layers = []
    for index, (layer, pool) in enumerate(zip(genotype.layers, template.pool_after)):
        counts = shape_counts(layer)
        branches = tuple(
            BranchSpec(
                shape_id=shape.id,
                kernel_height=shape.height,
                kernel_width=shape.width,
                out_channels=int(counts[shape.id]),
            )
            for shape in CATALOGUE
            if counts[shape.id] > 0
        )
        if not branches:
            raise InvariantViolationError(f"layer {index + 1} has every kernel removed", layer=index + 1)
        layers.append(ConvLayerSpec(branches=branches, pool=pool))

    return NetworkSpec(
        input_shape=template.input_shape,
        layers=tuple(layers),
        fc_width=template.fc_width,
        num_classes=template.num_classes,
    )


def canonical_key(genotype: Genotype) -> str:
    """
    적합도 캐시 키: 층별 모양 개수(ID 1..9)를 이어 붙인 문자열
    층 안의 순서와 REMOVED 위치는 키에 영향을 주지 않습니다.
    """
    return "|".join(
        ".".join(str(int(c)) for c in shape_counts(layer)[1:])
        for layer in genotype.layers
    )


def genotype_to_dict(genotype: Genotype) -> dict:
    """JSON 직렬화용 dict"""
    return {"layers": [list(layer) for layer in genotype.layers], "mode": genotype.mode.value}


def genotype_from_dict(data: dict) -> Genotype:
    return Genotype(layers=tuple(tuple(layer) for layer in data["layers"]), mode=Mode(data.get("mode", "two_obj")))
