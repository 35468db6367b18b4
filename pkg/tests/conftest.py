import numpy as np
import pytest

from app.config import settings
from app.data.dataset import Dataset
from app.schemas.genotype import NetworkTemplate
from app.search.cost import genotype_cost
from app.search.genotype import CATALOGUE


def make_dataset(n, shape=(1, 8, 8), seed=0, num_classes=10, source="synthetic"):
    """클래스마다 밝은 블록 위치가 다른 합성 데이터셋"""
    rng = np.random.default_rng(seed)
    c, h, w = shape
    labels = np.arange(n) % num_classes
    rng.shuffle(labels)
    images = rng.uniform(0.0, 0.2, size=(n, c, h, w)).astype(np.float32)
    for i, label in enumerate(labels):
        y, x = divmod(int(label), 4)
        y0, x0 = (y * h) // 3, (x * w) // 4
        images[i, :, y0:y0 + max(1, h // 4), x0:x0 + max(1, w // 4)] = 1.0
    return Dataset(
        images=images,
        labels=labels.astype(np.int64),
        source=source,
        class_names=tuple(str(i) for i in range(num_classes)),
    )


def shape_area_surrogate(template):
    """오류율 = 1 / Σ(h·w) 인 결정적 대리 평가기 (곱셈 수는 실제 비용 모델)"""

    def evaluate(genotype):
        area = sum(CATALOGUE[a - 1].area for layer in genotype.layers for a in layer if a)
        cost = genotype_cost(genotype, template)
        return (cost.total_conv_mults, 1.0 / area, cost.kernel_count)

    return evaluate


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_template():
    return NetworkTemplate(
        template_id="tiny",
        input_shape=(1, 8, 8),
        slots=(4,),
        pool_after=(True,),
        fc_width=8,
    )


@pytest.fixture
def tiny_dataset():
    return make_dataset(64, shape=(1, 8, 8), seed=7)


@pytest.fixture
def run_settings(tmp_path, monkeypatch):
    """실행/데이터/로그 경로를 임시 디렉토리로"""
    monkeypatch.setattr(settings, "RUNS_DIR", tmp_path / "runs")
    monkeypatch.setattr(settings, "DATA_DIR", tmp_path / "data")
    monkeypatch.setattr(settings, "LOGS_DIR", tmp_path / "logs")
    (tmp_path / "runs").mkdir()
    (tmp_path / "data").mkdir()
    return settings
