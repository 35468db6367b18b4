"""
retrain 서브커맨드
전선 구성원(기준점 태그) 또는 유전자형 파일을 학습 세트 전체로 재학습하고,
원본 정사각 커널 네트워크 대비 곱셈 수 감소 배율을 보고합니다.
"""
import logging
from pathlib import Path
from typing import Optional

from ..config import settings
from ..data.dataset import Dataset, split
from ..data.loaders import load_dataset
from ..exceptions import ConfigError
from ..schemas.genotype import Genotype
from ..schemas.run import RetrainConfig, RetrainReport
from ..search.cost import genotype_cost
from ..search.evaluator import retrain_reference
from ..search.genotype import canonical_key, get_template, uniform_genotype
from ..utils.validators import load_genotype_file
from .evolve import read_run_config
from .export import reference_genotype, write_json

logger = logging.getLogger(__name__)


def reduction_factor(benchmark_mults: int, mults: int) -> float:
    """원본 곱셈 수 / 후보 곱셈 수 (소수 둘째 자리)"""
    if mults <= 0:
        raise ConfigError(f"candidate mults must be positive, got {mults}")
    return round(benchmark_mults / mults, 2)


def resolve_source(
    run_dir: Optional[Path] = None,
    ref: Optional[str] = None,
    genotype_file: Optional[Path] = None,
) -> tuple[Genotype, str]:
    """재학습 대상 유전자형과 출처 이름"""
    if genotype_file is not None:
        return load_genotype_file(genotype_file), str(genotype_file)
    if run_dir is None or ref is None:
        raise ConfigError("retrain needs either a genotype file or a run directory with --ref")
    if ref not in ("ref1", "ref2", "ref3"):
        raise ConfigError(f"unknown reference point '{ref}' (expected ref1, ref2 or ref3)")
    return reference_genotype(run_dir, ref), f"{Path(run_dir).name}:{ref}"


def run_retrain(
    config: RetrainConfig,
    run_dir: Optional[Path] = None,
    ref: Optional[str] = None,
    genotype_file: Optional[Path] = None,
    template_id: Optional[str] = None,
    train_set: Optional[Dataset] = None,
    test_set: Optional[Dataset] = None,
) -> RetrainReport:
    """
    재학습 후 보고서 반환 (run_dir 이 있으면 retrain_<ref>.json 으로도 기록)
    train_set / test_set 을 주지 않으면 데이터셋 ID 로 공식 파일을 적재합니다.
    """
    genotype, source = resolve_source(run_dir, ref, genotype_file)

    run_config = read_run_config(run_dir) if run_dir is not None else None
    template_id = template_id or (run_config.template if run_config else None)
    if template_id is None:
        raise ConfigError("--template is required when retraining from a genotype file")
    dataset_id = config.dataset or (run_config.dataset if run_config else None)
    if dataset_id is None:
        raise ConfigError("--dataset is required when retraining from a genotype file")
    if run_config is not None and dataset_id != run_config.dataset:
        logger.info("transferring %s from %s to %s", source, run_config.dataset, dataset_id)

    template = get_template(template_id, dataset_id)
    data_dir = config.data_dir or settings.DATA_DIR
    if train_set is None:
        train_set = load_dataset(dataset_id, data_dir, train=True)
        if config.train_size is not None:
            train_set = split(train_set, (config.train_size,), config.seed)[0]
    if test_set is None:
        test_set = load_dataset(dataset_id, data_dir, train=False)

    result = retrain_reference(genotype, template, train_set, test_set, config, dataset_id)
    mults = genotype_cost(genotype, template).total_conv_mults
    benchmark = uniform_genotype(template, template.benchmark_shape_id, genotype.mode)
    benchmark_mults = genotype_cost(benchmark, template).total_conv_mults
    factor = reduction_factor(benchmark_mults, mults)

    benchmark_accuracy = improvement = None
    if config.compare_benchmark:
        benchmark_accuracy = retrain_reference(benchmark, template, train_set, test_set, config, dataset_id).test_accuracy
        improvement = result.test_accuracy - benchmark_accuracy

    report = RetrainReport(
        source=source,
        key=canonical_key(genotype),
        dataset=dataset_id,
        epochs=config.resolved_epochs(),
        augment=result.augmented,
        test_accuracy=result.test_accuracy,
        mults=mults,
        benchmark_mults=benchmark_mults,
        reduction_factor=factor,
        reduction=f"{factor:.2f}x",
        benchmark_accuracy=benchmark_accuracy,
        accuracy_improvement=improvement,
        lr_trace=result.lr_trace,
        loss_trace=result.loss_trace,
    )
    if run_dir is not None:
        write_json(Path(run_dir) / f"retrain_{ref or 'genotype'}_{dataset_id}.json", report.model_dump(mode="json"))
    return report
