"""
적합도 평가기
유전자형 → 해독 → 학습 → 평가 분할 Top-1 오류율 + 분석적 곱셈 수.
같은 정규 키는 한 번만 학습하며, 결과는 실행 디렉토리의 SQLite 캐시에 기록합니다.
"""
import hashlib
import logging
import threading
import time
from concurrent.futures import Future
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from sqlalchemy.exc import IntegrityError, OperationalError
from sqlalchemy.orm import sessionmaker

from ..data.dataset import Dataset
from ..exceptions import ComputeError
from ..models import FitnessCacheEntry
from ..nn.network import Network
from ..nn.optim import AdamState, StepSchedule
from ..nn.train import TrainResult, evaluate_top1, train
from ..schemas.genotype import Genotype, NetworkTemplate
from ..schemas.run import EvalConfig, RetrainConfig
from ..utils.logger import append_jsonl
from .cost import genotype_cost, template_max_mults
from .genotype import canonical_key, decode

logger = logging.getLogger(__name__)

WRITE_ATTEMPTS = 5
WRITE_RETRY_SECONDS = 0.05


@dataclass(frozen=True)
class FitnessRecord:
    """캐시 항목 하나"""

    mults: int
    top1_error: float
    kernel_count: int
    epochs: int
    seed: str
    wall_time: float = 0.0
    failed: bool = False

    @property
    def vector(self) -> tuple[float, float, float]:
        return (float(self.mults), float(self.top1_error), float(self.kernel_count))


def key_entropy(key: str) -> int:
    """정규 키의 SHA-256 앞 128비트"""
    return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:16], "big")


def genotype_seed(global_seed: int, key: str) -> np.random.SeedSequence:
    """전역 시드와 정규 키를 섞은 시드 (평가 순서와 무관)"""
    return np.random.SeedSequence([int(global_seed), key_entropy(key)])


class FitnessCache:
    """
    정규 키 → FitnessRecord 저장소
    메모리 맵 앞단 + SQLite 쓰기 후 기록, 진행 중인 키는 Future 로 중복 학습을 막습니다.
    """

    def __init__(self, session_factory: Optional[sessionmaker] = None):
        self.session_factory = session_factory
        self._lock = threading.Lock()
        self._memo: dict[str, FitnessRecord] = {}
        self._inflight: dict[str, Future] = {}
        self.hits = 0
        self.misses = 0
        if session_factory is not None:
            self._load()

    def _load(self) -> None:
        db = self.session_factory()
        try:
            for row in db.query(FitnessCacheEntry).all():
                self._memo[row.canonical_key] = FitnessRecord(
                    mults=row.mults,
                    top1_error=row.top1_error,
                    kernel_count=row.kernel_count,
                    epochs=row.epochs,
                    seed=row.seed,
                    wall_time=row.wall_time or 0.0,
                    failed=bool(row.failed),
                )
        finally:
            db.close()
        if self._memo:
            logger.info("fitness cache loaded with %d entries", len(self._memo))

    def __len__(self) -> int:
        return len(self._memo)

    def __contains__(self, key: str) -> bool:
        return key in self._memo

    def get(self, key: str) -> Optional[FitnessRecord]:
        with self._lock:
            return self._memo.get(key)

    def put(self, key: str, record: FitnessRecord) -> FitnessRecord:
        """한 번 기록된 항목은 바꾸지 않고 기존 값을 반환"""
        with self._lock:
            existing = self._memo.get(key)
            if existing is not None:
                return existing
            self._memo[key] = record
        if self.session_factory is not None:
            self._write(key, record)
        return record

    def _write(self, key: str, record: FitnessRecord) -> None:
        """
        SQLite 에 한 줄 기록
        잠긴 DB 는 잠시 뒤 다시 시도하고, 끝내 실패하면 경고만 남깁니다 (메모리 값은 유지).
        """
        for attempt in range(1, WRITE_ATTEMPTS + 1):
            db = self.session_factory()
            try:
                db.add(FitnessCacheEntry(
                    canonical_key=key,
                    mults=record.mults,
                    top1_error=record.top1_error,
                    kernel_count=record.kernel_count,
                    epochs=record.epochs,
                    seed=record.seed,
                    wall_time=record.wall_time,
                    failed=int(record.failed),
                ))
                db.commit()
                return
            except IntegrityError:
                db.rollback()
                return
            except OperationalError as exc:
                db.rollback()
                if attempt == WRITE_ATTEMPTS:
                    logger.warning("fitness cache write for %s failed after %d attempts: %s", key, attempt, exc)
                    return
                time.sleep(WRITE_RETRY_SECONDS * attempt)
            finally:
                db.close()

    def get_or_compute(self, key: str, compute: Callable[[], FitnessRecord]) -> FitnessRecord:
        """캐시 조회, 없으면 한 워커만 compute 를 실행하고 나머지는 결과를 기다림"""
        with self._lock:
            record = self._memo.get(key)
            if record is not None:
                self.hits += 1
                return record
            future = self._inflight.get(key)
            owner = future is None
            if owner:
                future = Future()
                self._inflight[key] = future
                self.misses += 1
            else:
                self.hits += 1

        if not owner:
            return future.result()

        try:
            record = self.put(key, compute())
            future.set_result(record)
            return record
        except BaseException as exc:
            future.set_exception(exc)
            raise
        finally:
            with self._lock:
                self._inflight.pop(key, None)


class Evaluator:
    """
    탐색 중 적합도 평가

    반환값은 (곱셈 수, top1 오류율, 커널 수) 이며, 모드에 맞게 앞에서부터 잘라 씁니다.
    학습이 발산하면 최악 적합도를 캐시에 기록합니다.
    """

    def __init__(
        self,
        config: EvalConfig,
        template: NetworkTemplate,
        train_set: Dataset,
        eval_set: Dataset,
        cache: Optional[FitnessCache] = None,
        log_path: Optional[Path] = None,
    ):
        self.config = config
        self.template = template
        self.train_set = train_set
        self.eval_set = eval_set
        self.cache = cache or FitnessCache()
        self.log_path = log_path
        self._worst_mults = 2 * template_max_mults(template)

    def __call__(self, genotype: Genotype) -> tuple[float, float, float]:
        return self.evaluate(genotype)

    def evaluate(self, genotype: Genotype) -> tuple[float, float, float]:
        key = canonical_key(genotype)
        return self.cache.get_or_compute(key, lambda: self._train_and_score(genotype, key)).vector

    def _train_and_score(self, genotype: Genotype, key: str) -> FitnessRecord:
        cost = genotype_cost(genotype, self.template)
        seed_seq = genotype_seed(self.config.seed, key)
        init_seq, shuffle_seq = seed_seq.spawn(2)
        started = time.perf_counter()

        try:
            network = Network(decode(genotype, self.template), np.random.default_rng(init_seq))
            if self.config.epochs > 0:
                train(
                    network,
                    self.train_set,
                    epochs=self.config.epochs,
                    batch_size=self.config.batch_size,
                    optimizer=AdamState(lr=self.config.lr),
                    rng=np.random.default_rng(shuffle_seq),
                )
            error = 1.0 - evaluate_top1(network, self.eval_set)
            record = FitnessRecord(
                mults=cost.total_conv_mults,
                top1_error=float(min(max(error, 0.0), 1.0)),
                kernel_count=cost.kernel_count,
                epochs=self.config.epochs,
                seed=str(key_entropy(key)),
                wall_time=time.perf_counter() - started,
            )
        except ComputeError as exc:
            logger.warning("training failed for %s: %s", key, exc.detail)
            record = FitnessRecord(
                mults=self._worst_mults,
                top1_error=1.0,
                kernel_count=self.template.total_slots,
                epochs=self.config.epochs,
                seed=str(key_entropy(key)),
                wall_time=time.perf_counter() - started,
                failed=True,
            )

        if self.log_path is not None:
            append_jsonl(self.log_path, {
                "key": key,
                "layers": [list(layer) for layer in genotype.layers],
                "mode": genotype.mode.value,
                "mults": record.mults,
                "top1_error": record.top1_error,
                "kernel_count": record.kernel_count,
                "epochs": record.epochs,
                "batch_size": self.config.batch_size,
                "seed": record.seed,
                "wall_time": round(record.wall_time, 3),
                "failed": record.failed,
            })
        logger.debug("evaluated %s: mults=%d error=%.4f (%.1fs)", key, record.mults, record.top1_error, record.wall_time)
        return record


@dataclass
class RetrainResult:
    network: Network
    test_accuracy: float
    loss_trace: list[float] = field(default_factory=list)
    lr_trace: list[float] = field(default_factory=list)
    augmented: bool = False


def retrain_reference(
    genotype: Genotype,
    template: NetworkTemplate,
    train_set: Dataset,
    test_set: Dataset,
    config: RetrainConfig,
    dataset_id: Optional[str] = None,
) -> RetrainResult:
    """
    학습 세트 전체로 재학습 후 테스트 정확도 보고
    가중치 감쇠와 (CIFAR-10 기본) 증강을 켜고, lr_drop_epoch 에서 학습률을 줄입니다.
    발산하면 DivergenceError 를 그대로 전달합니다.
    dataset_id 를 주지 않으면 학습 세트의 source 로 증강 여부를 정합니다.
    """
    key = canonical_key(genotype)
    init_seq, shuffle_seq, augment_seq = genotype_seed(config.seed, key).spawn(3)
    network = Network(decode(genotype, template), np.random.default_rng(init_seq))
    epochs = config.resolved_epochs()
    augmented = epochs > 0 and config.resolved_augment(dataset_id or train_set.source)

    result = TrainResult(network=network)
    if epochs > 0:
        result = train(
            network,
            train_set,
            epochs=epochs,
            batch_size=config.batch_size,
            optimizer=AdamState(lr=config.lr, weight_decay=config.weight_decay),
            schedule=StepSchedule(
                base_lr=config.lr,
                drop_epochs=(config.lr_drop_epoch,),
                factor=config.lr_drop_factor,
            ),
            augment=augmented,
            rng=np.random.default_rng(shuffle_seq),
            augment_rng=np.random.default_rng(augment_seq),
        )
    accuracy = evaluate_top1(network, test_set)
    logger.info("retrained %s for %d epochs: test accuracy %.4f", key, epochs, accuracy)
    return RetrainResult(
        network=network,
        test_accuracy=accuracy,
        loss_trace=result.loss_trace,
        lr_trace=result.lr_trace,
        augmented=augmented,
    )
