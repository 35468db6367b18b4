"""
evolve 실행
실행 디렉토리 잠금, 설정/출처 기록, 세대별 체크포인트와 재개, 최종 산출물 내보내기를 담당합니다.

실행 디렉토리 구성:
    config.json            해석된 설정 + git describe
    checkpoints/gen_XXXX.json
    evaluations.jsonl      학습한 유전자형마다 한 줄
    fitness_cache.db       적합도 캐시
    pareto_front.csv / .json / .svg
    reference_points.json, kernels_ref1.csv ...
    hypervolume.csv
"""
import logging
import math
import os
import subprocess
import time
from pathlib import Path
from typing import Optional

import numpy as np

from ..config import settings
from ..data.dataset import split
from ..data.loaders import load_dataset
from ..database import create_db_engine, create_session_factory, database_url, init_db
from ..exceptions import ArtifactError, ConfigError, RunLockedError
from ..nn.network import INIT_SCHEME
from ..schemas.run import Checkpoint, IndividualRecord, RunConfig
from ..search.evaluator import Evaluator, FitnessCache
from ..search.genotype import genotype_from_dict, genotype_to_dict, get_template
from ..search.moea import (
    Evaluate,
    EvolveSettings,
    EvolveState,
    Individual,
    evolve,
    hypervolume,
    rng_from_dict,
    rng_state_to_dict,
)
from ..utils.logger import get_current_time
from .export import (
    HYPERVOLUME_CSV,
    export_front,
    export_kernel_distribution,
    member_genotype,
    read_json,
    write_hypervolume_csv,
    write_json,
    write_kernel_csv,
    write_reference_points,
)
from .reference import select_reference_points

logger = logging.getLogger(__name__)

CONFIG_JSON = "config.json"
CHECKPOINT_DIR = "checkpoints"
EVALUATION_LOG = "evaluations.jsonl"
LOCK_FILE = ".lock"
FRESH_LOCK_SECONDS = 5.0

# 재개 시 바뀌어도 되는 설정
RESUMABLE_FIELDS = {"generations", "workers", "data_dir", "output_dir"}


def pid_alive(pid: int) -> bool:
    """pid 의 프로세스가 살아 있는지 (권한이 없어도 존재하면 True)"""
    if pid <= 0:
        return False
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    except OSError:
        return False
    return True


class RunLock:
    """
    실행 디렉토리 하나는 프로세스 하나만 사용

    잠금 파일에는 소유 프로세스의 pid 를 적습니다.
    소유 프로세스가 죽었거나 pid 를 읽을 수 없으면 남은 잠금으로 보고 새로 잡습니다.
    """

    def __init__(self, run_dir: Path):
        self.path = Path(run_dir) / LOCK_FILE

    def _owner(self) -> Optional[int]:
        try:
            return int(self.path.read_text().strip())
        except (OSError, ValueError):
            return None

    def _fresh(self) -> bool:
        # 다른 프로세스가 막 만들고 아직 pid 를 쓰지 않은 잠금
        try:
            return time.time() - self.path.stat().st_mtime < FRESH_LOCK_SECONDS
        except OSError:
            return False

    def __enter__(self):
        for _ in range(2):
            try:
                fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            except FileExistsError:
                owner = self._owner()
                if (owner is not None and pid_alive(owner)) or (owner is None and self._fresh()):
                    raise RunLockedError(
                        f"run directory is locked by another process: {self.path}",
                        path=str(self.path),
                        pid=owner,
                    )
                logger.warning("removing stale run lock %s (pid %s)", self.path, owner)
                self.path.unlink(missing_ok=True)
                continue
            with os.fdopen(fd, "w") as f:
                f.write(str(os.getpid()))
            return self
        raise RunLockedError(f"could not acquire run lock: {self.path}", path=str(self.path))

    def __exit__(self, *exc):
        self.path.unlink(missing_ok=True)
        return False


def provenance() -> str:
    """git describe 결과 (git 이 없으면 unknown)"""
    try:
        result = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=settings.BASE_DIR,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return result.stdout.strip() if result.returncode == 0 and result.stdout.strip() else "unknown"


def default_run_dir(config: RunConfig) -> Path:
    return settings.RUNS_DIR / f"{config.template}_{config.dataset}_{config.mode.value}_s{config.seed}"


# === 체크포인트 ===

def _record(individual: Individual) -> IndividualRecord:
    crowding = individual.crowding
    return IndividualRecord(
        **genotype_to_dict(individual.genotype),
        fitness=list(individual.fitness),
        rank=individual.rank,
        crowding=None if crowding is None or math.isinf(crowding) else crowding,
    )


def _individual(record: IndividualRecord) -> Individual:
    return Individual(
        genotype=genotype_from_dict({"layers": record.layers, "mode": record.mode.value}),
        fitness=tuple(record.fitness),
        rank=record.rank,
        crowding=math.inf if record.crowding is None else record.crowding,
    )


def checkpoint_path(run_dir: Path, generation: int) -> Path:
    return Path(run_dir) / CHECKPOINT_DIR / f"gen_{generation:04d}.json"


def save_checkpoint(state: EvolveState, run_dir: Path, generations_total: int) -> Path:
    path = checkpoint_path(run_dir, state.generation)
    path.parent.mkdir(parents=True, exist_ok=True)
    checkpoint = Checkpoint(
        generation=state.generation,
        generations_total=generations_total,
        rng_state=rng_state_to_dict(state.rng),
        population=[_record(ind) for ind in state.population],
        archive=[_record(ind) for ind in state.archive],
        evaluated=[_record(ind) for ind in state.evaluated.values()],
        archive_history=[[list(f) for f in gen] for gen in state.archive_history],
    )
    tmp = path.with_suffix(".json.tmp")
    write_json(tmp, checkpoint.model_dump(mode="json"))
    os.replace(tmp, path)
    return path


def load_checkpoint(path: Path) -> Checkpoint:
    return Checkpoint(**read_json(path))


def latest_checkpoint(run_dir: Path) -> Optional[Path]:
    paths = sorted((Path(run_dir) / CHECKPOINT_DIR).glob("gen_*.json"))
    return paths[-1] if paths else None


def state_from_checkpoint(checkpoint: Checkpoint) -> EvolveState:
    evaluated = {}
    for record in checkpoint.evaluated:
        individual = _individual(record)
        evaluated[individual.key] = individual
    return EvolveState(
        generation=checkpoint.generation,
        rng=rng_from_dict(checkpoint.rng_state),
        population=[_individual(r) for r in checkpoint.population],
        archive=[_individual(r) for r in checkpoint.archive],
        evaluated=evaluated,
        archive_history=[[tuple(f) for f in gen] for gen in checkpoint.archive_history],
    )


# === 설정 기록 ===

def _write_config(config: RunConfig, run_dir: Path) -> None:
    """해석된 설정 기록. 기존 실행 디렉토리면 재개 가능한 설정인지 확인"""
    path = run_dir / CONFIG_JSON
    resolved = config.resolved().model_dump(mode="json")
    if path.exists():
        previous = read_json(path)["config"]
        changed = sorted(
            k for k in resolved
            if k not in RESUMABLE_FIELDS and previous.get(k) != resolved[k]
        )
        if changed:
            raise ConfigError(
                f"run directory {run_dir} was created with a different configuration ({', '.join(changed)})",
                fields=changed,
            )
    write_json(path, {
        "config": resolved,
        "provenance": provenance(),
        "written_at": get_current_time().isoformat(),
        "init_scheme": INIT_SCHEME,
        "normalization": "scale to [0, 1]",
    })


def read_run_config(run_dir: Path) -> RunConfig:
    data = read_json(Path(run_dir) / CONFIG_JSON)
    return RunConfig(**data["config"])


def build_evaluator(config: RunConfig, run_dir: Path) -> Evaluator:
    """데이터셋을 적재하고 탐색 학습/평가 분할로 나눈 평가기 생성"""
    resolved = config.resolved()
    eval_config = resolved.eval_config()
    template = get_template(resolved.template, resolved.dataset)
    full_train = load_dataset(resolved.dataset, resolved.data_dir or settings.DATA_DIR, train=True)
    train_set, eval_set = split(full_train, (eval_config.search_train_size, eval_config.eval_size), resolved.seed)

    engine = create_db_engine(database_url(run_dir))
    init_db(engine)
    cache = FitnessCache(create_session_factory(engine))
    return Evaluator(eval_config, template, train_set, eval_set, cache, log_path=run_dir / EVALUATION_LOG)


# === 최종 산출물 ===

def hypervolume_trace(state: EvolveState) -> list[tuple[int, int, float]]:
    """세대별 아카이브 초부피 (기준점: 평가된 모든 적합도의 성분별 최댓값 + 1)"""
    points = np.asarray([ind.fitness for ind in state.evaluated.values()], dtype=np.float64)
    reference = points.max(axis=0) + 1.0
    return [
        (generation, len(archive), hypervolume(archive, reference))
        for generation, archive in enumerate(state.archive_history)
    ]


def export_run(state: EvolveState, config: RunConfig, run_dir: Path) -> None:
    template = get_template(config.template, config.dataset)
    members = export_front(
        state.archive,
        run_dir,
        title=f"{config.template} / {config.dataset} / {config.mode.value}",
    )
    points = select_reference_points(members)
    write_reference_points(points, run_dir)
    for tag in ("ref1", "ref2", "ref3"):
        member = members[points.get(tag).member_id]
        rows = export_kernel_distribution(member_genotype(member), template)
        write_kernel_csv(rows, run_dir / f"kernels_{tag}.csv")
    write_hypervolume_csv(hypervolume_trace(state), run_dir / HYPERVOLUME_CSV)


def run_evolve(config: RunConfig, evaluate: Optional[Evaluate] = None) -> Path:
    """
    탐색 실행

    실행 디렉토리에 체크포인트가 있으면 가장 최근 세대부터 재개합니다.
    evaluate 를 주지 않으면 데이터셋을 적재해 학습 기반 평가기를 만듭니다.
    """
    run_dir = Path(config.output_dir or default_run_dir(config))
    run_dir.mkdir(parents=True, exist_ok=True)

    with RunLock(run_dir):
        _write_config(config, run_dir)
        template = get_template(config.template, config.dataset)

        resume = None
        latest = latest_checkpoint(run_dir)
        if latest is not None:
            try:
                resume = state_from_checkpoint(load_checkpoint(latest))
            except (ArtifactError, ValueError) as exc:
                raise ArtifactError(f"cannot resume from {latest.name}: {exc}", path=str(latest))

        if evaluate is None:
            evaluate = build_evaluator(config, run_dir)

        evolve_settings = EvolveSettings(
            population=config.population,
            generations=config.generations,
            mutation_rate=config.mutation_rate,
            seed=config.seed,
            workers=config.workers or settings.NUM_WORKERS,
            parent_selection=config.parent_selection,
            include_benchmark=config.include_benchmark,
        )
        state = evolve(
            template,
            config.mode,
            evaluate,
            evolve_settings,
            checkpoint=lambda s: save_checkpoint(s, run_dir, config.generations),
            resume=resume,
        )
        export_run(state, config, run_dir)

    logger.info("run finished: %s (generation %d, %d archive members)", run_dir, state.generation, len(state.archive))
    return run_dir
