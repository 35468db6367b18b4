"""
NSGA-II 탐색 엔진
지배 관계, 빠른 비지배 정렬, 혼잡 거리, 엘리트 생존 선택, 세대 루프를 구현합니다.
모든 목적 함수는 최소화합니다.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from pymoo.indicators.hv import HV

from ..exceptions import ComputeError, ConfigError, DominanceError
from ..schemas.genotype import Genotype, Mode, NetworkTemplate
from .cost import template_max_mults
from .genotype import canonical_key, mutate, random_genotype, uniform_genotype

logger = logging.getLogger(__name__)

FitnessVector = tuple[float, ...]
Evaluate = Callable[[Genotype], Sequence[float]]

PARENT_SELECTIONS = ("mutate_all", "tournament")


@dataclass
class Individual:
    """유전자형과 적합도, 정렬 후 부여되는 순위/혼잡 거리"""

    genotype: Genotype
    fitness: Optional[FitnessVector] = None
    rank: Optional[int] = None
    crowding: Optional[float] = None

    @property
    def key(self) -> str:
        return canonical_key(self.genotype)


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """a 가 모든 목적에서 b 이하이고 하나 이상에서 더 작으면 True"""
    if len(a) != len(b):
        raise DominanceError(f"objective count mismatch: {len(a)} vs {len(b)}")
    strictly_better = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            strictly_better = True
    return strictly_better


def _fronts(points: Sequence[Sequence[float]]) -> list[list[int]]:
    """인덱스 기반 빠른 비지배 정렬 (각 전선 안은 인덱스 오름차순)"""
    n = len(points)
    dominated_by_me: list[list[int]] = [[] for _ in range(n)]
    domination_count = [0] * n
    fronts: list[list[int]] = [[]]

    for p in range(n):
        for q in range(p + 1, n):
            if dominates(points[p], points[q]):
                dominated_by_me[p].append(q)
                domination_count[q] += 1
            elif dominates(points[q], points[p]):
                dominated_by_me[q].append(p)
                domination_count[p] += 1
    fronts[0] = [p for p in range(n) if domination_count[p] == 0]

    i = 0
    while fronts[i]:
        next_front = []
        for p in fronts[i]:
            for q in dominated_by_me[p]:
                domination_count[q] -= 1
                if domination_count[q] == 0:
                    next_front.append(q)
        i += 1
        fronts.append(sorted(next_front))
    fronts.pop()
    return fronts


def fast_nondominated_sort(population: Sequence[Individual]) -> list[list[int]]:
    """
    비지배 전선 목록 (인덱스 리스트)
    전선 0 이 비지배 집합이며, 각 개체의 rank 를 전선 번호로 설정합니다.
    """
    for index, individual in enumerate(population):
        if individual.fitness is None:
            raise ComputeError(f"individual {index} has not been evaluated", index=index)

    fronts = _fronts([ind.fitness for ind in population])
    for rank, front in enumerate(fronts):
        for index in front:
            population[index].rank = rank
    return fronts


def crowding_distance(front: Sequence[Sequence[float]]) -> list[float]:
    """
    전선 내 혼잡 거리
    목적별로 정렬해 경계 개체는 무한대, 내부 개체는 이웃 간 정규화 차이를 더합니다.
    값 범위가 0 인 목적은 기여하지 않습니다.
    """
    n = len(front)
    if n == 0:
        return []
    if n <= 2:
        return [float("inf")] * n

    values = np.asarray(front, dtype=np.float64)
    distances = np.zeros(n, dtype=np.float64)
    for m in range(values.shape[1]):
        order = np.argsort(values[:, m], kind="stable")
        low, high = values[order[0], m], values[order[-1], m]
        span = high - low
        if span == 0:
            continue
        distances[order[0]] = np.inf
        distances[order[-1]] = np.inf
        gaps = (values[order[2:], m] - values[order[:-2], m]) / span
        distances[order[1:-1]] += gaps
    return [float(d) for d in distances]


def select_survivors(pool: Sequence[Individual], mu: int) -> list[Individual]:
    """
    전선 번호 오름차순으로 채우고, 경계에 걸친 전선은 혼잡 거리 내림차순으로 자릅니다.
    동률은 원래 순서를 유지합니다.
    """
    if len(pool) < mu:
        raise ComputeError(f"cannot select {mu} survivors from a pool of {len(pool)}")

    survivors: list[Individual] = []
    for front in fast_nondominated_sort(pool):
        distances = crowding_distance([pool[i].fitness for i in front])
        for index, distance in zip(front, distances):
            pool[index].crowding = distance
        if len(survivors) + len(front) <= mu:
            survivors.extend(pool[i] for i in front)
        else:
            remaining = mu - len(survivors)
            ranked = sorted(range(len(front)), key=lambda j: -distances[j])
            survivors.extend(pool[front[j]] for j in sorted(ranked[:remaining]))
        if len(survivors) == mu:
            break
    return survivors


def update_archive(archive: Sequence[Individual], candidates: Sequence[Individual]) -> list[Individual]:
    """비지배 집합 병합 (정규 키가 같은 개체는 먼저 들어온 것만 유지)"""
    merged: list[Individual] = []
    keys = set()
    for individual in list(archive) + list(candidates):
        key = individual.key
        if key in keys:
            continue
        keys.add(key)
        merged.append(individual)
    return [merged[i] for i in _fronts([ind.fitness for ind in merged])[0]] if merged else []


def hypervolume(points: Sequence[Sequence[float]], reference: Sequence[float]) -> float:
    """기준점 대비 초부피 (기준점을 넘지 않는 점만 기여)"""
    if len(points) == 0:
        return 0.0
    return float(HV(ref_point=np.asarray(reference, dtype=np.float64))(np.asarray(points, dtype=np.float64)))


def _tournament(population: Sequence[Individual], rng: np.random.Generator) -> list[Individual]:
    """혼잡 이진 토너먼트 (순위가 낮을수록, 같으면 혼잡 거리가 클수록 우선)"""
    picks = []
    for _ in range(len(population)):
        i, j = (int(k) for k in rng.integers(len(population), size=2))
        a, b = population[i], population[j]
        if (a.rank, -(a.crowding or 0.0)) <= (b.rank, -(b.crowding or 0.0)):
            picks.append(a)
        else:
            picks.append(b)
    return picks


def rng_state_to_dict(rng: np.random.Generator) -> dict:
    """PCG64 상태 직렬화 (128비트 정수는 문자열로)"""
    state = rng.bit_generator.state
    return {
        "bit_generator": state["bit_generator"],
        "state": {k: str(v) for k, v in state["state"].items()},
        "has_uint32": state["has_uint32"],
        "uinteger": state["uinteger"],
    }


def rng_from_dict(data: dict) -> np.random.Generator:
    bit_generator = np.random.PCG64()
    bit_generator.state = {
        "bit_generator": data["bit_generator"],
        "state": {k: int(v) for k, v in data["state"].items()},
        "has_uint32": data["has_uint32"],
        "uinteger": data["uinteger"],
    }
    return np.random.Generator(bit_generator)


@dataclass
class EvolveState:
    """세대 사이의 전체 탐색 상태 (체크포인트 단위)"""

    generation: int
    rng: np.random.Generator
    population: list[Individual]
    archive: list[Individual]
    evaluated: dict[str, Individual] = field(default_factory=dict)
    archive_history: list[list[FitnessVector]] = field(default_factory=list)


@dataclass
class EvolveSettings:
    population: int = 25
    generations: int = 100
    mutation_rate: float = 0.1
    seed: int = 0
    workers: int = 1
    parent_selection: str = "mutate_all"
    include_benchmark: bool = False


class _FitnessAssigner:
    """정규 키 단위로 한 번만 평가하고, 실패하면 최악 적합도를 부여"""

    def __init__(self, evaluate: Evaluate, mode: Mode, worst: FitnessVector, workers: int):
        self.evaluate = evaluate
        self.mode = mode
        self.worst = worst
        self.workers = max(1, workers)

    def _safe(self, genotype: Genotype) -> FitnessVector:
        try:
            result = self.evaluate(genotype)
        except Exception as exc:
            logger.warning("evaluation failed for %s: %s; assigning worst-case fitness", canonical_key(genotype), exc)
            return self.worst
        fitness = tuple(float(v) for v in list(result)[: self.mode.n_objectives])
        if len(fitness) != self.mode.n_objectives or not all(np.isfinite(fitness)):
            logger.warning("evaluator returned invalid fitness %s for %s", result, canonical_key(genotype))
            return self.worst
        return fitness

    def assign(self, genotypes: Sequence[Genotype], evaluated: dict[str, Individual]) -> list[Individual]:
        pending: dict[str, Genotype] = {}
        for genotype in genotypes:
            key = canonical_key(genotype)
            if key not in evaluated and key not in pending:
                pending[key] = genotype

        if pending:
            items = list(pending.items())
            if self.workers > 1 and len(items) > 1:
                with ThreadPoolExecutor(max_workers=self.workers) as pool:
                    results = list(pool.map(self._safe, [g for _, g in items]))
            else:
                results = [self._safe(g) for _, g in items]
            for (key, genotype), fitness in zip(items, results):
                evaluated[key] = Individual(genotype=genotype, fitness=fitness)

        return [Individual(genotype=g, fitness=evaluated[canonical_key(g)].fitness) for g in genotypes]


def worst_fitness(template: NetworkTemplate, mode: Mode) -> FitnessVector:
    """평가 실패 시 부여하는 적합도 (최대 곱셈 수의 2배, 오류율 1.0, 전체 슬롯 수)"""
    worst = (float(2 * template_max_mults(template)), 1.0, float(template.total_slots))
    return worst[: mode.n_objectives]


def evolve(
    template: NetworkTemplate,
    mode: Mode,
    evaluate: Evaluate,
    settings: Optional[EvolveSettings] = None,
    checkpoint: Optional[Callable[[EvolveState], None]] = None,
    resume: Optional[EvolveState] = None,
) -> EvolveState:
    """
    세대 루프

    부모마다 돌연변이 자식 하나를 만들고(교차 없음), 처음 보는 유전자형만 평가한 뒤
    부모 ∪ 자식에서 μ 개를 생존시킵니다. 아카이브는 평가된 모든 개체의 비지배 집합입니다.
    매 세대 끝에 checkpoint(state) 를 호출합니다. generation 은 초기화 이후 세대 수입니다.
    """
    settings = settings or EvolveSettings()
    mu = settings.population
    if mu < 2 or mu % 2:
        raise ConfigError(f"population must be an even number >= 2, got {mu}")
    if settings.generations < 0:
        raise ConfigError(f"generations must be >= 0, got {settings.generations}")
    if settings.parent_selection not in PARENT_SELECTIONS:
        raise ConfigError(
            f"unknown parent selection '{settings.parent_selection}' "
            f"(expected one of {', '.join(PARENT_SELECTIONS)})"
        )

    assigner = _FitnessAssigner(evaluate, mode, worst_fitness(template, mode), settings.workers)

    if resume is not None:
        state = resume
        logger.info("resuming from generation %d", state.generation)
    else:
        rng = np.random.default_rng(settings.seed)
        genotypes = [random_genotype(template, mode, rng) for _ in range(mu)]
        if settings.include_benchmark:
            genotypes[0] = uniform_genotype(template, template.benchmark_shape_id, mode)
        evaluated: dict[str, Individual] = {}
        population = select_survivors(assigner.assign(genotypes, evaluated), mu)
        archive = update_archive([], population)
        state = EvolveState(
            generation=0,
            rng=rng,
            population=population,
            archive=archive,
            evaluated=evaluated,
            archive_history=[[ind.fitness for ind in archive]],
        )
        _log_generation(state, settings.generations)
        if checkpoint is not None:
            checkpoint(state)

    rng = state.rng
    while state.generation < settings.generations:
        if settings.parent_selection == "tournament":
            parents = _tournament(state.population, rng)
        else:
            parents = state.population
        children = [mutate(parent.genotype, settings.mutation_rate, rng) for parent in parents]
        offspring = assigner.assign(children, state.evaluated)

        state.population = select_survivors(list(state.population) + offspring, mu)
        state.archive = update_archive(state.archive, offspring)
        state.generation += 1
        state.archive_history.append([ind.fitness for ind in state.archive])
        _log_generation(state, settings.generations)
        if checkpoint is not None:
            checkpoint(state)

    return state


def _log_generation(state: EvolveState, total: int) -> None:
    best = min(ind.fitness for ind in state.archive)
    logger.info(
        "generation %d/%d (%d counting the initial population): archive=%d evaluated=%d min-mults member=%s",
        state.generation, total, state.generation + 1, len(state.archive), len(state.evaluated), best,
    )
