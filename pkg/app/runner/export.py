"""
실행 산출물 내보내기
파레토 전선(CSV/JSON/SVG), 커널 분포 CSV, 초부피 추이 CSV를 쓰고 다시 읽습니다.
"""
import csv
import logging
from pathlib import Path
from typing import Optional, Sequence

import orjson
from jinja2 import Environment, FileSystemLoader, select_autoescape

from ..config import settings
from ..exceptions import ArtifactError, InvariantViolationError
from ..schemas.genotype import REMOVED, Genotype, Mode, NetworkTemplate
from ..schemas.run import FrontMember, KernelCount, ReferencePoints
from ..search.genotype import CATALOGUE, canonical_key, genotype_from_dict, shape_counts
from ..search.moea import Individual, dominates

logger = logging.getLogger(__name__)

FRONT_CSV = "pareto_front.csv"
FRONT_JSON = "pareto_front.json"
FRONT_SVG = "pareto_front.svg"
REFERENCE_JSON = "reference_points.json"
HYPERVOLUME_CSV = "hypervolume.csv"
REMOVED_LABEL = "REMOVED"

FRONT_COLUMNS = ["id", "key", "mode", "mults", "top1_error", "accuracy", "kernel_count", "layers"]


def create_jinja2_env() -> Environment:
    """SVG 템플릿용 Jinja2 환경"""
    return Environment(
        loader=FileSystemLoader(str(settings.TEMPLATES_DIR)),
        autoescape=select_autoescape(["html", "xml", "svg"]),
    )


def write_json(path: Path, data) -> None:
    with open(path, "wb") as f:
        f.write(orjson.dumps(data, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY))


def read_json(path: Path):
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"missing run artifact: {path.name}", path=str(path))
    try:
        with open(path, "rb") as f:
            return orjson.loads(f.read())
    except orjson.JSONDecodeError as exc:
        raise ArtifactError(f"corrupt run artifact {path.name}: {exc}", path=str(path))


def front_members(archive: Sequence[Individual]) -> list[FrontMember]:
    """아카이브 → 곱셈 수 오름차순 전선 구성원"""
    members = []
    for individual in archive:
        fitness = individual.fitness
        members.append({
            "key": canonical_key(individual.genotype),
            "mode": individual.genotype.mode,
            "layers": [list(layer) for layer in individual.genotype.layers],
            "mults": int(round(fitness[0])),
            "top1_error": float(fitness[1]),
            "kernel_count": int(fitness[2]) if len(fitness) > 2 else individual.genotype.kernel_count,
        })
    members.sort(key=lambda m: (m["mults"], m["top1_error"], m["kernel_count"], m["key"]))
    return [FrontMember(id=i, **m) for i, m in enumerate(members)]


def _objectives(member: FrontMember) -> tuple[float, ...]:
    values = (float(member.mults), member.top1_error)
    if member.mode is Mode.THREE_OBJ:
        values += (float(member.kernel_count),)
    return values


def check_mutually_nondominated(members: Sequence[FrontMember]) -> None:
    """내보내는 전선 구성원끼리 서로 지배하지 않는지 확인"""
    for a in members:
        for b in members:
            if a.id != b.id and dominates(_objectives(a), _objectives(b)):
                raise InvariantViolationError(f"front member {a.id} dominates member {b.id}")


def render_front_svg(members: Sequence[FrontMember], title: str = "Pareto front") -> str:
    """곱셈 수(x) 대 오류율(y) 산점도, three_obj 에서는 커널 수를 점 크기로"""
    width, height, margin = 640, 420, 60
    xs = [m.mults for m in members] or [0]
    ys = [m.top1_error for m in members] or [0.0]
    ks = [m.kernel_count for m in members] or [0]
    x_low, x_high = min(xs), max(xs)
    y_low, y_high = min(ys), max(ys)
    k_low, k_high = min(ks), max(ks)

    def scale(value, low, high, start, end):
        if high == low:
            return (start + end) / 2
        return start + (value - low) / (high - low) * (end - start)

    points = []
    for m in members:
        radius = 4.0
        if m.mode is Mode.THREE_OBJ:
            radius = scale(m.kernel_count, k_low, k_high, 3.0, 9.0)
        points.append({
            "id": m.id,
            "x": round(scale(m.mults, x_low, x_high, margin, width - margin), 2),
            "y": round(scale(m.top1_error, y_low, y_high, height - margin, margin), 2),
            "r": round(radius, 2),
            "label": f"#{m.id}: {m.mults:,} mults, error {m.top1_error:.4f}, {m.kernel_count} kernels",
        })

    template = create_jinja2_env().get_template("pareto_front.svg")
    return template.render(
        title=title,
        width=width,
        height=height,
        margin=margin,
        points=points,
        x_range=(f"{x_low:,}", f"{x_high:,}"),
        y_range=(f"{y_low:.4f}", f"{y_high:.4f}"),
    )


def export_front(archive: Sequence[Individual], run_dir: Path, title: str = "Pareto front") -> list[FrontMember]:
    """pareto_front.csv / .json / .svg 기록"""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    members = front_members(archive)
    check_mutually_nondominated(members)

    with open(run_dir / FRONT_CSV, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(FRONT_COLUMNS)
        for m in members:
            writer.writerow([
                m.id, m.key, m.mode.value, m.mults, f"{m.top1_error:.6f}", f"{m.accuracy:.6f}",
                m.kernel_count, orjson.dumps(m.layers).decode(),
            ])
    write_json(run_dir / FRONT_JSON, [m.model_dump(mode="json") for m in members])
    (run_dir / FRONT_SVG).write_text(render_front_svg(members, title), encoding="utf-8")

    logger.info("exported %d front members to %s", len(members), run_dir)
    return members


def read_front(run_dir: Path) -> list[FrontMember]:
    return [FrontMember(**m) for m in read_json(Path(run_dir) / FRONT_JSON)]


def read_front_csv(path: Path) -> list[FrontMember]:
    """pareto_front.csv 를 다시 읽음"""
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"missing run artifact: {path.name}", path=str(path))
    with open(path, newline="", encoding="utf-8") as f:
        return [
            FrontMember(
                id=int(row["id"]),
                key=row["key"],
                mode=Mode(row["mode"]),
                layers=orjson.loads(row["layers"]),
                mults=int(row["mults"]),
                top1_error=float(row["top1_error"]),
                kernel_count=int(row["kernel_count"]),
            )
            for row in csv.DictReader(f)
        ]


def member_genotype(member: FrontMember) -> Genotype:
    return genotype_from_dict({"layers": member.layers, "mode": member.mode.value})


def write_reference_points(points: ReferencePoints, run_dir: Path) -> None:
    write_json(Path(run_dir) / REFERENCE_JSON, points.model_dump(mode="json"))


def read_reference_points(run_dir: Path) -> ReferencePoints:
    return ReferencePoints(**read_json(Path(run_dir) / REFERENCE_JSON))


def reference_genotype(run_dir: Path, ref: str) -> Genotype:
    """기준점 ref 가 가리키는 전선 구성원의 유전자형"""
    points = read_reference_points(run_dir)
    members = {m.id: m for m in read_front(run_dir)}
    member_id = points.get(ref).member_id
    if member_id not in members:
        raise ArtifactError(
            f"reference point {ref} points at front member #{member_id}, which is not in {FRONT_JSON}",
            path=str(Path(run_dir) / REFERENCE_JSON),
            member_id=member_id,
        )
    return member_genotype(members[member_id])


def export_kernel_distribution(genotype: Genotype, template: Optional[NetworkTemplate] = None) -> list[KernelCount]:
    """
    층별 커널 모양 분포
    9개 모양과 REMOVED 행을 모두 포함하며, 층마다 개수 합은 슬롯 수와 같습니다.
    """
    if template is not None and genotype.slot_counts != template.slots:
        raise InvariantViolationError(
            f"genotype slot counts {genotype.slot_counts} do not match template {template.slots}"
        )
    rows = []
    for index, layer in enumerate(genotype.layers, start=1):
        counts = shape_counts(layer)
        rows.extend(KernelCount(layer_index=index, shape_label=s.label, count=int(counts[s.id])) for s in CATALOGUE)
        rows.append(KernelCount(layer_index=index, shape_label=REMOVED_LABEL, count=int(counts[REMOVED])))
    return rows


def write_kernel_csv(rows: Sequence[KernelCount], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["layer_index", "shape_label", "count"])
        for row in rows:
            writer.writerow([row.layer_index, row.shape_label, row.count])


def write_hypervolume_csv(trace: Sequence[tuple[int, int, float]], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["generation", "archive_size", "hypervolume"])
        for generation, size, value in trace:
            writer.writerow([generation, size, repr(float(value))])
