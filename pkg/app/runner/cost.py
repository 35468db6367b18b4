"""
cost 서브커맨드: 유전자형 파일 또는 정사각 커널 하나로 채운 템플릿의 곱셈 수 보고
"""
from pathlib import Path
from typing import Optional

from ..exceptions import ConfigError
from ..schemas.genotype import Genotype, Mode
from ..schemas.network import CostReport
from ..search.cost import genotype_cost
from ..search.genotype import get_template, shape_from_label, uniform_genotype
from ..utils.validators import load_genotype_file


def resolve_genotype(
    template_id: str,
    dataset_id: str,
    genotype_file: Optional[Path] = None,
    all_square: Optional[str] = None,
    mode: Mode = Mode.TWO_OBJ,
) -> Genotype:
    if (genotype_file is None) == (all_square is None):
        raise ConfigError("exactly one of a genotype file or --all-square is required")
    template = get_template(template_id, dataset_id)
    if all_square is not None:
        return uniform_genotype(template, shape_from_label(all_square).id, mode)
    genotype = load_genotype_file(genotype_file)
    if genotype.slot_counts != template.slots:
        raise ConfigError(
            f"{genotype_file}: layer sizes {genotype.slot_counts} do not match template "
            f"'{template_id}' {template.slots}",
            path=str(genotype_file),
        )
    return genotype


def run_cost(
    template_id: str,
    dataset_id: str,
    genotype_file: Optional[Path] = None,
    all_square: Optional[str] = None,
) -> CostReport:
    template = get_template(template_id, dataset_id)
    genotype = resolve_genotype(template_id, dataset_id, genotype_file, all_square)
    return genotype_cost(genotype, template)


def format_cost_report(report: CostReport) -> str:
    lines = [f"layer {i}: {mults:,} mults" for i, mults in enumerate(report.per_layer_mults, start=1)]
    lines.append(f"total conv mults: {report.total_conv_mults:,}")
    lines.append(f"fc mults: {report.fc_mults:,}")
    lines.append(f"kernels: {report.kernel_count}")
    return "\n".join(lines)
