"""
비용 계산 API 라우터
"""
from fastapi import APIRouter, HTTPException
from pydantic import ValidationError

from ..exceptions import KernelSearchError
from ..schemas.genotype import Genotype
from ..schemas.network import CostReport
from ..schemas.run import CostRequest
from ..search.cost import genotype_cost
from ..search.genotype import get_template, shape_from_label, uniform_genotype

router = APIRouter(prefix="/api/v1", tags=["cost"])


@router.post("/cost", response_model=CostReport)
async def compute_cost(request: CostRequest):
    """유전자형 또는 정사각 커널 하나로 채운 템플릿의 곱셈 수"""
    try:
        template = get_template(request.template, request.dataset)
        if request.all_square is not None:
            genotype = uniform_genotype(template, shape_from_label(request.all_square).id, request.mode)
        else:
            genotype = Genotype(layers=tuple(tuple(layer) for layer in request.layers), mode=request.mode)
        if genotype.slot_counts != template.slots:
            raise HTTPException(
                status_code=422,
                detail=f"layer sizes {list(genotype.slot_counts)} do not match template {list(template.slots)}",
            )
        return genotype_cost(genotype, template)
    except ValidationError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except KernelSearchError as exc:
        raise HTTPException(status_code=exc.status_code, detail=exc.detail)
