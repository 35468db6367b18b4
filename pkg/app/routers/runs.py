"""
실행 결과 조회 API 라우터 (읽기 전용)
"""
from pathlib import Path
from typing import Literal

from fastapi import APIRouter, Depends, HTTPException
from sqlalchemy.orm import Session

from ..dependencies import get_run_db, get_run_dir, get_runs_dir
from ..exceptions import KernelSearchError
from ..models import FitnessCacheEntry
from ..runner.evolve import CONFIG_JSON, latest_checkpoint, read_run_config
from ..runner.export import (
    FRONT_JSON,
    export_kernel_distribution,
    read_front,
    read_reference_points,
    reference_genotype,
)
from ..schemas.run import FrontMember, KernelCount, ReferencePoints, RunSummary

router = APIRouter(prefix="/api/v1/runs", tags=["runs"])


def _summary(run_dir: Path) -> RunSummary:
    summary = RunSummary(run_id=run_dir.name, has_front=(run_dir / FRONT_JSON).exists())
    if (run_dir / CONFIG_JSON).exists():
        try:
            config = read_run_config(run_dir)
            summary.template, summary.dataset, summary.mode = config.template, config.dataset, config.mode
        except (KernelSearchError, ValueError):
            pass
    latest = latest_checkpoint(run_dir)
    if latest is not None:
        summary.generation = int(latest.stem.split("_")[1])
    return summary


@router.get("/", response_model=list[RunSummary])
async def list_runs(runs_dir: Path = Depends(get_runs_dir)):
    """실행 디렉토리 목록"""
    if not runs_dir.is_dir():
        return []
    return [_summary(d) for d in sorted(runs_dir.iterdir()) if d.is_dir() and not d.name.startswith(".")]


@router.get("/{run_id}/front", response_model=list[FrontMember])
async def get_front(run_dir: Path = Depends(get_run_dir)):
    """최종 파레토 전선"""
    try:
        return read_front(run_dir)
    except KernelSearchError as exc:
        raise HTTPException(status_code=exc.status_code, detail=exc.detail)


@router.get("/{run_id}/reference-points", response_model=ReferencePoints)
async def get_reference_points(run_dir: Path = Depends(get_run_dir)):
    """기준점 ref1/ref2/ref3"""
    try:
        return read_reference_points(run_dir)
    except KernelSearchError as exc:
        raise HTTPException(status_code=exc.status_code, detail=exc.detail)


@router.get("/{run_id}/kernels", response_model=list[KernelCount])
async def get_kernels(ref: Literal["ref1", "ref2", "ref3"] = "ref1", run_dir: Path = Depends(get_run_dir)):
    """기준점 유전자형의 층별 커널 분포"""
    try:
        genotype = reference_genotype(run_dir, ref)
    except KernelSearchError as exc:
        raise HTTPException(status_code=exc.status_code, detail=exc.detail)
    return export_kernel_distribution(genotype)


@router.get("/{run_id}/evaluations")
async def get_evaluations(db: Session = Depends(get_run_db)):
    """적합도 캐시 항목 (학습 순서)"""
    rows = db.query(FitnessCacheEntry).order_by(FitnessCacheEntry.id).all()
    return [
        {
            "key": row.canonical_key,
            "mults": row.mults,
            "top1_error": row.top1_error,
            "kernel_count": row.kernel_count,
            "epochs": row.epochs,
            "seed": row.seed,
            "wall_time": row.wall_time,
            "failed": bool(row.failed),
            "created_at": row.created_at.isoformat() if row.created_at else None,
        }
        for row in rows
    ]
