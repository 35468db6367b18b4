"""
FastAPI 의존성 함수들
실행 디렉토리 조회와 실행별 캐시 DB 세션을 관리합니다.
"""
from pathlib import Path
from typing import Iterator

from fastapi import Depends, HTTPException, status
from sqlalchemy.orm import Session

from .config import settings
from .database import CACHE_DB_NAME, create_db_engine, create_session_factory, database_url, get_db


def get_runs_dir() -> Path:
    """실행 디렉토리들의 상위 경로"""
    return Path(settings.RUNS_DIR)


def get_run_dir(run_id: str, runs_dir: Path = Depends(get_runs_dir)) -> Path:
    """
    실행 ID → 실행 디렉토리
    경로 탈출이나 존재하지 않는 실행은 404 로 처리합니다.
    """
    if "/" in run_id or "\\" in run_id or run_id.startswith("."):
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=f"실행을 찾을 수 없습니다: {run_id}")

    run_dir = runs_dir / run_id
    if not run_dir.is_dir():
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=f"실행을 찾을 수 없습니다: {run_id}")
    return run_dir


def get_run_db(run_dir: Path = Depends(get_run_dir)) -> Iterator[Session]:
    """
    실행별 적합도 캐시 세션
    세션을 생성하고, 사용이 끝나면 닫습니다.
    """
    if not (run_dir / CACHE_DB_NAME).exists():
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail="적합도 캐시가 없습니다")

    engine = create_db_engine(database_url(run_dir))
    try:
        yield from get_db(create_session_factory(engine))
    finally:
        engine.dispose()
