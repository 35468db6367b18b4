"""
SQLAlchemy 데이터베이스 설정
실행 디렉토리마다 SQLite 파일 하나에 적합도 캐시를 저장합니다.
"""
from pathlib import Path
from typing import Iterator

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.ext.declarative import declarative_base
from sqlalchemy.orm import Session, sessionmaker

Base = declarative_base()

CACHE_DB_NAME = "fitness_cache.db"
# 잠긴 DB 를 기다리는 시간 (초)
SQLITE_BUSY_TIMEOUT = 30


def database_url(run_dir: Path) -> str:
    """실행 디렉토리의 캐시 DB URL 반환"""
    return f"sqlite:///{Path(run_dir) / CACHE_DB_NAME}"


def create_db_engine(url: str) -> Engine:
    """엔진 생성 (SQLite 는 여러 워커 스레드에서 공유)"""
    if url.startswith("sqlite"):
        return create_engine(url, connect_args={"check_same_thread": False, "timeout": SQLITE_BUSY_TIMEOUT})
    return create_engine(url, pool_pre_ping=True, pool_recycle=3600)


def create_session_factory(engine: Engine) -> sessionmaker:
    """세션 팩토리 생성"""
    return sessionmaker(autocommit=False, autoflush=False, bind=engine)


def init_db(engine: Engine) -> None:
    """데이터베이스 테이블 생성"""
    from .models import FitnessCacheEntry  # noqa

    Base.metadata.create_all(bind=engine)


def get_db(session_factory: sessionmaker) -> Iterator[Session]:
    """
    데이터베이스 세션 제너레이터
    세션을 생성하고, 사용이 끝나면 닫습니다.
    """
    db = session_factory()
    try:
        yield db
    finally:
        db.close()
