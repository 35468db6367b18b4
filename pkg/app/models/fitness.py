"""
적합도 캐시(FitnessCache) 모델
정규 키(canonical key) 하나당 한 번의 학습 결과를 저장합니다.
"""
from sqlalchemy import Column, DateTime, Float, Integer, String
from sqlalchemy.sql import func

from ..database import Base


class FitnessCacheEntry(Base):
    """
    적합도 캐시 항목
    한 번 기록된 항목은 수정하지 않습니다.
    """
    __tablename__ = "fitness_cache"

    id = Column(Integer, primary_key=True, index=True)
    canonical_key = Column(String(512), unique=True, nullable=False, index=True)
    mults = Column(Integer, nullable=False)
    top1_error = Column(Float, nullable=False)
    kernel_count = Column(Integer, nullable=False)
    epochs = Column(Integer, nullable=False)
    seed = Column(String(64), nullable=False)  # 64비트를 넘을 수 있어 문자열로 저장
    wall_time = Column(Float, default=0.0)
    failed = Column(Integer, default=0)  # 1: 학습 실패로 최악 적합도 부여
    created_at = Column(DateTime, server_default=func.now())

    def __repr__(self):
        return f"<FitnessCacheEntry(key='{self.canonical_key[:24]}...', mults={self.mults}, error={self.top1_error:.4f})>"
