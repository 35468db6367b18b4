"""
FastAPI 메인 애플리케이션
탐색 결과를 조회하는 읽기 전용 API (실행 제어는 cli.py)
"""
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.config import settings
from app.exceptions import KernelSearchError
from app.routers import cost_router, runs_router
from app.utils.logger import setup_logging


@asynccontextmanager
async def lifespan(app: FastAPI):
    """애플리케이션 시작/종료 이벤트"""

    # 로그 및 실행 디렉토리 생성
    settings.LOGS_DIR.mkdir(parents=True, exist_ok=True)
    settings.RUNS_DIR.mkdir(parents=True, exist_ok=True)
    setup_logging()

    yield


# FastAPI 앱 생성
app = FastAPI(
    title="kernelshape API",
    description="혼합 커널 모양 NSGA-II 탐색 결과 API",
    version="1.0.0",
    lifespan=lifespan
)

# CORS 설정
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.CORS_ORIGINS,
    allow_credentials=True,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)

# 라우터 등록
app.include_router(cost_router)
app.include_router(runs_router)


@app.exception_handler(KernelSearchError)
async def kernel_search_error_handler(request: Request, exc: KernelSearchError):
    """도메인 예외 → JSON 응답"""
    return JSONResponse(status_code=exc.status_code, content=exc.to_dict())


@app.get("/health")
async def health_check():
    """헬스 체크 엔드포인트"""
    return {"status": "healthy", "service": settings.PROJECT_NAME}


if __name__ == "__main__":
    import uvicorn
    uvicorn.run("main:app", host="0.0.0.0", port=8000, reload=False)
