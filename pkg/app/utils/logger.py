"""
로깅 유틸리티
모듈별 로거 설정과 평가 로그(JSON lines) 기록을 담당합니다.
"""
import logging
import os
from datetime import datetime
from pathlib import Path
from typing import Optional

import orjson
import pytz

from ..config import settings

LOG_FORMAT = "[%(asctime)s] %(levelname)s %(name)s: %(message)s"

_configured = False


def get_current_time() -> datetime:
    """설정된 시간대의 현재 시각 반환"""
    return datetime.now(pytz.timezone(settings.TIMEZONE))


def setup_logging(level: Optional[str] = None, log_file: Optional[Path] = None) -> None:
    """루트 로거에 콘솔/파일 핸들러 설정 (한 번만 수행)"""
    global _configured
    if _configured:
        return

    root = logging.getLogger("app")
    root.setLevel(level or settings.LOG_LEVEL)
    formatter = logging.Formatter(LOG_FORMAT)

    console = logging.StreamHandler()
    console.setFormatter(formatter)
    root.addHandler(console)

    log_dir = settings.LOGS_DIR
    if log_file is None:
        try:
            os.makedirs(log_dir, exist_ok=True)
            log_file = log_dir / "kernelshape.log"
        except OSError:
            log_file = None
    if log_file is not None:
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)

    _configured = True


def append_jsonl(path: Path, record: dict) -> None:
    """JSON lines 파일에 레코드 한 줄 추가 (타임스탬프 포함)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    record = {"timestamp": get_current_time().isoformat(), **record}
    with open(path, "ab") as f:
        f.write(orjson.dumps(record, option=orjson.OPT_SERIALIZE_NUMPY) + b"\n")


def read_jsonl(path: Path) -> list[dict]:
    """JSON lines 파일 읽기"""
    path = Path(path)
    if not path.exists():
        return []
    with open(path, "rb") as f:
        return [orjson.loads(line) for line in f if line.strip()]
