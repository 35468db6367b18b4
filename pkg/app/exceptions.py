"""
도메인 예외 정의
CLI 종료 코드(2: 설정, 3: 데이터, 4: 연산)와 HTTP 상태 코드로 변환됩니다.
"""
from typing import Optional


class KernelSearchError(Exception):
    """모든 도메인 예외의 기반 클래스"""

    exit_code: int = 1
    status_code: int = 500

    def __init__(self, detail: str, **context):
        self.detail = detail
        self.context = context
        super().__init__(detail)

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "detail": self.detail, **self.context}


class ConfigError(KernelSearchError):
    """설정 오류"""

    exit_code = 2
    status_code = 422


class DataError(KernelSearchError):
    """데이터셋 파일/형식 오류"""

    exit_code = 3
    status_code = 422


class ComputeError(KernelSearchError):
    """학습/탐색 중 연산 오류"""

    exit_code = 4
    status_code = 500


class ShapeMismatchError(ComputeError):
    """연산 입력의 형상 불일치"""

    def __init__(self, layer: str, expected, actual):
        super().__init__(
            f"{layer}: expected shape {tuple(expected)}, got {tuple(actual)}",
            layer=layer,
            expected=list(expected),
            actual=list(actual),
        )


class ConcatError(ComputeError):
    """채널 연결 시 공간 크기 불일치 (같은 해상도 패딩 규약 위반)"""


class ShapeUnderflowError(ComputeError):
    """1픽셀 특징 맵을 풀링하려는 경우"""


class DivergenceError(ComputeError):
    """학습 손실이 유한하지 않은 값이 된 경우"""

    def __init__(self, epoch: int, batch: int, loss: float):
        super().__init__(
            f"training diverged at epoch {epoch}, batch {batch} (loss={loss})",
            epoch=epoch,
            batch=batch,
        )


class NonFiniteGradientError(ComputeError):
    """Adam 스텝 입력 기울기에 NaN/Inf 가 있는 경우"""


class LabelRangeError(ComputeError):
    """클래스 인덱스가 범위를 벗어난 경우"""


class InvariantViolationError(ComputeError):
    """유전자형 불변식 위반 (예: 모든 커널이 제거된 층)"""


class DominanceError(ComputeError):
    """지배 관계 비교에서 목적 함수 개수가 다른 경우"""


class RunLockedError(ConfigError):
    """다른 프로세스가 실행 디렉토리를 점유 중"""


class ArtifactError(ConfigError):
    """실행 산출물(체크포인트, 프론트 파일 등)이 없거나 손상된 경우"""

    status_code = 404

    def __init__(self, detail: str, path: Optional[str] = None, **context):
        super().__init__(detail, path=path, **context)
