"""
파이프라인 예외 정의
CLI는 예외 종류별로 종료 코드를 정한다
"""
from typing import List, Optional


class LayerFinderError(Exception):
    """모든 파이프라인 예외의 기본 클래스"""


class ParseError(LayerFinderError, ValueError):
    """입력 문서 파싱 실패 (줄/열 위치 포함)"""

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None, source: Optional[str] = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(self._format())

    def _format(self) -> str:
        where = []
        if self.source:
            where.append(str(self.source))
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.column is not None:
            where.append(f"column {self.column}")
        if where:
            return f"{', '.join(where)}: {self.message}"
        return self.message


class ModelValidationError(LayerFinderError, ValueError):
    """validate_model이 위반 사항을 보고한 모델"""

    def __init__(self, violations: List):
        self.violations = list(violations)
        summary = "; ".join(v.message for v in self.violations[:5])
        more = len(self.violations) - 5
        if more > 0:
            summary += f" (+{more} more)"
        super().__init__(f"class model failed validation: {summary}")


class UndefinedCorrelationError(LayerFinderError, ValueError):
    """상수 벡터라서 상관계수를 정의할 수 없음"""


class PipelineHalt(LayerFinderError):
    """파이프라인이 진단 메시지와 함께 중단됨"""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        self.message = message
        super().__init__(f"[{stage}] {message}")
