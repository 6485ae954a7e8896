"""
입력 파서 기본 클래스
파일 읽기, 주석/빈 줄 처리, 위치 정보가 포함된 오류 생성
"""
import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Iterator, Optional, Tuple, Union

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from utils.errors import ParseError


class BaseParser(ABC):
    """
    파서 추상 기본 클래스

    기능:
    - UTF-8 파일 전체 읽기 (BOM 허용)
    - LF/CRLF 줄 단위 순회, 빈 줄과 '#' 주석 무시
    - 줄 번호가 포함된 ParseError 생성
    """

    FORMAT_NAME = "base"  # 하위 클래스에서 오버라이드

    def __init__(self, source: Optional[str] = None):
        """
        Args:
            source: 오류 메시지에 표시할 입력 이름 (파일 경로 등)
        """
        self.logger = logging.getLogger(self.__class__.__name__)
        self.source = source

    def read_file(self, path: Union[str, Path]) -> str:
        """
        파일 전체 읽기 (파싱 전에 모두 읽음)

        Args:
            path: 입력 파일 경로

        Returns:
            파일 내용 문자열
        """
        path = Path(path)
        self.source = str(path)
        text = path.read_text(encoding='utf-8-sig')
        self.logger.debug(f"{self.FORMAT_NAME} 파일 읽음: {path} ({len(text)} 글자)")
        return text

    def parse_file(self, path: Union[str, Path]) -> Any:
        """파일을 읽어서 파싱"""
        return self.parse(self.read_file(path))

    def _iter_lines(self, text: str) -> Iterator[Tuple[int, str]]:
        """
        의미 있는 줄만 순회

        Args:
            text: 입력 텍스트

        Returns:
            (1부터 시작하는 줄 번호, 앞뒤 공백 제거된 줄) 이터레이터
        """
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            yield lineno, line

    def _error(self, message: str, line: Optional[int] = None,
               column: Optional[int] = None) -> ParseError:
        """위치 정보가 포함된 파싱 오류 생성"""
        return ParseError(message, line=line, column=column, source=self.source)

    def _parse_count(self, token: str, line: Optional[int] = None,
                     column: Optional[int] = None, what: str = "value") -> int:
        """
        음이 아닌 정수 토큰 파싱

        Args:
            token: 숫자 토큰
            line: 줄 번호 (오류 메시지용)
            column: 토큰 위치 (오류 메시지용)
            what: 값 이름 (오류 메시지용)

        Returns:
            정수 값
        """
        try:
            value = int(token)
        except ValueError:
            raise self._error(f"non-integer {what} token {token!r}", line, column)
        if value < 0:
            raise self._error(f"negative {what} {value}", line, column)
        return value

    @abstractmethod
    def parse(self, text: str) -> Any:
        """
        텍스트 파싱 (하위 클래스에서 구현 필수)

        Args:
            text: 입력 문서 전체

        Returns:
            파싱 결과
        """
        pass
