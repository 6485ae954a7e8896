"""
의존 관계 엣지 리스트 파서
한 줄에 하나씩 "A -> B" 또는 "A,B"
"""
from pathlib import Path
from typing import FrozenSet, Iterable, NamedTuple

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from parsers.base import BaseParser
from utils.matching import normalize_class_id
from utils.model import is_valid_class_id


class EdgeRecord(NamedTuple):
    """클래스 간 의존 엣지 (source가 target에 의존)"""
    source: str
    target: str


class ParsedEdges(NamedTuple):
    """엣지 집합과 제거된 자기 참조 엣지 수"""
    edges: FrozenSet[EdgeRecord]
    self_edges: int


class EdgeListParser(BaseParser):
    """엣지 리스트 파서 (줄마다 문법 자동 판별)"""

    FORMAT_NAME = "edges"

    def parse(self, text: str) -> ParsedEdges:
        edges = set()
        self_edges = 0

        for lineno, line in self._iter_lines(text):
            if '->' in line:
                parts = line.split('->')
            elif ',' in line:
                parts = line.split(',')
            else:
                raise self._error(f"malformed edge line {line!r} (expected 'A -> B' or 'A,B')", lineno)

            if len(parts) != 2:
                raise self._error(f"malformed edge line {line!r}", lineno)

            source, target = (normalize_class_id(p) for p in parts)
            for name in (source, target):
                if not is_valid_class_id(name):
                    raise self._error(f"invalid class id {name!r} in edge line", lineno)

            if source == target:
                self_edges += 1
                continue
            edges.add(EdgeRecord(source, target))

        if self_edges:
            self.logger.warning(f"자기 참조 엣지 {self_edges}개 제거")
        self.logger.info(f"엣지 {len(edges)}개 파싱")
        return ParsedEdges(frozenset(edges), self_edges)


def parse_edges(text: str) -> ParsedEdges:
    """엣지 리스트 텍스트 파싱 (중복 제거, 자기 참조 엣지 수 집계)"""
    return EdgeListParser().parse(text)


def format_edges(edges: Iterable[EdgeRecord]) -> str:
    """엣지 집합을 정렬된 "A -> B" 줄로 직렬화"""
    lines = [f"{e.source} -> {e.target}" for e in sorted(set(edges))]
    return ''.join(line + '\n' for line in lines)
