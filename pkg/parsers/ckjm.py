"""
ckjm 메트릭 출력 파서
"클래스명 WMC DIT NOC CBO RFC LCOM Ca NPM" 형식의 줄
"""
from pathlib import Path
from typing import Dict

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import METRIC_NAMES
from parsers.base import BaseParser
from utils.matching import normalize_class_id
from utils.model import MetricsTable, MetricVector, is_valid_class_id

TOKENS_PER_LINE = 1 + len(METRIC_NAMES)


class CkjmParser(BaseParser):
    """ckjm 8-메트릭 출력 파서"""

    FORMAT_NAME = "ckjm"

    def parse(self, text: str) -> MetricsTable:
        rows: Dict[str, MetricVector] = {}

        for lineno, line in self._iter_lines(text):
            tokens = line.split()
            if len(tokens) != TOKENS_PER_LINE:
                raise self._error(
                    f"expected {TOKENS_PER_LINE} tokens (class + {len(METRIC_NAMES)} metrics), "
                    f"got {len(tokens)}", lineno)

            class_id = normalize_class_id(tokens[0])
            if not is_valid_class_id(class_id):
                raise self._error(f"invalid class id {tokens[0]!r}", lineno, 1)
            if class_id in rows:
                raise self._error(f"duplicate class name {class_id}", lineno, 1)

            values = [
                self._parse_count(token, lineno, column=i + 2, what=METRIC_NAMES[i])
                for i, token in enumerate(tokens[1:])
            ]
            try:
                rows[class_id] = MetricVector.from_sequence(values)
            except ValueError as e:
                raise self._error(str(e), lineno)

        self.logger.info(f"ckjm 메트릭 {len(rows)}개 클래스 파싱")
        return MetricsTable(rows=rows)


def parse_ckjm_metrics(text: str) -> MetricsTable:
    """ckjm 메트릭 줄 파싱"""
    return CkjmParser().parse(text)


def format_ckjm(table: MetricsTable) -> str:
    """
    MetricsTable을 ckjm 줄 형식으로 직렬화 (클래스명 정렬)

    Args:
        table: 메트릭 표

    Returns:
        줄마다 "클래스명 WMC DIT NOC CBO RFC LCOM Ca NPM"
    """
    lines = []
    for class_id in table.class_ids():
        values = ' '.join(str(v) for v in table.rows[class_id].as_tuple())
        lines.append(f"{class_id} {values}\n")
    return ''.join(lines)
