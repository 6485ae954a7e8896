"""
CSV 표 파서
정답 레이어(class,layer), 레이어 할당(class,dlayer,tentative_layer), 명목 데이터셋
"""
import io
from pathlib import Path
from typing import Dict, Optional, Tuple

import pandas as pd

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from parsers.base import BaseParser
from utils.discretize import NominalDataset
from utils.layering import LayerAssignment
from utils.matching import did_you_mean, normalize_class_id
from utils.model import ClassId, TentativeLayer, is_valid_class_id


class CsvTableParser(BaseParser):
    """헤더가 있는 CSV를 DataFrame으로 읽는 공통 파서"""

    FORMAT_NAME = "csv"
    REQUIRED_COLUMNS: Tuple[str, ...] = ("class",)

    def _read_frame(self, text: str) -> pd.DataFrame:
        try:
            frame = pd.read_csv(io.StringIO(text), comment='#', skip_blank_lines=True, dtype=str)
        except pd.errors.EmptyDataError:
            raise self._error("empty CSV document", 1)
        except pd.errors.ParserError as e:
            raise self._error(f"CSV syntax error: {e}")

        frame.columns = [str(c).strip() for c in frame.columns]
        for column in self.REQUIRED_COLUMNS:
            if column not in frame.columns:
                raise self._error(
                    f"missing column {column!r}{did_you_mean(column, frame.columns)}", 1)

        frame["class"] = [normalize_class_id(str(c)) for c in frame["class"]]
        for position, class_id in enumerate(frame["class"]):
            if not is_valid_class_id(class_id):
                # 헤더가 1행
                raise self._error(f"invalid class id {class_id!r}", position + 2)
        duplicated = frame["class"][frame["class"].duplicated()]
        if not duplicated.empty:
            position = int(duplicated.index[0])
            raise self._error(f"duplicate class {duplicated.iloc[0]}", position + 2)
        return frame

    def _int_column(self, frame: pd.DataFrame, column: str, lo: int = 0, hi: Optional[int] = None) -> pd.Series:
        values = []
        for position, token in enumerate(frame[column]):
            value = self._parse_count(str(token).strip(), position + 2, what=column)
            if value < lo:
                raise self._error(f"{column} {value} below {lo}", position + 2)
            if hi is not None and value > hi:
                raise self._error(f"{column} {value} outside {lo}..{hi}", position + 2)
            values.append(value)
        return pd.Series(values, index=frame.index, dtype="int64")

    def parse(self, text: str) -> pd.DataFrame:
        return self._read_frame(text)


class TruthParser(CsvTableParser):
    """class,layer 정답 CSV"""

    FORMAT_NAME = "truth"
    REQUIRED_COLUMNS = ("class", "layer")

    def parse(self, text: str) -> Dict[ClassId, TentativeLayer]:
        frame = self._read_frame(text)
        layers = self._int_column(frame, "layer", 1, len(TentativeLayer))
        truth = {c: TentativeLayer(int(l)) for c, l in zip(frame["class"], layers)}
        self.logger.info(f"정답 레이어 {len(truth)}개 클래스")
        return truth


class LayersParser(CsvTableParser):
    """class,dlayer[,tentative_layer] 레이어 할당 CSV"""

    FORMAT_NAME = "layers"
    REQUIRED_COLUMNS = ("class", "dlayer")

    def parse(self, text: str) -> Tuple[LayerAssignment, Dict[ClassId, TentativeLayer]]:
        frame = self._read_frame(text)
        dlayers = self._int_column(frame, "dlayer")
        dlayer_of = {c: int(d) for c, d in zip(frame["class"], dlayers)}
        tentative: Dict[ClassId, TentativeLayer] = {}
        if "tentative_layer" in frame.columns:
            values = self._int_column(frame, "tentative_layer", 1, len(TentativeLayer))
            tentative = {c: TentativeLayer(int(v)) for c, v in zip(frame["class"], values)}
        assign = LayerAssignment(dlayer_of=dlayer_of, max_layer=max(dlayer_of.values(), default=0))
        return assign, tentative


class DatasetParser(CsvTableParser):
    """class,<attr>...,layer 명목 데이터셋 CSV"""

    FORMAT_NAME = "dataset"
    REQUIRED_COLUMNS = ("class", "layer")

    def parse(self, text: str) -> NominalDataset:
        frame = self._read_frame(text)
        converted = pd.DataFrame({"class": frame["class"]})
        for column in frame.columns:
            if column == "class":
                continue
            lo = 1
            hi = len(TentativeLayer) if column == "layer" else None
            converted[column] = self._int_column(frame, column, lo, hi)
        dataset = NominalDataset.from_frame(converted)
        self.logger.info(f"데이터셋 {len(dataset)}행, 속성 {len(dataset.attributes)}개")
        return dataset


def parse_truth(text: str) -> Dict[ClassId, TentativeLayer]:
    """class,layer CSV 파싱"""
    return TruthParser().parse(text)


def parse_layers(text: str) -> Tuple[LayerAssignment, Dict[ClassId, TentativeLayer]]:
    """layers.csv 파싱"""
    return LayersParser().parse(text)


def parse_dataset(text: str) -> NominalDataset:
    """dataset.csv 파싱 (구간 수 = 관측 최댓값)"""
    return DatasetParser().parse(text)


def frame_to_csv(frame: pd.DataFrame, index: bool = False) -> str:
    """LF 줄바꿈 CSV 문자열 (바이트 단위로 재현 가능)"""
    return frame.to_csv(index=index, lineterminator="\n")
