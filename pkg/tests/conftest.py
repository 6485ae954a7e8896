"""
공통 테스트 픽스처
"""
from pathlib import Path
from typing import Dict, Sequence

import numpy as np
import pytest

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from parsers.class_facts import ClassFactsParser
from utils.discretize import NominalDataset
from utils.synth import SynthParams

FIXTURES = Path(__file__).parent / "fixtures"


def make_dataset(values: Sequence[Sequence[int]], labels: Sequence[int],
                 attributes: Sequence[str], domain_sizes: Sequence[int] = None,
                 prefix: str = "c") -> NominalDataset:
    """행렬로 NominalDataset 생성 (클래스명은 prefix + 0 채운 번호라 정렬 순서 유지)"""
    array = np.asarray(values, dtype=np.int64).reshape(len(labels), len(attributes))
    if domain_sizes is None:
        domain_sizes = [int(array[:, j].max()) if len(labels) else 1 for j in range(len(attributes))]
    return NominalDataset(
        class_ids=tuple(f"{prefix}{i:05d}" for i in range(len(labels))),
        attributes=tuple(attributes),
        values=array,
        labels=np.asarray(labels, dtype=np.int64),
        domain_sizes=tuple(domain_sizes),
    )


def planted_dataset(n: int = 1000, noise: float = 0.0, seed: int = 7) -> NominalDataset:
    """
    레이어가 두 속성의 논리곱으로 정해지는 데이터셋

    CBO=1 -> 1, CBO=2 and LCOM=1 -> 3, CBO=3 -> 4, 나머지 -> 2.
    noise 비율만큼 레이블을 무작위로 바꾼다.
    """
    rng = np.random.default_rng(seed)
    values = np.column_stack([
        rng.integers(1, 4, size=n),   # CBO
        rng.integers(1, 3, size=n),   # LCOM
        rng.integers(1, 4, size=n),   # RFC (무관한 속성)
    ])
    labels = np.full(n, 2, dtype=np.int64)
    labels[values[:, 0] == 1] = 1
    labels[(values[:, 0] == 2) & (values[:, 1] == 1)] = 3
    labels[values[:, 0] == 3] = 4
    flip = rng.random(n) < noise
    labels[flip] = rng.integers(1, 5, size=int(flip.sum()))
    return make_dataset(values, labels, ["CBO", "LCOM", "RFC"], domain_sizes=[3, 2, 3])


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def shop_model():
    return ClassFactsParser().parse_file(FIXTURES / "shop.xml")


@pytest.fixture
def three_model():
    return ClassFactsParser().parse_file(FIXTURES / "three_classes.xml")


@pytest.fixture
def small_synth() -> SynthParams:
    """테스트용 4 x 25 클래스 시스템"""
    return SynthParams(classes_per_layer=(25, 25, 25, 25), seed=3)


@pytest.fixture
def history_db(tmp_path) -> Path:
    return tmp_path / "runs.db"


def metric_rows(table) -> Dict[str, tuple]:
    return {c: table.rows[c].as_tuple() for c in table.class_ids()}
