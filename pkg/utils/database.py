"""
실행 이력 데이터베이스 모델 및 헬퍼 함수
리포트 번들과 별개로 파이프라인 실행 기록을 남긴다 (--history)
"""
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Union

from sqlalchemy import create_engine, Column, Integer, String, Float, DateTime, Text
from sqlalchemy.orm import declarative_base, sessionmaker, Session

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import HISTORY_DB_PATH

Base = declarative_base()


class PipelineRun(Base):
    """파이프라인 실행 기록"""
    __tablename__ = 'pipeline_runs'

    id = Column(Integer, primary_key=True, autoincrement=True)
    input_mode = Column(String(30), nullable=False)  # 'class-facts', 'metrics+edges', 'synth'
    seed = Column(Integer)
    out_dir = Column(String(500))
    started_at = Column(DateTime, default=datetime.utcnow)
    completed_at = Column(DateTime, nullable=True)
    status = Column(String(20), default='running')  # 'running', 'completed', 'halted', 'failed'
    halted_stage = Column(String(30), nullable=True)
    class_count = Column(Integer, default=0)
    rule_count = Column(Integer, default=0)
    accuracy = Column(Float, nullable=True)
    error_message = Column(Text, nullable=True)

    def __repr__(self):
        return f"<PipelineRun {self.id} {self.input_mode} {self.started_at}: {self.status}>"


# 경로별 엔진 및 세션 팩토리
_engines: Dict[str, object] = {}
_sessionmakers: Dict[str, sessionmaker] = {}


def get_engine(db_path: Union[str, Path] = HISTORY_DB_PATH):
    """SQLAlchemy 엔진 반환 (경로별 싱글톤, 첫 호출 시 테이블 생성)"""
    key = str(db_path)
    if key not in _engines:
        Path(db_path).parent.mkdir(parents=True, exist_ok=True)
        engine = create_engine(f"sqlite:///{db_path}", echo=False)
        Base.metadata.create_all(engine)
        _engines[key] = engine
    return _engines[key]


def get_session(db_path: Union[str, Path] = HISTORY_DB_PATH) -> Session:
    """새 세션 반환"""
    key = str(db_path)
    if key not in _sessionmakers:
        _sessionmakers[key] = sessionmaker(bind=get_engine(db_path))
    return _sessionmakers[key]()


def get_recent_runs(session: Session, limit: int = 10) -> List[PipelineRun]:
    """최근 실행 기록 조회"""
    return (
        session.query(PipelineRun)
        .order_by(PipelineRun.started_at.desc(), PipelineRun.id.desc())
        .limit(limit)
        .all()
    )


def create_run(session: Session, input_mode: str, seed: Optional[int],
               out_dir: Optional[str]) -> PipelineRun:
    """실행 기록 생성 (status = running)"""
    run = PipelineRun(input_mode=input_mode, seed=seed, out_dir=out_dir)
    session.add(run)
    session.commit()
    return run


def complete_run(session: Session, run: PipelineRun,
                 class_count: int = 0, rule_count: int = 0,
                 accuracy: Optional[float] = None,
                 status: str = 'completed', halted_stage: Optional[str] = None,
                 error: Optional[str] = None):
    """실행 기록 완료 처리"""
    run.completed_at = datetime.utcnow()
    run.class_count = class_count
    run.rule_count = rule_count
    run.accuracy = accuracy
    run.status = status
    run.halted_stage = halted_stage
    run.error_message = error[:2000] if error else None
    session.commit()
