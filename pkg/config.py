"""
D-Layer Finder 설정 파일
"""
from pathlib import Path

# 프로젝트 경로
PROJECT_ROOT = Path(__file__).parent
DATA_DIR = PROJECT_ROOT / "data"
HISTORY_DB_PATH = DATA_DIR / "runs.db"

# 메트릭 (ckjm 출력 순서 그대로)
METRIC_NAMES = ("WMC", "DIT", "NOC", "CBO", "RFC", "LCOM", "Ca", "NPM")
DLAYER_COLUMN = "D-layer"
CORRELATION_COLUMNS = (DLAYER_COLUMN,) + METRIC_NAMES

# 잠정 아키텍처 레이어 (인덱스 -> 이름)
LAYER_NAMES = {
    1: "Infrastructure",
    2: "BusinessLogic",
    3: "Controllers",
    4: "UserInterface",
}
TENTATIVE_LAYER_COUNT = 4

# 타입 관련
PRIMITIVE_TYPES = frozenset({
    "void", "boolean", "byte", "char", "short", "int", "long", "float", "double",
})
VISIBILITIES = ("public", "protected", "package", "private")
CLASS_KINDS = ("class", "interface")
CONSTRUCTOR_NAME = "<init>"
INITIALIZER_NAME = "<clinit>"

# 메트릭 계산 옵션 (ckjm 실행 조건은 알 수 없음)
COUNT_CONSTRUCTORS = True
COUNT_INITIALIZERS = False

# 상관분석
DEFAULT_ALPHA = 0.05
SIGNIFICANCE_LEVELS = (
    (0.01, "**"),
    (0.05, "*"),
)

# RIPPER 설정
DEFAULT_SEED = 1
DEFAULT_FOLDS = 3            # grow:prune = 2:1
DEFAULT_OPT_PASSES = 2
DL_SLACK_BITS = 64.0
MAX_PRUNE_ERROR = 0.5

# 평가
DEFAULT_CV_FOLDS = 10
EVAL_RESUBSTITUTION = "resub"

# 퍼지 매칭 최소 점수 (0-100)
SUGGESTION_THRESHOLD = 60

# 종료 코드
EXIT_OK = 0
EXIT_PARSE_ERROR = 2
EXIT_PIPELINE_HALT = 3
EXIT_IO_ERROR = 4

# 리포트 번들 파일명
BUNDLE_FILES = {
    "layers": "layers.csv",
    "descriptive_md": "descriptive_stats.md",
    "descriptive_csv": "descriptive_stats.csv",
    "correlations_md": "correlations.md",
    "correlations_csv": "correlations.csv",
    "dataset": "dataset.csv",
    "rules_txt": "rules.txt",
    "rules_json": "rules.json",
    "rule_profiles": "rule_profiles.md",
    "accuracy_md": "accuracy.md",
    "accuracy_csv": "accuracy.csv",
    "recovery_md": "recovery.md",
    "recovery_csv": "recovery.csv",
    "summary": "summary.json",
}

# 합성 시스템 기본값
SYNTH_CLASSES_PER_LAYER = (100, 100, 100, 100)
SYNTH_DOWN_DEP_PROB = 0.02
SYNTH_SKIP_DEP_PROB = 0.005
SYNTH_CYCLE_PROB = 0.05
SYNTH_LAYER_DEPTH = 1

# 레이어별 메트릭 분포 (정수 균등분포 [lo, hi])
# Infrastructure: 낮은 CBO/RFC, Business: 높은 WMC/CBO,
# Controllers: 낮은 CBO/Ca, UI: 낮은 LCOM/DIT
SYNTH_METRIC_PROFILES = {
    1: {"WMC": (3, 8), "DIT": (1, 2), "NOC": (0, 3), "CBO": (0, 2),
        "RFC": (3, 10), "LCOM": (5, 20), "Ca": (10, 40), "NPM": (2, 6)},
    2: {"WMC": (20, 40), "DIT": (2, 4), "NOC": (0, 2), "CBO": (12, 20),
        "RFC": (40, 80), "LCOM": (30, 80), "Ca": (3, 9), "NPM": (10, 18)},
    3: {"WMC": (9, 18), "DIT": (1, 2), "NOC": (0, 1), "CBO": (3, 7),
        "RFC": (15, 35), "LCOM": (10, 25), "Ca": (0, 2), "NPM": (5, 9)},
    4: {"WMC": (9, 18), "DIT": (1, 1), "NOC": (0, 1), "CBO": (8, 11),
        "RFC": (20, 40), "LCOM": (0, 4), "Ca": (0, 2), "NPM": (6, 12)},
}

# 합성 클래스 이름 접두사
SYNTH_CLASS_PREFIXES = {
    1: "infra.Store",
    2: "domain.Entity",
    3: "control.Controller",
    4: "ui.View",
}

# 리포트 텍스트 (한국어)
REPORT_TEXT = {
    "app_title": "D-레이어 파인더",
    "descriptive_title": "기술 통계",
    "correlations_title": "상관관계",
    "rules_title": "분류 규칙",
    "accuracy_title": "정확도",
    "recovery_title": "레이어 복원 (정답 대비)",
    "profiles_title": "레이어별 규칙 프로파일",
    "mode_resub": "재대입 (train = test)",
    "mode_cv": "{k}-fold 교차검증",
    "undefined": "n/a",
    "level_low": "낮음",
    "level_medium": "중간",
    "level_high": "높음",
    "compare_title": "프로젝트별 정확도 비교",
    "common_correlated": "모든 프로젝트에서 D-layer와 상관된 메트릭",
    "history_empty": "실행 기록이 없습니다",
    "halt_no_significant": "D-layer와 유의한 상관을 갖는 메트릭이 없습니다",
    "halt_no_cuts": "선택된 메트릭 중 MDLP 구간이 생성된 것이 없습니다",
}

# 단계별 서브커맨드 중간 파일명
INGEST_FILES = {
    "metrics": "metrics.txt",
    "edges": "edges.txt",
    "class_facts": "classes.xml",
    "truth": "truth.csv",
    "comparison": "comparison.md",
}
