"""
D-Layer Finder - 명령행 진입점
"""
from pathlib import Path
import sys

# 프로젝트 루트를 경로에 추가
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from app.cli import main

if __name__ == "__main__":
    sys.exit(main())
