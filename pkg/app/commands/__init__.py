"""CLI 하위 명령을 구성하는 모듈들

각 모듈은 argparse 하위 명령을 등록하는 register 함수를 제공합니다.
common.py에는 모든 명령이 공유하는 옵션과 설정 처리 함수가 정의되어 있습니다.
"""

from .diagnostics import register as register_diagnostics
from .training import register as register_training

__all__ = ["register_training", "register_diagnostics"]
