"""시간 측정과 관련된 유틸리티 함수를 제공합니다.

모든 측정은 단조 시계(time.perf_counter)를 사용합니다.
"""

import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator


def get_monotonic_seconds() -> float:
    """단조 시계의 현재 값을 초 단위로 반환합니다."""
    return time.perf_counter()


@dataclass
class Stopwatch:
    """구간별 경과 시간을 누적하는 스톱워치

    Attributes:
        total (float): 누적 경과 시간 (초)
        laps (int): 측정한 구간 수
    """

    total: float = 0.0
    laps: int = 0

    @contextmanager
    def lap(self) -> Iterator[None]:
        start = get_monotonic_seconds()
        try:
            yield
        finally:
            self.total += get_monotonic_seconds() - start
            self.laps += 1

    @property
    def mean(self) -> float:
        """구간당 평균 시간. 측정 전에는 0.0"""
        return self.total / self.laps if self.laps else 0.0
