"""실험 결과 집계와 CSV 기록 유틸리티

이 모듈은 pandas로 RunRecord를 집계하고, 행 모델 목록을 CSV로 기록합니다.
CSV는 UTF-8, 헤더 행, `.` 소수점, 인덱스 없음 형식입니다.
"""

import os
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel

from app.config import logger
from app.schemas.records import RunRecord, SummaryRow
from app.utils.errors import InputValidationError, OutputError

SUMMARY_METRICS = {"p_tx_w": "p_tx_w", "rho": "rho", "reward": "reward_raw"}


def nearest_rank(values: Sequence[float] | np.ndarray, percent: int) -> float:
    """nearest-rank 방식의 백분위수를 반환합니다.

    정렬된 n개 값에서 ceil(percent·n/100)번째(1부터) 값을 고릅니다.

    Args:
        values (Sequence[float] | np.ndarray): 값 목록 (1개 이상).
        percent (int): 백분위, (0, 100].

    Returns:
        float: 백분위수.
    """
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    if ordered.size == 0:
        raise InputValidationError("빈 목록의 백분위수는 정의되지 않습니다.")
    if not 0 < percent <= 100:
        raise InputValidationError(f"percent는 (0, 100] 범위여야 합니다: {percent}")
    rank = max(1, -(-percent * ordered.size // 100))
    return float(ordered[rank - 1])


def summarize(
    values: Sequence[float] | np.ndarray,
    *,
    series: str,
    x: float,
    metric: str,
    mean_epoch_time_s: float,
) -> SummaryRow:
    """시드별 값 목록을 SummaryRow 하나로 요약합니다."""
    data = np.asarray(values, dtype=np.float64)
    return SummaryRow(
        series=series,
        x=float(x),
        metric=metric,
        median=nearest_rank(data, 50),
        p10=nearest_rank(data, 10),
        p90=nearest_rank(data, 90),
        variance=float(np.var(data)),
        mean_epoch_time_s=float(mean_epoch_time_s),
        repetitions=int(data.size),
    )


def records_frame(records: Sequence[RunRecord]) -> pd.DataFrame:
    columns = list(RunRecord.model_fields)
    return pd.DataFrame([record.model_dump() for record in records], columns=columns)


def episode_summaries(records: Sequence[RunRecord], series: str) -> list[SummaryRow]:
    """에피소드마다 시드별 평균을 구한 뒤 시드들에 걸쳐 요약합니다.

    Args:
        records (Sequence[RunRecord]): 모든 반복의 스텝 기록.
        series (str): 계열 이름.

    Returns:
        list[SummaryRow]: (에피소드, 지표)마다 한 행.
    """
    frame = records_frame(records)
    if frame.empty:
        return []
    if frame["seed"].nunique() < 2:
        logger.warning("Summary for %s computed from a single repetition", series)
    per_seed = frame.groupby(["episode", "seed"], sort=True).mean(numeric_only=True)
    rows: list[SummaryRow] = []
    for episode, group in per_seed.groupby(level="episode", sort=True):
        epoch_time = float(group["epoch_wall_time_s"].mean())
        for metric, column in SUMMARY_METRICS.items():
            rows.append(
                summarize(
                    group[column].to_numpy(),
                    series=series,
                    x=float(episode),
                    metric=metric,
                    mean_epoch_time_s=epoch_time,
                )
            )
    return rows


def converged_summaries(
    records: Sequence[RunRecord], series: str, fraction: float, episodes: int
) -> list[SummaryRow]:
    """마지막 fraction 비율의 에피소드(수렴 구간)에서 시드별 평균을 구해 요약합니다.

    x는 수렴 구간의 첫 에피소드입니다.
    """
    frame = records_frame(records)
    if frame.empty:
        return []
    window = max(1, int(np.ceil(fraction * episodes)))
    first = episodes - window
    tail = frame[frame["episode"] >= first]
    per_seed = tail.groupby("seed", sort=True).mean(numeric_only=True)
    epoch_time = float(per_seed["epoch_wall_time_s"].mean())
    return [
        summarize(
            per_seed[column].to_numpy(),
            series=series,
            x=float(first),
            metric=metric,
            mean_epoch_time_s=epoch_time,
        )
        for metric, column in SUMMARY_METRICS.items()
    ]


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """pandas 순위 상관으로 Spearman 계수를 구합니다. 점이 2개 미만이면 NaN입니다."""
    if len(x) < 2:
        return float("nan")
    return float(pd.Series(list(x)).corr(pd.Series(list(y)), method="spearman"))


def write_rows(rows: Sequence[BaseModel], model: type[BaseModel], path: str | Path) -> Path:
    """행 모델 목록을 CSV 파일로 기록합니다. 행이 없어도 헤더는 기록합니다.

    Args:
        rows (Sequence[BaseModel]): 기록할 행.
        model (type[BaseModel]): 컬럼 순서를 정하는 행 모델.
        path (str | Path): 파일 경로. 상위 디렉터리는 만들어 둡니다.

    Returns:
        Path: 기록한 파일 경로.

    Raises:
        OutputError: 디렉터리를 만들거나 파일을 쓸 수 없는 경우.
    """
    path = Path(path)
    frame = pd.DataFrame([row.model_dump() for row in rows], columns=list(model.model_fields))
    try:
        os.makedirs(path.parent, exist_ok=True)
        frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    except OSError as err:
        logger.error("Failed to write %s", path, exc_info=True)
        raise OutputError(f"결과 파일을 쓸 수 없습니다: {path}: {err}") from err
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path


def prepare_output_dir(path: str | Path) -> Path:
    """결과 디렉터리를 만들고 쓰기 가능한지 확인합니다.

    Raises:
        OutputError: 디렉터리를 만들 수 없거나 쓰기 권한이 없는 경우.
    """
    path = Path(path)
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as err:
        raise OutputError(f"결과 디렉터리를 만들 수 없습니다: {path}: {err}") from err
    if not os.access(path, os.W_OK):
        raise OutputError(f"결과 디렉터리에 쓸 수 없습니다: {path}")
    return path
