"""실험 결과 레코드 스키마 모듈

이 모듈은 CSV로 기록되는 행(row) 모델을 정의합니다. 필드 순서가 곧 CSV 컬럼 순서입니다.

클래스 목록:
    - RunRecord: 환경 스텝 하나의 기록
    - SummaryRow: 반복(시드)들에 걸친 통계 요약
    - TrendRow: 위치 스윕의 Spearman 순위 상관
    - ScalabilityRow / FitRow: 결정 에폭 실행 시간과 다항식 적합 계수
    - SolverReportRow / SolverSummaryRow: 내부 솔버 검증 결과
    - ScalingLawRow: 수신 전력 스케일링 측정 결과
"""

from pydantic import BaseModel, ConfigDict

# 컬럼 구성이 바뀌면 올립니다. README의 컬럼 표와 함께 관리합니다.
CSV_SCHEMA_VERSION = 1


class Row(BaseModel):
    """모든 CSV 행의 베이스"""

    model_config = ConfigDict(frozen=True, extra="forbid")


class RunRecord(Row):
    """환경 스텝 하나의 기록

    Attributes:
        seed (int): 반복의 시드
        episode (int): 에피소드 번호 (0부터)
        step (int): 에피소드 안의 스텝 번호 (0부터)
        reward_raw (float): 정규화 전 보상
        p_tx_w (float): 실행한 행동의 송신 전력 (W)
        rho (float): 실행한 행동의 PS 비율
        feasible (bool): 실제 채널에서 제약을 만족했는지 여부
        executed_was_optimized (bool): 최적화 후보를 실행했는지 여부
        epoch_wall_time_s (float): 결정 에폭 경과 시간 (record_timing=false면 0.0)
    """

    seed: int
    episode: int
    step: int
    reward_raw: float
    p_tx_w: float
    rho: float
    feasible: bool
    executed_was_optimized: bool
    epoch_wall_time_s: float


class SummaryRow(Row):
    """시드들에 걸친 통계 요약 (long format)

    Attributes:
        series (str): 계열 이름 (에이전트 종류, 전력 요구 설정 등)
        x (float): x 값 (에피소드, IRS 위치, M×N)
        metric (str): 요약한 지표 (p_tx_w, rho, reward)
        median (float): nearest-rank 50번째 백분위수
        p10 (float): nearest-rank 10번째 백분위수
        p90 (float): nearest-rank 90번째 백분위수
        variance (float): 모분산
        mean_epoch_time_s (float): 평균 결정 에폭 시간
        repetitions (int): 요약에 사용한 시드 수
    """

    series: str
    x: float
    metric: str
    median: float
    p10: float
    p90: float
    variance: float
    mean_epoch_time_s: float
    repetitions: int


class TrendRow(Row):
    series: str
    spearman: float
    points: int


class ScalabilityRow(Row):
    """크기 (M, N) 하나에서 측정한 방법별 결정 에폭 시간

    Attributes:
        method (str): od-ddpg 또는 ao-baseline
        M (int): 안테나 수
        N (int): IRS 소자 수
        mn (int): M×N
        mean_epoch_time_s (float): 평균 에폭 시간
        median_epoch_time_s (float): nearest-rank 중앙값
        epochs (int): 측정한 에폭 수
    """

    method: str
    M: int
    N: int
    mn: int
    mean_epoch_time_s: float
    median_epoch_time_s: float
    epochs: int


class FitRow(Row):
    """mean_epoch_time_s ≈ Σ coefficient·(M×N)^power"""

    method: str
    power: int
    coefficient: float


class SolverReportRow(Row):
    """인스턴스 하나의 solve_active 검증 결과

    Attributes:
        instance (int): 인스턴스 번호
        oracle (str): grid, restart, closed-form 중 하나
        solver_p_tx_w (float): solve_active 전력
        oracle_p_tx_w (float): oracle 전력
        gap (float): solver/oracle − 1 (음수면 solver가 oracle보다 좋음)
        snr_slack (float): SNR 제약의 상대 여유 (snr/γ_min − 1)
        harvest_slack (float): 하베스팅 제약의 상대 여유. 요구량이 0이면 0.0
        feasible (bool): solve_active의 feasible 플래그
    """

    instance: int
    oracle: str
    solver_p_tx_w: float
    oracle_p_tx_w: float
    gap: float
    snr_slack: float
    harvest_slack: float
    feasible: bool


class SolverSummaryRow(Row):
    instances: int
    max_gap: float
    mean_gap: float
    min_snr_slack: float
    min_harvest_slack: float


class ScalingLawRow(Row):
    """N 하나에서의 평균 수신 전력

    Attributes:
        series (str): aligned(정렬 위상) 또는 random(무작위 위상 대조군)
        n (int): IRS 소자 수
        mean_power_w (float): 평균 수신 신호 전력 |gᴴw|² (W)
        ratio_to_previous (float | None): 직전 N 대비 전력 비. 첫 행은 비어 있습니다.
    """

    series: str
    n: int
    mean_power_w: float
    ratio_to_previous: float | None = None
