"""반복(시드) 실행 워커 풀

각 반복은 자신의 환경, 에이전트, 난수 스트림을 소유하므로 서로 독립적으로 실행됩니다.
workers > 1이면 ProcessPoolExecutor로 병렬 실행하고, 결과는 항상 시드 순서로 반환합니다.
"""

from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

from app.config import Config, logger
from app.schemas.config import AgentKind, ExperimentConfig, Geometry
from app.schemas.records import RunRecord
from app.services.training import run_training


def _run_one(
    seed: int,
    config: ExperimentConfig,
    kind: AgentKind | None,
    geometry: Geometry | None,
    checkpoint_dir: str | None,
) -> list[RunRecord]:
    return run_training(config, seed, kind, geometry, checkpoint_dir)


def run_repetitions(
    config: ExperimentConfig,
    kind: AgentKind | None = None,
    geometry: Geometry | None = None,
    checkpoint_dir: str | Path | None = None,
    workers: int | None = None,
) -> list[list[RunRecord]]:
    """시드 base_seed + i (i < repetitions)마다 학습을 실행합니다.

    Args:
        config (ExperimentConfig): 실험 설정.
        kind (AgentKind | None): 에이전트 종류. None이면 설정값.
        geometry (Geometry | None): 링크 거리. None이면 설정값.
        checkpoint_dir (str | Path | None): 체크포인트 디렉터리.
        workers (int | None): 프로세스 수. None이면 Config.WORKERS.

    Returns:
        list[list[RunRecord]]: 시드 순서의 반복별 기록.
    """
    experiment = config.experiment
    seeds = [experiment.base_seed + i for i in range(experiment.repetitions)]
    workers = Config.WORKERS if workers is None else workers
    job = partial(
        _run_one,
        config=config,
        kind=kind,
        geometry=geometry,
        checkpoint_dir=None if checkpoint_dir is None else str(checkpoint_dir),
    )
    logger.info(
        "Running %d repetitions of %s with %d worker(s)",
        len(seeds),
        kind or experiment.agent_kind,
        workers,
    )
    if workers <= 1 or len(seeds) == 1:
        return [job(seed) for seed in seeds]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        # map은 입력 순서를 유지합니다.
        return list(executor.map(job, seeds))
