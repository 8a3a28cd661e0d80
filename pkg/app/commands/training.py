"""학습 관련 CLI 하위 명령 모듈

명령 목록:
    - `train`: 반복 학습을 실행하고 스텝 기록과 요약 CSV를 기록합니다.
    - `sweep-position`: IRS 위치 스윕을 실행하고 위치별 수렴 송신 전력과 추세를 기록합니다.
"""

import argparse

from app.commands.common import common_options, output_dir, resolve_config
from app.config import logger
from app.services.experiments import cmd_sweep_position, cmd_train


def train(args: argparse.Namespace) -> None:
    config = resolve_config(args)
    paths = cmd_train(config, output_dir(args, config))
    logger.info("✅ train 완료: %s", ", ".join(str(path) for path in paths))


def sweep_position(args: argparse.Namespace) -> None:
    config = resolve_config(args)
    paths = cmd_sweep_position(config, output_dir(args, config))
    logger.info("✅ sweep-position 완료: %s", ", ".join(str(path) for path in paths))


def register(subparsers: argparse._SubParsersAction) -> None:
    """train, sweep-position 하위 명령을 등록합니다."""
    parent = common_options()
    parser = subparsers.add_parser(
        "train", parents=[parent], help="반복 학습과 수렴 요약 (RunRecord, SummaryRow CSV)"
    )
    parser.set_defaults(handler=train)
    parser = subparsers.add_parser(
        "sweep-position",
        parents=[parent],
        help="IRS 위치 스윕 (IRS 전력 요구량별 수렴 송신 전력)",
    )
    parser.set_defaults(handler=sweep_position)
