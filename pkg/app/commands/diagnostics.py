"""측정과 검증 CLI 하위 명령 모듈

명령 목록:
    - `scalability`: 크기별 결정 에폭 시간 (od-ddpg vs 교대 최적화)
    - `validate-solver`: solve_active와 oracle 비교 보고서
    - `scaling-law`: 직접 링크가 없을 때 수신 전력의 N 스케일링
"""

import argparse
from collections.abc import Callable
from pathlib import Path

from app.commands.common import common_options, output_dir, resolve_config
from app.config import logger
from app.schemas.config import ExperimentConfig
from app.services.experiments import cmd_scalability, cmd_scaling_law, cmd_validate_solver

Command = Callable[[ExperimentConfig, Path], list[Path]]


def _handler(name: str, command: Command) -> Callable[[argparse.Namespace], None]:
    def run(args: argparse.Namespace) -> None:
        config = resolve_config(args)
        paths = command(config, output_dir(args, config))
        logger.info("✅ %s 완료: %s", name, ", ".join(str(path) for path in paths))

    return run


COMMANDS: dict[str, tuple[Command, str]] = {
    "scalability": (cmd_scalability, "결정 에폭 시간 측정과 다항식 적합"),
    "validate-solver": (cmd_validate_solver, "내부 솔버의 oracle 대비 최적성 검증"),
    "scaling-law": (cmd_scaling_law, "수신 전력의 IRS 소자 수 스케일링"),
}


def register(subparsers: argparse._SubParsersAction) -> None:
    """scalability, validate-solver, scaling-law 하위 명령을 등록합니다."""
    parent = common_options()
    for name, (command, help_text) in COMMANDS.items():
        parser = subparsers.add_parser(name, parents=[parent], help=help_text)
        parser.set_defaults(handler=_handler(name, command))
