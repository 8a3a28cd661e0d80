"""IRS 보조 MISO 최적화 기반 DRL 시뮬레이터의 메인 실행 파일입니다."""

import argparse
import sys
from collections.abc import Sequence

from app.commands import register_diagnostics, register_training
from app.config import Config, logger
from app.utils.errors import (
    ConfigurationError,
    ConvergenceError,
    EpisodeStateError,
    InputValidationError,
    OutputError,
    SimulationError,
)

# 예외 종류별 종료 코드. 위에서부터 먼저 일치하는 항목을 사용합니다.
EXIT_CODES: tuple[tuple[type[SimulationError], int], ...] = (
    (ConfigurationError, Config.ExitCode.VALIDATION),
    (InputValidationError, Config.ExitCode.VALIDATION),
    (OutputError, Config.ExitCode.IO),
    (ConvergenceError, Config.ExitCode.CONVERGENCE),
    (EpisodeStateError, Config.ExitCode.STATE),
)


def exit_code_for(err: SimulationError) -> int:
    for error_type, code in EXIT_CODES:
        if isinstance(err, error_type):
            return code
    return Config.ExitCode.INTERNAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irs-odrl",
        description="IRS 보조 MISO 하향링크의 최적화 기반 DRL 실험 도구",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_training(subparsers)
    register_diagnostics(subparsers)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """CLI 진입점

    Args:
        argv (Sequence[str] | None): 인자 목록. None이면 sys.argv[1:].

    Returns:
        int: 종료 코드 (성공 0).
    """
    args = build_parser().parse_args(argv)
    logger.debug("Config 정보 로드: %s", {"debug": Config.debug, "workers": Config.WORKERS})
    logger.info("🚀 %s 시작", args.command)
    try:
        args.handler(args)
    except SimulationError as err:
        logger.error("%s 실패: %s", args.command, err.detail)
        return exit_code_for(err)
    except Exception:
        logger.error("%s 중 예기치 못한 오류", args.command, exc_info=True)
        return Config.ExitCode.INTERNAL
    return Config.ExitCode.OK


if __name__ == "__main__":
    sys.exit(main())
