"""CLI 하위 명령이 공유하는 인자와 설정 처리

모든 하위 명령은 같은 옵션(--config, --seed, --out, --repetitions, --agent)을 받으며,
옵션 값은 설정 파일의 [experiment] 섹션을 덮어씁니다.
"""

import argparse
from pathlib import Path
from typing import get_args

from app.config import Config, load_experiment_config, logger, parse_experiment_config
from app.schemas.config import AgentKind, ExperimentConfig


def common_options() -> argparse.ArgumentParser:
    """하위 명령의 parents로 쓰는 공통 옵션 parser"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument(
        "--config",
        default=None,
        help="TOML 실험 설정 파일 (기본: EXPERIMENT_CONFIG 환경 변수 또는 default.toml)",
    )
    parser.add_argument("--seed", type=int, default=None, help="기본 시드 (u64)")
    parser.add_argument("--out", default=None, help="결과 디렉터리")
    parser.add_argument("--repetitions", type=int, default=None, help="독립 반복 수")
    parser.add_argument(
        "--agent", choices=get_args(AgentKind), default=None, help="에이전트 종류"
    )
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """설정 파일을 읽고 CLI 옵션을 덮어쓴 뒤 다시 검증합니다.

    Raises:
        ConfigurationError: 파일 또는 덮어쓴 값이 잘못된 경우 (예: experiment.base_seed).
    """
    config = load_experiment_config(args.config)
    overrides = {
        "base_seed": args.seed,
        "repetitions": args.repetitions,
        "agent_kind": args.agent,
        "output": args.out,
    }
    overrides = {key: value for key, value in overrides.items() if value is not None}
    if not overrides:
        return config
    logger.debug("CLI overrides: %s", overrides)
    data = config.model_dump(mode="python", by_alias=True)
    data["experiment"].update(overrides)
    return parse_experiment_config(data)


def output_dir(args: argparse.Namespace, config: ExperimentConfig) -> Path:
    """--out, OUTPUT_DIR 환경 변수, experiment.output 순서로 결과 디렉터리를 정합니다."""
    return Path(args.out or Config.OUTPUT_DIR or config.experiment.output)
