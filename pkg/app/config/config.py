"""시뮬레이터의 설정을 정의하는 모듈입니다.

이 모듈은 환경 변수를 로드하고, 로깅을 설정하며, 프로세스 단위 설정 값을 관리하는 Config 클래스를 제공합니다.
또한, default.toml 같은 실험 설정 파일을 불러오고 다시 TOML로 직렬화하는 기능도 포함되어 있습니다.
"""

import json
import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any

from dotenv import load_dotenv
from pydantic import ValidationError

from app.schemas.config import ExperimentConfig
from app.utils.errors import ConfigurationError

# 환경 변수 로딩
load_dotenv()

# 현재 파일이 위치한 디렉터리 (config 폴더의 절대 경로)
CONFIG_DIR = os.path.abspath(os.path.dirname(__file__))

SERVICE_DIR = os.path.abspath(os.path.join(CONFIG_DIR, "../.."))

# 로깅 설정
logger = logging.getLogger("irs_odrl")
logger.setLevel(logging.DEBUG)  # 모든 로그 기록

if not logger.handlers:
    console_handler = logging.StreamHandler()
    if os.getenv("DEBUG", "False").lower() == "true":
        console_handler.setLevel(logging.DEBUG)  # DEBUG 이상 출력
    else:
        # DEBUG 모드가 아닐 때는 INFO 이상만 출력
        console_handler.setLevel(logging.INFO)
    console_formatter = logging.Formatter("%(asctime)s - %(levelname)s - %(message)s")
    console_handler.setFormatter(console_formatter)

    # 로거에 핸들러 추가
    logger.addHandler(console_handler)


class Config:
    """프로세스 설정 값을 관리하는 클래스

    이 클래스는 환경 변수에서 설정 값을 로드하고, 기본 값을 제공합니다.
    실험 파라미터 자체는 TOML 설정 파일(ExperimentConfig)이 담당합니다.
    """

    debug = os.getenv("DEBUG", "False").lower() == "true"

    SERVICE_DIR = SERVICE_DIR
    CONFIG_DIR = CONFIG_DIR
    DEFAULT_CONFIG = os.path.join(CONFIG_DIR, "default.toml")
    SMOKE_CONFIG = os.path.join(CONFIG_DIR, "smoke.toml")

    EXPERIMENT_CONFIG: str = os.getenv("EXPERIMENT_CONFIG", DEFAULT_CONFIG)
    # 설정되지 않으면 실험 설정의 experiment.output을 사용합니다.
    OUTPUT_DIR: str | None = os.getenv("OUTPUT_DIR")
    WORKERS: int = int(os.getenv("WORKERS", "1"))

    class ExitCode:
        """CLI 종료 코드를 정의하는 클래스"""

        OK = 0
        INTERNAL = 1
        VALIDATION = 2
        IO = 3
        CONVERGENCE = 4
        STATE = 5


def _format_location(loc: tuple[Any, ...]) -> str:
    return ".".join(str(part) for part in loc)


def parse_experiment_config(data: dict[str, Any]) -> ExperimentConfig:
    """딕셔너리를 검증하여 ExperimentConfig로 변환합니다.

    Args:
        data (dict[str, Any]): TOML에서 읽은 섹션별 설정 값.

    Returns:
        ExperimentConfig: 검증된 실험 설정.

    Raises:
        ConfigurationError: 알 수 없는 키가 있거나 값의 범위가 잘못된 경우. 문제의 키를 포함합니다.
    """
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as err:
        first = err.errors()[0]
        key = _format_location(first["loc"])
        logger.error("설정 검증 실패: %s (%s)", key, first["msg"])
        raise ConfigurationError(f"{key}: {first['msg']}", key=key) from err


def load_experiment_config(path: str | Path | None = None) -> ExperimentConfig:
    """TOML 실험 설정 파일을 불러옵니다.

    Args:
        path (str | Path | None): 설정 파일 경로. None이면 Config.EXPERIMENT_CONFIG를 사용합니다.

    Returns:
        ExperimentConfig: 검증된 실험 설정.

    Raises:
        ConfigurationError: 파일이 없거나 TOML 형식이 아니거나 검증에 실패한 경우.
    """
    config_path = Path(path or Config.EXPERIMENT_CONFIG)
    logger.debug("실험 설정 로드: %s", config_path)
    try:
        with open(config_path, "rb") as file:
            data = tomllib.load(file)
    except FileNotFoundError as err:
        raise ConfigurationError(f"설정 파일이 없습니다: {config_path}") from err
    except tomllib.TOMLDecodeError as err:
        raise ConfigurationError(f"TOML 형식 오류: {config_path}: {err}") from err
    return parse_experiment_config(data)


def _toml_value(value: Any) -> str:
    """TOML 리터럴 하나를 만듭니다. 설정 스키마가 쓰는 스칼라와 리스트만 지원합니다."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(item) for item in value) + "]"
    raise ConfigurationError(f"TOML로 직렬화할 수 없는 값입니다: {value!r}")


def dump_experiment_config(config: ExperimentConfig) -> str:
    """ExperimentConfig를 TOML 문자열로 직렬화합니다.

    None 값은 TOML에 null이 없으므로 생략합니다. parse → dump → parse는 항등입니다.

    Args:
        config (ExperimentConfig): 직렬화할 설정.

    Returns:
        str: TOML 텍스트.
    """
    lines: list[str] = []
    for section, values in config.model_dump(mode="python", by_alias=True).items():
        lines.append(f"[{section}]")
        for key, value in values.items():
            if value is None:
                continue
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
    return "\n".join(lines)
