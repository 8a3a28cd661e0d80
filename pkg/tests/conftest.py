"""테스트 공용 fixture와 slow 마커 처리"""

from pathlib import Path

import numpy as np
import pytest

from app.config import Config, load_experiment_config
from app.schemas.config import ExperimentConfig
from app.utils.numerics import RngStream


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="slow 마커 테스트도 실행합니다"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="--runslow 옵션이 필요합니다")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng() -> RngStream:
    return RngStream(1234, 0)


@pytest.fixture
def np_rng() -> np.random.Generator:
    """테스트 입력(무작위 행렬 등)을 만드는 numpy 생성기"""
    return np.random.default_rng(20240518)


@pytest.fixture
def smoke_config() -> ExperimentConfig:
    return load_experiment_config(Config.SMOKE_CONFIG)


@pytest.fixture
def write_toml(tmp_path: Path):
    """TOML 텍스트를 임시 파일로 쓰고 경로를 돌려주는 함수"""

    def write(text: str, name: str = "experiment.toml") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write
