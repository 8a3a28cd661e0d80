"""시뮬레이터 전역에서 사용하는 예외 클래스를 정의합니다.

모든 예외는 SimulationError를 상속하며, 사람이 읽을 수 있는 detail 메시지를 가집니다.
CLI는 예외 종류에 따라 Config.ExitCode의 종료 코드를 반환합니다.
"""


class SimulationError(Exception):
    """시뮬레이터 예외의 기본 클래스

    Attributes:
        detail (str): 오류 설명.
    """

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InputValidationError(SimulationError, ValueError):
    """입력 값의 형태나 범위가 잘못된 경우"""


class ConfigurationError(SimulationError, ValueError):
    """설정 파일 또는 설정 값이 잘못된 경우

    Attributes:
        key (str | None): 문제가 된 설정 키 (예: "system.eta").
    """

    def __init__(self, detail: str, key: str | None = None):
        super().__init__(detail)
        self.key = key


class ConvergenceError(SimulationError, RuntimeError):
    """반복 알고리즘이 반복 상한 안에 수렴하지 못한 경우"""


class EpisodeStateError(SimulationError, RuntimeError):
    """에피소드나 학습 상태가 요청된 동작을 허용하지 않는 경우"""


class OutputError(SimulationError, OSError):
    """결과 파일을 쓸 수 없는 경우"""
