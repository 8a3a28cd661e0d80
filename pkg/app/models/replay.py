"""경험 재현 버퍼 모듈

클래스 목록:
    - Transition: 버퍼에 저장하는 transition 하나
    - Batch: 균등 샘플링한 미니배치 (배열 묶음)
    - ReplayBuffer: 고정 용량 링 버퍼
"""

from dataclasses import dataclass

import numpy as np

from app.utils.errors import EpisodeStateError, InputValidationError
from app.utils.numerics import RngStream, RVec


@dataclass(frozen=True)
class Transition:
    """transition 하나

    Attributes:
        state (RVec): 상태
        action (RVec): 실행한 행동의 네트워크 표현 (최적화 기반은 [ρ], DQN은 [행동 index])
        reward (float): 정규화 보상
        reward_opt (float | None): 최적화 후보의 정규화 보상. 모델 프리 에이전트는 None
        next_state (RVec): 다음 상태
        done (bool): 에피소드 종료 여부
        executed_was_optimized (bool): 실행한 행동이 최적화 후보였는지 여부
    """

    state: RVec
    action: RVec
    reward: float
    reward_opt: float | None
    next_state: RVec
    done: bool
    executed_was_optimized: bool = False

    def __post_init__(self):
        if not np.isfinite(self.reward):
            raise InputValidationError(f"reward가 유한하지 않습니다: {self.reward}")
        if self.reward_opt is not None and not np.isfinite(self.reward_opt):
            raise InputValidationError(f"reward_opt가 유한하지 않습니다: {self.reward_opt}")


@dataclass(frozen=True)
class Batch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    rewards_opt: np.ndarray
    has_opt: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray
    optimized: np.ndarray
    indices: np.ndarray


class ReplayBuffer:
    """고정 용량 링 버퍼. 용량을 넘으면 가장 오래된 transition을 덮어씁니다.

    Attributes:
        capacity (int): 최대 transition 수
        warmup (int): 샘플링을 허용하는 최소 transition 수
    """

    def __init__(self, capacity: int, state_dim: int, action_dim: int, warmup: int = 1):
        if capacity < 1 or warmup < 1 or warmup > capacity:
            raise InputValidationError(
                f"1 ≤ warmup ≤ capacity 이어야 합니다: warmup={warmup}, capacity={capacity}"
            )
        self.capacity = capacity
        self.warmup = warmup
        self.state_dim = state_dim
        self.action_dim = action_dim
        self._states = np.zeros((capacity, state_dim))
        self._actions = np.zeros((capacity, action_dim))
        self._rewards = np.zeros(capacity)
        self._rewards_opt = np.zeros(capacity)
        self._has_opt = np.zeros(capacity, dtype=bool)
        self._next_states = np.zeros((capacity, state_dim))
        self._dones = np.zeros(capacity, dtype=bool)
        self._optimized = np.zeros(capacity, dtype=bool)
        self._cursor = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    @property
    def ready(self) -> bool:
        return self._size >= self.warmup

    def push(self, transition: Transition) -> None:
        action = np.atleast_1d(np.asarray(transition.action, dtype=np.float64))
        if transition.state.shape != (self.state_dim,) or action.shape != (self.action_dim,):
            raise InputValidationError(
                f"transition shape이 버퍼와 다릅니다: state={transition.state.shape}, "
                f"action={action.shape}"
            )
        i = self._cursor
        self._states[i] = transition.state
        self._actions[i] = action
        self._rewards[i] = transition.reward
        self._has_opt[i] = transition.reward_opt is not None
        self._rewards_opt[i] = transition.reward_opt if transition.reward_opt is not None else 0.0
        self._next_states[i] = transition.next_state
        self._dones[i] = transition.done
        self._optimized[i] = transition.executed_was_optimized
        self._cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch: int, rng: RngStream) -> Batch:
        """저장된 transition에서 복원 추출로 균등하게 batch개를 뽑습니다.

        Raises:
            EpisodeStateError: warmup 이전에 호출한 경우.
        """
        if not self.ready:
            raise EpisodeStateError(
                f"warmup({self.warmup}) 이전에는 샘플링할 수 없습니다: size={self._size}"
            )
        idx = rng.integers(0, self._size, batch)
        return Batch(
            states=self._states[idx],
            actions=self._actions[idx],
            rewards=self._rewards[idx],
            rewards_opt=self._rewards_opt[idx],
            has_opt=self._has_opt[idx],
            next_states=self._next_states[idx],
            dones=self._dones[idx],
            optimized=self._optimized[idx],
            indices=idx,
        )
