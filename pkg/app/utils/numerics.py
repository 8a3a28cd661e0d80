"""복소 선형대수와 시드 기반 난수 스트림 유틸리티

이 모듈은 모든 다른 모듈이 공유하는 수치 기반을 제공합니다.

    - CVec / CMat: complex128 numpy 배열 타입 별칭
    - RngStream: (seed, stream_id)로 재현 가능한 난수 스트림
    - sample_cn: 원형 대칭 복소 가우시안 샘플
    - top_eigpair: 에르미트 PSD 행렬의 최대 고유쌍 (거듭제곱 반복법)

모든 연산은 64비트 부동소수점으로 수행합니다.
"""

from typing import TypeAlias

import numpy as np
import numpy.typing as npt

from app.utils.errors import ConvergenceError, InputValidationError

CVec: TypeAlias = npt.NDArray[np.complex128]
CMat: TypeAlias = npt.NDArray[np.complex128]
RVec: TypeAlias = npt.NDArray[np.float64]

EIG_MAX_ITER = 10_000
HERMITIAN_RTOL = 1e-9
# 거듭제곱 반복 한 번이 A^(2^SQUARINGS) 한 번과 같아지도록 미리 제곱합니다.
SQUARINGS = 16


class RngStream:
    """재현 가능한 난수 스트림

    같은 (seed, stream_id)는 같은 샘플 열을 만들고, stream_id가 다르면 통계적으로 독립인
    열을 만듭니다. 인스턴스는 한 소유자만 사용해야 하며, 병렬 작업은 서로 다른 stream_id를 씁니다.

    Attributes:
        seed (int): 64비트 시드
        stream_id (int): 스트림 번호
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise InputValidationError("seed와 stream_id는 음수일 수 없습니다.")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.PCG64(sequence))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def child(self, stream_id: int) -> "RngStream":
        """같은 시드의 다른 스트림을 반환합니다."""
        return RngStream(self.seed, stream_id)

    def standard_normal(self, size: int | tuple[int, ...] | None = None) -> npt.NDArray[np.float64]:
        return self._gen.standard_normal(size)

    def random(self, size: int | tuple[int, ...] | None = None) -> npt.NDArray[np.float64]:
        """[0, 1) 균등 분포 샘플"""
        return self._gen.random(size)

    def uniform(
        self, low: float, high: float, size: int | tuple[int, ...] | None = None
    ) -> npt.NDArray[np.float64]:
        return self._gen.uniform(low, high, size)

    def integers(
        self, low: int, high: int, size: int | tuple[int, ...] | None = None
    ) -> npt.NDArray[np.int64]:
        """[low, high) 정수 균등 샘플"""
        return self._gen.integers(low, high, size)


def sample_cn(rng: RngStream, n: int | tuple[int, ...]) -> CVec:
    """원형 대칭 복소 가우시안 CN(0, 1) 샘플을 생성합니다.

    실수부와 허수부는 각각 분산 1/2인 독립 가우시안입니다.

    Args:
        rng (RngStream): 난수 스트림.
        n (int | tuple[int, ...]): 벡터 길이 또는 배열 shape.

    Returns:
        CVec: complex128 배열.

    Raises:
        InputValidationError: 길이가 1 미만인 경우.
    """
    shape = (n,) if isinstance(n, (int, np.integer)) else tuple(n)
    if any(dim < 1 for dim in shape):
        raise InputValidationError(f"샘플 크기는 1 이상이어야 합니다: {shape}")
    real = rng.standard_normal(shape)
    imag = rng.standard_normal(shape)
    return (real + 1j * imag) / np.sqrt(2.0)


def canonical_phase(v: CVec) -> CVec:
    """첫 번째 0이 아닌 원소가 양의 실수가 되도록 전역 위상을 맞춥니다."""
    magnitudes = np.abs(v)
    peak = magnitudes.max(initial=0.0)
    if peak == 0.0:
        return v
    first = int(np.argmax(magnitudes > 1e-12 * peak))
    return v * np.exp(-1j * np.angle(v[first]))


def check_hermitian(A: CMat) -> CMat:
    """정사각 에르미트 행렬인지 검사하고 complex128 배열로 반환합니다."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise InputValidationError(f"정사각 행렬이 필요합니다: shape={A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputValidationError("행렬에 유한하지 않은 값이 있습니다.")
    scale = max(1.0, float(np.abs(A).max()))
    if float(np.abs(A - A.conj().T).max()) > HERMITIAN_RTOL * scale:
        raise InputValidationError("에르미트 행렬이 아닙니다.")
    return A


def top_eigpair(A: CMat, tol: float = 1e-10, max_iter: int = EIG_MAX_ITER) -> tuple[float, CVec]:
    """에르미트 PSD 행렬의 최대 고유값과 단위 고유벡터를 구합니다.

    행렬을 trace로 정규화한 뒤 반복 제곱으로 A^(2^16) 방향의 연산자를 만들고, 그 연산자로
    거듭제곱 반복을 수행합니다. 수렴 판정은 원래 행렬의 Rayleigh quotient λ에 대해
    ‖Av − λv‖ ≤ tol·λ 입니다. 반환하는 고유벡터는 첫 번째 0이 아닌 원소의 위상이 0입니다.

    Args:
        A (CMat): 에르미트 양의 준정부호 행렬 (n ≥ 1).
        tol (float): 상대 잔차 허용치.
        max_iter (int): 반복 상한.

    Returns:
        tuple[float, CVec]: (고유값, 단위 고유벡터).

    Raises:
        InputValidationError: 정사각이 아니거나 에르미트가 아닌 경우.
        ConvergenceError: 반복 상한 안에 잔차 조건을 만족하지 못한 경우.
    """
    A = check_hermitian(A)
    n = A.shape[0]
    if n == 1:
        return float(A[0, 0].real), np.ones(1, dtype=np.complex128)

    scale = float(np.trace(A).real)
    if scale <= 0.0:
        # PSD에서 trace가 0이면 영행렬입니다.
        v = np.zeros(n, dtype=np.complex128)
        v[0] = 1.0
        return 0.0, v

    S = A / scale
    for _ in range(SQUARINGS):
        S = S @ S
        S = 0.5 * (S + S.conj().T)
        s_trace = float(np.trace(S).real)
        if s_trace <= 0.0:
            break
        S /= s_trace

    x = S[:, int(np.argmax(np.linalg.norm(S, axis=0)))].copy()
    norm = np.linalg.norm(x)
    if norm == 0.0:
        x = np.ones(n, dtype=np.complex128)
        norm = np.sqrt(n)
    x /= norm

    for _ in range(max_iter):
        Ax = A @ x
        lam = float(np.vdot(x, Ax).real)
        residual = float(np.linalg.norm(Ax - lam * x))
        if residual <= tol * max(lam, np.finfo(float).tiny):
            return lam, canonical_phase(x)
        y = S @ x
        y_norm = np.linalg.norm(y)
        if y_norm == 0.0:
            break
        x = y / y_norm
    raise ConvergenceError(f"거듭제곱 반복이 {max_iter}회 안에 수렴하지 않았습니다 (n={n}).")
