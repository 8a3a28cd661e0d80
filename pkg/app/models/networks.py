"""numpy 기반 완전 연결 신경망 모듈

이 모듈은 actor, critic, Q-network로 쓰이는 MLP와 그 학습 도구를 정의합니다.

클래스 목록:
    - Head: 출력 구간 하나의 크기와 활성화 함수
    - MlpNet: ReLU 은닉층과 출력 구간별 활성화를 가진 MLP
    - AdamState: Adam 1차/2차 모멘트 상태

함수 목록:
    - adam_step: bias correction을 포함한 Adam 갱신
    - soft_update / hard_copy: target 네트워크 갱신
    - save_checkpoint / load_checkpoint: 평문 헤더 + little-endian float64 체크포인트

모든 연산은 float64로 수행하며, 입력은 (in,) 벡터 또는 (batch, in) 행렬을 받습니다.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from app.config import logger
from app.utils.errors import InputValidationError, OutputError
from app.utils.numerics import RngStream, RVec

Activation = Literal["linear", "sigmoid", "phase"]
CHECKPOINT_MAGIC = "irs-odrl-mlp"
CHECKPOINT_VERSION = 1
# 마지막 층 가중치의 초기화 범위
FINAL_LAYER_INIT = 3e-3


@dataclass(frozen=True)
class Head:
    """출력 벡터의 연속 구간 하나

    Attributes:
        size (int): 구간 크기
        activation (Activation): linear, sigmoid, phase(2π·sigmoid) 중 하나
    """

    size: int
    activation: Activation = "linear"


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # 큰 음수에서 exp 오버플로를 피하는 형태
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class MlpNet:
    """ReLU 은닉층을 가진 완전 연결 신경망

    Attributes:
        widths (list[int]): 입력부터 출력까지의 층 폭
        heads (tuple[Head, ...]): 출력 구간. 크기의 합은 출력 폭과 같습니다.
        weights (list[np.ndarray]): 층별 (in, out) 가중치
        biases (list[np.ndarray]): 층별 (out,) 편향
    """

    def __init__(
        self,
        widths: list[int],
        heads: tuple[Head, ...] | None = None,
        rng: RngStream | None = None,
    ):
        if len(widths) < 2 or any(width < 1 for width in widths):
            raise InputValidationError(f"층 폭은 2개 이상의 양수여야 합니다: {widths}")
        self.widths = list(widths)
        self.heads = heads or (Head(widths[-1]),)
        if sum(head.size for head in self.heads) != widths[-1]:
            raise InputValidationError(f"출력 구간 크기의 합이 출력 폭과 다릅니다: {self.heads}")

        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        n_layers = len(widths) - 1
        for layer, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
            if rng is None:
                W = np.zeros((fan_in, fan_out))
            elif layer == n_layers - 1:
                W = rng.uniform(-FINAL_LAYER_INIT, FINAL_LAYER_INIT, (fan_in, fan_out))
            else:
                limit = 1.0 / np.sqrt(fan_in)
                W = rng.uniform(-limit, limit, (fan_in, fan_out))
            self.weights.append(np.asarray(W, dtype=np.float64))
            self.biases.append(np.zeros(fan_out))

    def __repr__(self) -> str:
        heads = ",".join(f"{h.activation}:{h.size}" for h in self.heads)
        return f"MlpNet(widths={self.widths}, heads={heads})"

    @property
    def params(self) -> list[np.ndarray]:
        """[W0, b0, W1, b1, ...] 순서의 파라미터 배열 (참조)"""
        out: list[np.ndarray] = []
        for W, b in zip(self.weights, self.biases):
            out.extend([W, b])
        return out

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    def same_architecture(self, other: "MlpNet") -> bool:
        return self.widths == other.widths and self.heads == other.heads

    def copy(self) -> "MlpNet":
        clone = MlpNet(self.widths, self.heads)
        for dst, src in zip(clone.params, self.params):
            dst[...] = src
        return clone

    def _check_input(self, x: np.ndarray) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        batch = x[None, :] if single else x
        if batch.ndim != 2 or batch.shape[1] != self.widths[0]:
            raise InputValidationError(
                f"입력 폭이 {self.widths[0]}과 다릅니다: shape={x.shape}"
            )
        return batch, single

    def _output(self, z: np.ndarray) -> np.ndarray:
        out = np.empty_like(z)
        start = 0
        for head in self.heads:
            part = z[:, start : start + head.size]
            if head.activation == "sigmoid":
                out[:, start : start + head.size] = _sigmoid(part)
            elif head.activation == "phase":
                out[:, start : start + head.size] = 2.0 * np.pi * _sigmoid(part)
            else:
                out[:, start : start + head.size] = part
            start += head.size
        return out

    def _output_derivative(self, z: np.ndarray) -> np.ndarray:
        deriv = np.ones_like(z)
        start = 0
        for head in self.heads:
            part = z[:, start : start + head.size]
            if head.activation in ("sigmoid", "phase"):
                s = _sigmoid(part)
                scale = 2.0 * np.pi if head.activation == "phase" else 1.0
                deriv[:, start : start + head.size] = scale * s * (1.0 - s)
            start += head.size
        return deriv

    def _forward_cache(self, x: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
        activations = [x]
        pre = []
        h = x
        last = len(self.weights) - 1
        for layer, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ W + b
            pre.append(z)
            h = self._output(z) if layer == last else np.maximum(z, 0.0)
            activations.append(h)
        return activations, pre

    def forward(self, x: np.ndarray) -> np.ndarray:
        """순전파를 수행합니다.

        Args:
            x (np.ndarray): (in,) 또는 (batch, in) 입력.

        Returns:
            np.ndarray: 입력과 같은 차원 구조의 출력.

        Raises:
            InputValidationError: 입력 폭이 맞지 않는 경우.
        """
        batch, single = self._check_input(x)
        out = self._forward_cache(batch)[0][-1]
        return out[0] if single else out

    def backprop(self, x: np.ndarray, upstream: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        """역전파로 파라미터 기울기와 입력 기울기를 구합니다.

        배치 입력이면 기울기는 배치 전체에 대해 합산됩니다. 평균이 필요하면 upstream을 미리 나눕니다.

        Args:
            x (np.ndarray): (in,) 또는 (batch, in) 입력.
            upstream (np.ndarray): 출력에 대한 기울기, 출력과 같은 shape.

        Returns:
            tuple[list[np.ndarray], np.ndarray]: (params 순서의 기울기 목록, 입력 기울기).
        """
        batch, single = self._check_input(x)
        delta = np.asarray(upstream, dtype=np.float64)
        delta = delta[None, :] if single else delta
        if delta.shape != (batch.shape[0], self.widths[-1]):
            raise InputValidationError(
                f"upstream shape이 출력과 다릅니다: {np.shape(upstream)}"
            )
        activations, pre = self._forward_cache(batch)
        grads: list[np.ndarray] = []
        delta = delta * self._output_derivative(pre[-1])
        for layer in range(len(self.weights) - 1, -1, -1):
            grad_W = activations[layer].T @ delta
            grad_b = delta.sum(axis=0)
            grads = [grad_W, grad_b, *grads]
            delta = delta @ self.weights[layer].T
            if layer > 0:
                delta = delta * (pre[layer - 1] > 0.0)
        return grads, (delta[0] if single else delta)


@dataclass
class AdamState:
    """Adam 최적화 상태

    Attributes:
        m (list[np.ndarray]): 1차 모멘트
        v (list[np.ndarray]): 2차 모멘트
        t (int): 진행한 스텝 수
    """

    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    t: int = 0

    @classmethod
    def like(cls, params: list[np.ndarray]) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params])


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[list[np.ndarray], AdamState]:
    """Adam으로 파라미터를 한 스텝 갱신합니다 (기울기 하강 방향).

    파라미터 배열은 제자리에서 갱신되며, 같은 목록과 상태를 반환합니다.

    Args:
        params (list[np.ndarray]): 갱신할 파라미터.
        grads (list[np.ndarray]): 같은 shape의 기울기.
        state (AdamState): 모멘트 상태. 비어 있으면 0으로 초기화합니다.
        lr (float): 학습률.
        beta1 (float): 1차 모멘트 감쇠율.
        beta2 (float): 2차 모멘트 감쇠율.
        eps (float): 분모 안정화 상수.

    Returns:
        tuple[list[np.ndarray], AdamState]: 갱신된 파라미터와 상태.
    """
    if len(params) != len(grads):
        raise InputValidationError("파라미터와 기울기 개수가 다릅니다.")
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    state.t += 1
    correction1 = 1.0 - beta1**state.t
    correction2 = 1.0 - beta2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise InputValidationError(f"기울기 shape이 다릅니다: {p.shape} != {g.shape}")
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p -= lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
    return params, state


def soft_update(target: MlpNet, online: MlpNet, tau: float) -> MlpNet:
    """target ← tau·online + (1−tau)·target

    Raises:
        InputValidationError: 구조가 다르거나 tau가 [0, 1] 밖인 경우.
    """
    if not target.same_architecture(online):
        raise InputValidationError(f"구조가 다른 네트워크입니다: {target!r} vs {online!r}")
    if not 0.0 <= tau <= 1.0:
        raise InputValidationError(f"tau는 [0, 1] 범위여야 합니다: {tau}")
    for dst, src in zip(target.params, online.params):
        if tau == 1.0:
            dst[...] = src
        elif tau > 0.0:
            dst *= 1.0 - tau
            dst += tau * src
    return target


def hard_copy(target: MlpNet, online: MlpNet) -> MlpNet:
    return soft_update(target, online, 1.0)


def _header(net: MlpNet) -> str:
    widths = ",".join(str(w) for w in net.widths)
    heads = ",".join(f"{h.activation}:{h.size}" for h in net.heads)
    return f"{CHECKPOINT_MAGIC} v{CHECKPOINT_VERSION} widths={widths} heads={heads}\n"


def save_checkpoint(net: MlpNet, path: str | Path) -> Path:
    """네트워크를 평문 헤더 한 줄 + little-endian float64 파라미터로 저장합니다.

    파라미터 순서는 W0(행 우선), b0, W1, b1, ... 입니다.

    Raises:
        OutputError: 파일을 쓸 수 없는 경우.
    """
    path = Path(path)
    body = np.concatenate([p.ravel() for p in net.params]).astype("<f8")
    try:
        with open(path, "wb") as file:
            file.write(_header(net).encode("ascii"))
            file.write(body.tobytes())
    except OSError as err:
        raise OutputError(f"체크포인트를 쓸 수 없습니다: {path}: {err}") from err
    logger.debug("체크포인트 저장: %s (%d params)", path, net.n_params)
    return path


def load_checkpoint(path: str | Path) -> MlpNet:
    """save_checkpoint로 저장한 네트워크를 불러옵니다.

    Raises:
        InputValidationError: 헤더 형식이나 파라미터 개수가 맞지 않는 경우.
    """
    raw = Path(path).read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise InputValidationError(f"체크포인트 헤더가 없습니다: {path}")
    fields = raw[:newline].decode("ascii").split()
    if len(fields) != 4 or fields[0] != CHECKPOINT_MAGIC or fields[1] != f"v{CHECKPOINT_VERSION}":
        raise InputValidationError(f"지원하지 않는 체크포인트 헤더입니다: {fields}")
    widths = [int(w) for w in fields[2].removeprefix("widths=").split(",")]
    heads = []
    for entry in fields[3].removeprefix("heads=").split(","):
        activation, size = entry.split(":")
        heads.append(Head(int(size), activation))  # type: ignore[arg-type]
    net = MlpNet(widths, tuple(heads))
    body = np.frombuffer(raw[newline + 1 :], dtype="<f8")
    if body.size != net.n_params:
        raise InputValidationError(
            f"파라미터 개수가 다릅니다: {body.size} != {net.n_params}"
        )
    offset = 0
    for p in net.params:
        p[...] = body[offset : offset + p.size].reshape(p.shape)
        offset += p.size
    return net


def flat_params(net: MlpNet) -> RVec:
    return np.concatenate([p.ravel() for p in net.params])
