"""테스트에서 공통으로 쓰는 입력 생성 함수"""

import numpy as np

from app.services.channel import ChannelRealization, ChannelSet


def channel_set(h_d, H, h_r) -> ChannelSet:
    """스칼라나 리스트로 ChannelSet을 만듭니다."""
    return ChannelSet(
        h_d=np.atleast_1d(np.asarray(h_d, dtype=np.complex128)),
        H=np.atleast_2d(np.asarray(H, dtype=np.complex128)),
        h_r=np.atleast_1d(np.asarray(h_r, dtype=np.complex128)),
    )


def complex_normal(gen: np.random.Generator, *shape: int) -> np.ndarray:
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2.0)


def random_channel_set(gen: np.random.Generator, M: int, N: int) -> ChannelSet:
    """단위 분산 복소 가우시안 채널 묶음"""
    return ChannelSet(
        h_d=complex_normal(gen, M),
        H=complex_normal(gen, N, M),
        h_r=complex_normal(gen, N),
    )


def random_psd(gen: np.random.Generator, n: int) -> np.ndarray:
    C = complex_normal(gen, n, n)
    return C @ C.conj().T


def realization(ch: ChannelSet) -> ChannelRealization:
    """추정 오차가 없는 채널 실현. 링크 이득은 1로 둡니다."""
    return ChannelRealization(
        h_d=ch.h_d,
        H=ch.H,
        h_r=ch.h_r,
        est_h_d=ch.h_d,
        est_H=ch.H,
        est_h_r=ch.h_r,
        gains=(1.0, 1.0, 1.0),
    )
