"""
src/adversary/rerank.py

재순위(rerank) 함수 r_α(y, t)

목표 클래스 t 를 α·max(y) 로 올리고 합으로 나눠 다시 확률분포로 만듭니다.
t 를 제외한 나머지 클래스의 순서는 그대로 유지됩니다.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from config.settings import NUM_CLASSES
from src.errors import ContractError

DISTRIBUTION_TOL = 1e-6


class RerankMode(Enum):
    """재순위 방식"""
    RANK_PRESERVING = "rank_preserving"
    ONEHOT = "onehot"  # r(y, t) = onehot(t), 가장 단순한 형태


@dataclass(frozen=True)
class RerankTarget:
    """r_α(y, t) 결과"""
    probs: np.ndarray
    target_class: int
    alpha: float

    def is_valid(self) -> bool:
        p = self.probs
        ok = bool(np.all(p >= 0) and abs(p.sum() - 1.0) <= DISTRIBUTION_TOL)
        if self.alpha > 1:
            ok = ok and int(np.argmax(p)) == self.target_class
        return ok


def _check_inputs(y: np.ndarray, t: int, alpha: float, tol: float) -> None:
    if y.ndim != 2 or y.shape[1] < 2:
        raise ContractError(f"확률 벡터(들)가 필요합니다: shape {y.shape}")
    if not 0 <= t < y.shape[1]:
        raise ContractError(f"목표 클래스 {t} 가 범위를 벗어났습니다 (0~{y.shape[1] - 1})")
    if not alpha > 0:
        raise ContractError(f"alpha 는 양수여야 합니다: {alpha}")
    if not np.all(np.isfinite(y)) or np.any(y < 0):
        raise ContractError("확률 벡터에 음수 또는 NaN 이 있습니다")
    if np.any(np.abs(y.sum(axis=1) - 1.0) > tol):
        raise ContractError("확률 벡터의 합이 1 이 아닙니다")


def rerank_batch(y: np.ndarray, t: int, alpha: float, tol: float = DISTRIBUTION_TOL) -> np.ndarray:
    """N×K 확률 행렬에 r_α 를 행 단위로 적용 (float64 로 계산)"""
    y = np.asarray(y, dtype=np.float64)
    _check_inputs(y, t, alpha, tol)
    out = y.copy()
    out[:, t] = alpha * y.max(axis=1)
    return out / out.sum(axis=1, keepdims=True)


def rerank(y, t: int, alpha: float) -> RerankTarget:
    """단일 확률 벡터 r_α(y, t)"""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ContractError(f"1차원 확률 벡터가 필요합니다: shape {y.shape}")
    return RerankTarget(rerank_batch(y[None, :], t, alpha)[0], int(t), float(alpha))


def rerank_onehot(y: np.ndarray, t: int) -> np.ndarray:
    """r(y, t) = onehot(t), y 의 shape 만 사용"""
    y = np.asarray(y)
    n = y.shape[0] if y.ndim == 2 else 1
    k = y.shape[-1] if y.ndim else NUM_CLASSES
    out = np.zeros((n, k), dtype=np.float64)
    out[:, t] = 1.0
    return out


def rerank_targets(y: np.ndarray, t: int, alpha: float, mode: RerankMode = RerankMode.RANK_PRESERVING,
                   tol: float = DISTRIBUTION_TOL) -> np.ndarray:
    """학습 루프용: 모드에 맞는 목표 확률 행렬"""
    if mode == RerankMode.ONEHOT:
        return rerank_onehot(y, t)
    return rerank_batch(y, t, alpha, tol)
