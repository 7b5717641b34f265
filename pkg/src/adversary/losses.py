"""
src/adversary/losses.py

ATN 학습 손실

    L = β · L2(x′, x) + Σ_targets L2(y′, r_α(y, t))
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from src.adversary.rerank import RerankMode, rerank_targets
from src.autodiff import functional as F
from src.autodiff.tensor import Tensor
from src.errors import ContractError, DimensionError


@dataclass
class LossTerms:
    """total = beta * input_loss + sum(output_losses)"""
    total: Tensor
    input_loss: Tensor
    output_losses: List[Tensor] = field(default_factory=list)

    def as_floats(self) -> dict:
        return {
            'total': self.total.item(),
            'input_loss': self.input_loss.item(),
            'output_loss': float(sum(t.item() for t in self.output_losses)),
        }


def loss_y(y_prime: Tensor, y: np.ndarray, t: int, alpha: float,
           mode: RerankMode = RerankMode.RANK_PRESERVING) -> Tensor:
    """L_Y,t(y′, y) = L2(y′, r(y, t)); y 는 상수 취급"""
    y = np.asarray(y, dtype=np.float64)
    single = y.ndim == 1
    target = rerank_targets(y[None, :] if single else y, t, alpha, mode)
    target = target[0] if single else target
    y_prime = F.as_tensor(y_prime)
    return F.l2_loss(y_prime, Tensor(target, dtype=y_prime.dtype))


def loss_terms(x, x_prime, ys: Sequence[Tuple[Tensor, np.ndarray]], beta: float, t: int, alpha: float,
               mode: RerankMode = RerankMode.RANK_PRESERVING) -> LossTerms:
    """입력 공간 손실과 타깃 네트워크별 출력 공간 손실 분해"""
    if not ys:
        raise ContractError("타깃 네트워크 출력 (y′, y) 쌍이 최소 하나 필요합니다")
    x, x_prime = F.as_tensor(x), F.as_tensor(x_prime)
    if x.shape != x_prime.shape:
        raise DimensionError(f"x {x.shape} 와 x′ {x_prime.shape} shape 가 다릅니다")

    input_loss = F.l2_loss(x_prime, x)
    output_losses = [loss_y(y_prime, y, t, alpha, mode) for y_prime, y in ys]
    total = F.scale(input_loss, beta)
    for term in output_losses:
        total = F.add(total, term)
    return LossTerms(total, input_loss, output_losses)


def total_loss(x, x_prime, ys: Sequence[Tuple[Tensor, np.ndarray]], beta: float, t: int, alpha: float,
               mode: RerankMode = RerankMode.RANK_PRESERVING) -> Tensor:
    """β·L2(x′, x) + Σ L_Y (다중 타깃은 합산)"""
    return loss_terms(x, x_prime, ys, beta, t, alpha, mode).total
