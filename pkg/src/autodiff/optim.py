"""
src/autodiff/optim.py

Adam 옵티마이저 (bias correction 포함)

파라미터 변경은 optimizer_step 안에서만 일어납니다.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping

import numpy as np

from config.settings import ADAM_DEFAULTS
from src.autodiff.tensor import Tensor
from src.errors import ContractError

logger = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    """파라미터별 1차/2차 모멘트와 스텝 카운터"""
    lr: float = ADAM_DEFAULTS['LR']
    beta1: float = ADAM_DEFAULTS['BETA1']
    beta2: float = ADAM_DEFAULTS['BETA2']
    epsilon: float = ADAM_DEFAULTS['EPSILON']
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def optimizer_step(state: OptimizerState, params: Mapping[str, Tensor]) -> Mapping[str, Tensor]:
    """
    Adam 한 스텝 적용 후 grad 초기화

    모든 추적 파라미터에 grad 가 있어야 합니다.
    """
    missing = [name for name, p in params.items() if p.grad is None]
    if missing:
        raise ContractError(f"grad 가 없는 파라미터: {missing}")

    state.step += 1
    bc1 = 1.0 - state.beta1 ** state.step
    bc2 = 1.0 - state.beta2 ** state.step

    for name, p in params.items():
        g = p.grad
        if name not in state.m:
            state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)
        elif state.m[name].shape != p.data.shape:
            raise ContractError(f"'{name}' 모멘트 shape {state.m[name].shape} != 파라미터 {p.data.shape}")

        m, v = state.m[name], state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)

        update = (state.lr / bc1) * m / (np.sqrt(v / bc2) + state.epsilon)
        p.data -= update.astype(p.data.dtype, copy=False)
        p.grad = None

    return params


class Adam:
    """OptimizerState 를 감싼 편의 클래스"""

    def __init__(self, lr: float = ADAM_DEFAULTS['LR'], beta1: float = ADAM_DEFAULTS['BETA1'],
                 beta2: float = ADAM_DEFAULTS['BETA2'], epsilon: float = ADAM_DEFAULTS['EPSILON']):
        self.state = OptimizerState(lr=lr, beta1=beta1, beta2=beta2, epsilon=epsilon)

    @property
    def steps(self) -> int:
        return self.state.step

    def step(self, params: Mapping[str, Tensor]) -> Mapping[str, Tensor]:
        return optimizer_step(self.state, params)
