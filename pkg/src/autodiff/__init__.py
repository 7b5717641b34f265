"""
자동미분 모듈
src/autodiff/__init__.py

numpy 기반 역전파 자동미분과 Adam 옵티마이저를 제공합니다.

사용법:
    from src.autodiff import Tensor, functional as F, backward

    w = Tensor(np.ones((3, 1)), requires_grad=True)
    loss = F.l2_loss(F.matmul(x, w), y)
    backward(loss)
"""

from . import functional
from .gradcheck import grad_check, numeric_gradient
from .optim import Adam, OptimizerState, optimizer_step
from .tensor import Graph, Tensor, backward, get_default_dtype, precision

__all__ = [
    'Tensor', 'Graph', 'backward', 'precision', 'get_default_dtype', 'functional',
    'Adam', 'OptimizerState', 'optimizer_step', 'grad_check', 'numeric_gradient',
]
