"""
src/autodiff/gradcheck.py

중앙 유한차분으로 backward 결과 검증
"""

from typing import Callable

import numpy as np

from src.autodiff.tensor import Tensor, backward

ScalarFn = Callable[[Tensor], Tensor]


def analytic_gradient(fn: ScalarFn, x: np.ndarray) -> np.ndarray:
    """backward 로 구한 ∂fn/∂x (fn 이 x 에 의존하지 않으면 0)"""
    xt = Tensor(x, requires_grad=True, dtype=x.dtype)
    backward(fn(xt))
    return np.zeros_like(xt.data) if xt.grad is None else xt.grad


def numeric_gradient(fn: ScalarFn, x: np.ndarray, eps: float = 1e-3) -> np.ndarray:
    """(f(x+eps) - f(x-eps)) / (2 eps) 좌표별 계산"""
    x = np.array(x, copy=True)
    grad = np.zeros_like(x, dtype=np.float64)
    flat = x.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + eps
        f_plus = float(fn(Tensor(x, dtype=x.dtype)).data)
        flat[i] = original - eps
        f_minus = float(fn(Tensor(x, dtype=x.dtype)).data)
        flat[i] = original
        grad.reshape(-1)[i] = (f_plus - f_minus) / (2.0 * eps)
    return grad


def grad_check(fn: ScalarFn, x, eps: float = 1e-3) -> float:
    """
    해석적 gradient 와 수치 gradient 의 최대 상대 오차

    분모는 max(|analytic|, |numeric|, 1e-8)
    """
    x = np.asarray(x.data if isinstance(x, Tensor) else x)
    if not np.issubdtype(x.dtype, np.floating):
        x = x.astype(np.float64)
    analytic = analytic_gradient(fn, x).astype(np.float64)
    numeric = numeric_gradient(fn, x, eps)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom)) if x.size else 0.0
