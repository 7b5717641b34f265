"""
src/autodiff/tensor.py

역전파(reverse-mode) 자동미분용 Tensor와 계산 그래프

🎯 핵심 목표:
- numpy 배열 위에 gradient 기록을 얹은 최소한의 텐서
- 연산 결과는 생성 후 변경하지 않음 (파라미터 갱신은 optimizer_step에서만)
- 32-bit 저장이 기본, gradient 검사용 64-bit 모드 제공
"""

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ContractError

logger = logging.getLogger(__name__)

# precision() 컨텍스트가 바꾸는 기본 dtype
_dtype_stack: List[np.dtype] = [np.dtype(np.float32)]

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


def get_default_dtype() -> np.dtype:
    """현재 기본 저장 dtype"""
    return _dtype_stack[-1]


@contextmanager
def precision(dtype) -> Iterator[np.dtype]:
    """기본 dtype 임시 변경 (gradient 검사용 64-bit shadow 모드)"""
    _dtype_stack.append(np.dtype(dtype))
    try:
        yield _dtype_stack[-1]
    finally:
        _dtype_stack.pop()


class Tensor:
    """
    gradient 기록을 가진 n차원 실수 배열

    requires_grad=True 인 leaf 텐서만 backward 후 .grad 를 가집니다.
    """

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        self.data = np.array(data, dtype=dtype or get_default_dtype())
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.op = 'leaf'
        self._parents: Tuple['Tensor', ...] = ()
        self._backward: Optional[BackwardFn] = None

    @classmethod
    def from_op(cls, data: np.ndarray, parents: Sequence['Tensor'], backward: BackwardFn, op: str) -> 'Tensor':
        """연산 결과 텐서 생성 (입력 중 하나라도 grad가 필요할 때만 그래프 연결)"""
        out = cls.__new__(cls)
        out.data = data
        out.grad = None
        out.op = op
        out.requires_grad = any(p.requires_grad for p in parents)
        out._parents = tuple(parents) if out.requires_grad else ()
        out._backward = backward if out.requires_grad else None
        return out

    # ----- 기본 속성 -----
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return not self._parents

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() 은 원소 하나짜리 텐서에만 쓸 수 있습니다 (shape={self.shape})")
        return float(self.data.reshape(-1)[0])

    def detach(self) -> 'Tensor':
        return Tensor(self.data, requires_grad=False, dtype=self.data.dtype)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, op={self.op}, requires_grad={self.requires_grad})"

    # ----- 연산자 -----
    def __add__(self, other):
        from src.autodiff import functional as F
        return F.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from src.autodiff import functional as F
        return F.sub(self, other)

    def __rsub__(self, other):
        from src.autodiff import functional as F
        return F.sub(F.as_tensor(other), self)

    def __mul__(self, other):
        from src.autodiff import functional as F
        if isinstance(other, (int, float)):
            return F.scale(self, float(other))
        return F.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from src.autodiff import functional as F
        return F.scale(self, -1.0)

    def __matmul__(self, other):
        from src.autodiff import functional as F
        return F.matmul(self, other)


@dataclass
class Graph:
    """
    loss 에서 도달 가능한 (grad가 필요한) 노드의 위상 정렬 목록

    nodes 안에서 모든 노드의 입력은 그 노드보다 앞에 위치합니다.
    """
    nodes: List[Tensor] = field(default_factory=list)

    @classmethod
    def from_output(cls, output: Tensor) -> 'Graph':
        order: List[Tensor] = []
        if not output.requires_grad:
            return cls(order)

        visited = set()
        # 재귀 대신 명시적 스택 (깊은 그래프에서도 안전)
        stack = [(output, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return cls(order)

    def __len__(self) -> int:
        return len(self.nodes)


def backward(loss: Tensor) -> None:
    """
    loss(스칼라)에 대한 gradient를 requires_grad leaf 텐서의 .grad 에 누적
    """
    if loss.size != 1:
        raise ContractError(f"backward()는 스칼라 loss만 받습니다: shape={loss.shape}")

    graph = Graph.from_output(loss)
    if not graph.nodes:
        logger.debug("⚠️ loss가 grad 추적 텐서에 의존하지 않음 - backward 생략")
        return

    grads = {id(loss): np.ones_like(loss.data)}
    # 각 노드는 정확히 한 번 방문
    for node in reversed(graph.nodes):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.is_leaf:
            node.grad = g.copy() if node.grad is None else node.grad + g
            continue
        parent_grads = node._backward(g)
        for parent, pg in zip(node._parents, parent_grads):
            if pg is None or not parent.requires_grad:
                continue
            key = id(parent)
            grads[key] = pg if key not in grads else grads[key] + pg
