"""
src/autodiff/functional.py

미분 가능한 텐서 연산 모음

주요 연산:
1. 원소별 연산 (add, sub, mul, scale, tanh, relu)
2. matmul, reshape/flatten, concat, sum/mean
3. conv2d / conv2d_transpose (NHWC, kernel = kh×kw×C×F)
4. softmax, softmax_cross_entropy, l2_loss
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.autodiff.tensor import Tensor
from src.errors import ContractError, DimensionError

Number = Union[int, float]
PADDINGS = ('same', 'valid')


def as_tensor(value) -> Tensor:
    """상수를 grad 없는 Tensor로 감싸기"""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """broadcast로 늘어난 축을 합쳐 원래 shape로 되돌림"""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def _check_broadcast(a: Tensor, b: Tensor, op: str) -> None:
    """같은 shape, 스칼라, 마지막 축 bias 만 허용 (임의 broadcast는 지원하지 않음)"""
    if a.shape == b.shape:
        return
    for x, y in ((a, b), (b, a)):
        if y.size == 1 and y.ndim <= 1:
            return
        if y.ndim == 1 and x.ndim >= 1 and x.shape[-1] == y.shape[0]:
            return
    raise DimensionError(f"{op}: broadcast 불가능한 shape {a.shape} 와 {b.shape}")


# ----- 원소별 연산 -----
def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, 'add')

    def _backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return Tensor.from_op(a.data + b.data, (a, b), _backward, 'add')


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, 'sub')

    def _backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return Tensor.from_op(a.data - b.data, (a, b), _backward, 'sub')


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, 'mul')

    def _backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return Tensor.from_op(a.data * b.data, (a, b), _backward, 'mul')


def scale(x, c: Number) -> Tensor:
    x = as_tensor(x)
    c = float(c)

    def _backward(g):
        return (g * c,)

    return Tensor.from_op(x.data * x.data.dtype.type(c), (x,), _backward, 'scale')


def tanh(x) -> Tensor:
    x = as_tensor(x)
    t = np.tanh(x.data)

    def _backward(g):
        return (g * (1.0 - t * t),)

    return Tensor.from_op(t, (x,), _backward, 'tanh')


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0

    def _backward(g):
        return (g * mask,)

    return Tensor.from_op(x.data * mask, (x,), _backward, 'relu')


_UNARY = {'tanh': tanh, 'relu': relu}
_BINARY = {'add': add, 'sub': sub, 'mul': mul}


def elementwise(x, fn: str, other=None) -> Tensor:
    """이름으로 원소별 연산 선택 (tanh|relu|add|sub|mul|scale)"""
    if fn in _UNARY:
        return _UNARY[fn](x)
    if fn in _BINARY:
        if other is None:
            raise ContractError(f"'{fn}' 연산에는 두 번째 피연산자가 필요합니다")
        return _BINARY[fn](x, other)
    if fn == 'scale':
        return scale(x, other)
    raise ContractError(f"알 수 없는 원소별 연산: {fn}")


# ----- 선형대수 / shape -----
def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: shape {a.shape} 와 {b.shape} 의 내부 차원이 맞지 않습니다")

    def _backward(g):
        ga = g @ b.data.T if a.requires_grad else None
        gb = a.data.T @ g if b.requires_grad else None
        return ga, gb

    return Tensor.from_op(a.data @ b.data, (a, b), _backward, 'matmul')


def reshape(x, shape: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError as e:
        raise DimensionError(f"reshape: {x.shape} -> {tuple(shape)} 불가 ({e})") from e

    def _backward(g):
        return (g.reshape(x.shape),)

    return Tensor.from_op(out, (x,), _backward, 'reshape')


def flatten(x) -> Tensor:
    """(N, ...) -> (N, prod(...))"""
    x = as_tensor(x)
    return reshape(x, (x.shape[0], -1))


def concat(tensors: Sequence, axis: int = 1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as e:
        raise DimensionError(f"concat: shape {[t.shape for t in tensors]} 결합 불가 ({e})") from e
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def _backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return Tensor.from_op(out, tensors, _backward, 'concat')


def sum(x) -> Tensor:  # noqa: A001 - 텐서 연산 이름
    x = as_tensor(x)

    def _backward(g):
        return (np.broadcast_to(g, x.shape).astype(x.dtype),)

    return Tensor.from_op(np.asarray(x.data.sum(), dtype=x.dtype), (x,), _backward, 'sum')


def mean(x) -> Tensor:
    x = as_tensor(x)
    n = x.size

    def _backward(g):
        return (np.broadcast_to(g / n, x.shape).astype(x.dtype),)

    return Tensor.from_op(np.asarray(x.data.mean(), dtype=x.dtype), (x,), _backward, 'mean')


# ----- 합성곱 -----
def conv_geometry(in_h: int, in_w: int, kh: int, kw: int, stride: int, padding: str):
    """
    출력 크기와 (위, 아래), (왼쪽, 오른쪽) padding 계산

    same: out = ceil(in / stride), 부족분은 아래/오른쪽에 하나 더
    valid: out = (in - k) // stride + 1
    """
    if stride < 1:
        raise ContractError(f"stride는 1 이상이어야 합니다: {stride}")
    if padding not in PADDINGS:
        raise ContractError(f"padding은 same|valid 중 하나여야 합니다: {padding}")

    if padding == 'valid':
        if kh > in_h or kw > in_w:
            raise DimensionError(f"kernel {kh}x{kw} 가 입력 {in_h}x{in_w} 보다 큽니다")
        return ((in_h - kh) // stride + 1, (in_w - kw) // stride + 1), (0, 0), (0, 0)

    out_h, out_w = -(-in_h // stride), -(-in_w // stride)
    pad_h = max((out_h - 1) * stride + kh - in_h, 0)
    pad_w = max((out_w - 1) * stride + kw - in_w, 0)
    return (out_h, out_w), (pad_h // 2, pad_h - pad_h // 2), (pad_w // 2, pad_w - pad_w // 2)


def _pad(x: np.ndarray, pad_h, pad_w) -> np.ndarray:
    if pad_h == (0, 0) and pad_w == (0, 0):
        return x
    return np.pad(x, ((0, 0), pad_h, pad_w, (0, 0)))


def _crop(x: np.ndarray, pad_h, pad_w) -> np.ndarray:
    h, w = x.shape[1], x.shape[2]
    return x[:, pad_h[0]:h - pad_h[1], pad_w[0]:w - pad_w[1], :]


def _patches(xp: np.ndarray, kh: int, kw: int, stride: int, out_h: int, out_w: int) -> np.ndarray:
    """(N, Hp, Wp, C) -> (N, out_h, out_w, C, kh, kw) 뷰"""
    windows = sliding_window_view(xp, (kh, kw), axis=(1, 2))
    return windows[:, ::stride, ::stride][:, :out_h, :out_w]


def _correlate(patches: np.ndarray, k: np.ndarray) -> np.ndarray:
    return np.tensordot(patches, k.transpose(2, 0, 1, 3), axes=([3, 4, 5], [0, 1, 2]))


def _kernel_grad(patches: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.tensordot(patches, g, axes=([0, 1, 2], [0, 1, 2])).transpose(1, 2, 0, 3)


def _scatter(g: np.ndarray, k: np.ndarray, padded_shape, stride: int) -> np.ndarray:
    """correlation의 입력 방향 adjoint (col2im)"""
    kh, kw = k.shape[:2]
    out_h, out_w = g.shape[1:3]
    dxp = np.zeros(padded_shape, dtype=g.dtype)
    gk = np.tensordot(g, k, axes=([3], [3]))  # N, out_h, out_w, kh, kw, C
    span_h = stride * (out_h - 1) + 1
    span_w = stride * (out_w - 1) + 1
    for i in range(kh):
        for j in range(kw):
            dxp[:, i:i + span_h:stride, j:j + span_w:stride, :] += gk[:, :, :, i, j, :]
    return dxp


def conv2d(x, k, stride: int = 1, padding: str = 'same') -> Tensor:
    """x: N×H×W×C, k: kh×kw×C×F -> N×H'×W'×F (cross-correlation)"""
    x, k = as_tensor(x), as_tensor(k)
    if x.ndim != 4 or k.ndim != 4 or x.shape[3] != k.shape[2]:
        raise DimensionError(f"conv2d: 입력 {x.shape} 와 kernel {k.shape} 이 맞지 않습니다")

    kh, kw = k.shape[:2]
    (out_h, out_w), pad_h, pad_w = conv_geometry(x.shape[1], x.shape[2], kh, kw, stride, padding)
    xp = _pad(x.data, pad_h, pad_w)
    patches = _patches(xp, kh, kw, stride, out_h, out_w)
    out = _correlate(patches, k.data)

    def _backward(g):
        gx = _crop(_scatter(g, k.data, xp.shape, stride), pad_h, pad_w) if x.requires_grad else None
        gk = _kernel_grad(patches, g) if k.requires_grad else None
        return gx, gk

    return Tensor.from_op(out, (x, k), _backward, 'conv2d')


def conv2d_transpose(x, k, stride: int, out_shape: Sequence[int], padding: str = 'same') -> Tensor:
    """
    conv2d 의 입력 방향 gradient 를 forward 연산으로 사용 (deconvolution)

    x: N×h×w×F, k: kh×kw×C×F, out_shape: (H, W, C) 또는 (N, H, W, C).
    conv2d(출력, k, stride, padding) 의 출력 크기가 h×w 여야 합니다.
    """
    x, k = as_tensor(x), as_tensor(k)
    out_shape = tuple(int(d) for d in out_shape)
    if len(out_shape) == 4:
        out_shape = out_shape[1:]
    if x.ndim != 4 or k.ndim != 4 or len(out_shape) != 3:
        raise DimensionError(f"conv2d_transpose: 입력 {x.shape}, kernel {k.shape}, out_shape {out_shape}")
    out_h, out_w, channels = out_shape
    if x.shape[3] != k.shape[3] or channels != k.shape[2]:
        raise DimensionError(
            f"conv2d_transpose: 입력 {x.shape} / kernel {k.shape} / out_shape {out_shape} 채널 불일치"
        )

    kh, kw = k.shape[:2]
    (in_h, in_w), pad_h, pad_w = conv_geometry(out_h, out_w, kh, kw, stride, padding)
    if (in_h, in_w) != x.shape[1:3]:
        raise DimensionError(
            f"conv2d_transpose: out_shape {out_shape} 은 stride={stride}, kernel {kh}x{kw}, "
            f"{padding} 에서 입력 {x.shape[1:3]} 과 맞지 않습니다 ({in_h}x{in_w} 필요)"
        )

    padded_shape = (x.shape[0], out_h + pad_h[0] + pad_h[1], out_w + pad_w[0] + pad_w[1], channels)
    out = _crop(_scatter(x.data, k.data, padded_shape, stride), pad_h, pad_w)

    def _backward(g):
        patches = _patches(_pad(g, pad_h, pad_w), kh, kw, stride, in_h, in_w)
        gx = _correlate(patches, k.data) if x.requires_grad else None
        gk = _kernel_grad(patches, x.data) if k.requires_grad else None
        return gx, gk

    return Tensor.from_op(np.ascontiguousarray(out), (x, k), _backward, 'conv2d_transpose')


# ----- 확률 / 손실 -----
def _stable_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax(logits) -> Tensor:
    """행 단위 softmax (max-subtraction)"""
    logits = as_tensor(logits)
    if logits.ndim != 2:
        raise DimensionError(f"softmax: N×K 입력이 필요합니다 ({logits.shape})")
    if not np.all(np.isfinite(logits.data)):
        raise ContractError("softmax: NaN/Inf logits")
    s = _stable_softmax(logits.data)

    def _backward(g):
        return (s * (g - (g * s).sum(axis=1, keepdims=True)),)

    return Tensor.from_op(s, (logits,), _backward, 'softmax')


def softmax_cross_entropy(logits, labels: np.ndarray) -> Tensor:
    """softmax + 평균 음의 로그우도 (분류기 학습용)"""
    logits = as_tensor(logits)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise DimensionError(f"cross entropy: logits {logits.shape} 와 labels {labels.shape}")
    if not np.all(np.isfinite(logits.data)):
        raise ContractError("cross entropy: NaN/Inf logits")

    n = logits.shape[0]
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_p = shifted - log_z
    loss = -log_p[np.arange(n), labels].mean()

    def _backward(g):
        grad = np.exp(log_p)
        grad[np.arange(n), labels] -= 1.0
        return (grad * (g / n),)

    return Tensor.from_op(np.asarray(loss, dtype=logits.dtype), (logits,), _backward, 'cross_entropy')


def l2_loss(a, b) -> Tensor:
    """원소별 제곱 차의 평균"""
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise DimensionError(f"l2_loss: shape {a.shape} 와 {b.shape} 가 다릅니다")
    diff = a.data - b.data
    n = diff.size

    def _backward(g):
        ga = diff * (2.0 * g / n)
        return ga, -ga

    return Tensor.from_op(np.asarray(np.mean(diff * diff), dtype=diff.dtype), (a, b), _backward, 'l2_loss')
