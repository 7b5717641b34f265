"""
src/networks/network.py

NetworkSpec 으로부터 학습 가능한 Network 생성 및 forward

🎯 핵심 목표:
- build 시점에 레이어 shape 연결 검사 (문제 레이어 이름 포함)
- seed 결정적 초기화 (truncated normal, fan-in 스케일, bias 0)
- frozen 네트워크는 파라미터 grad 를 받지 않음
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from config.settings import IMAGE_SHAPE, NUM_CLASSES
from src.autodiff import functional as F
from src.autodiff.tensor import Tensor, get_default_dtype
from src.errors import BuildError, ContractError, DimensionError
from src.networks.specs import LayerKind, LayerSpec, NetworkSpec

logger = logging.getLogger(__name__)


def _layer_name(index: int, layer: LayerSpec) -> str:
    return f"layer{index}_{layer.kind.value}"


def infer_shapes(spec: NetworkSpec) -> List[Tuple[int, ...]]:
    """
    레이어별 출력 shape (배치 축 제외) 계산

    Returns:
        shapes[i] = i번째 레이어 출력 shape, shapes[-1] = 네트워크 출력
    """
    shape = tuple(spec.input_shape)
    shapes = []
    for i, layer in enumerate(spec.layers):
        where = f"{spec.name}: {_layer_name(i, layer)}"
        if layer.activation not in ('relu', 'tanh', 'none'):
            raise BuildError(f"{where} 알 수 없는 activation '{layer.activation}'")

        if layer.kind == LayerKind.CONV:
            if len(shape) != 3:
                raise BuildError(f"{where} 는 H×W×C 입력이 필요합니다 (현재 {shape})")
            try:
                (out_h, out_w), _, _ = F.conv_geometry(shape[0], shape[1], *layer.kernel,
                                                       layer.stride, layer.padding)
            except (DimensionError, ContractError) as e:
                raise BuildError(f"{where}: {e}") from e
            shape = (out_h, out_w, layer.units)
        elif layer.kind == LayerKind.DECONV:
            if len(shape) != 3 or len(layer.shape) != 2:
                raise BuildError(f"{where} 는 H×W×C 입력과 out=H×W 가 필요합니다 (현재 {shape})")
            try:
                (in_h, in_w), _, _ = F.conv_geometry(*layer.shape, *layer.kernel,
                                                     layer.stride, layer.padding)
            except (DimensionError, ContractError) as e:
                raise BuildError(f"{where}: {e}") from e
            if (in_h, in_w) != shape[:2]:
                raise BuildError(f"{where} 출력 {layer.shape} 는 입력 {shape[:2]} 과 맞지 않습니다")
            shape = (*layer.shape, layer.units)
        elif layer.kind == LayerKind.FC:
            if len(shape) != 1:
                raise BuildError(f"{where} 앞에 flatten 이 필요합니다 (현재 {shape})")
            if layer.units < 1:
                raise BuildError(f"{where} units 는 1 이상이어야 합니다")
            shape = (layer.units,)
        elif layer.kind == LayerKind.FLATTEN:
            shape = (int(np.prod(shape)),)
        elif layer.kind == LayerKind.RESHAPE:
            if int(np.prod(layer.shape)) != int(np.prod(shape)):
                raise BuildError(f"{where} {shape} -> {layer.shape} 원소 수 불일치")
            shape = tuple(layer.shape)
        elif layer.kind == LayerKind.INSIDER:
            if len(shape) != 1 or spec.insider_width < 1:
                raise BuildError(f"{where} 는 평탄화된 입력과 insider_width > 0 이 필요합니다")
            shape = (shape[0] + spec.insider_width,)
        shapes.append(shape)

    if not shapes:
        raise BuildError(f"{spec.name}: 레이어가 없습니다")
    if shape != tuple(spec.output_shape):
        raise BuildError(f"{spec.name}: 출력 {shape} 가 선언된 output_shape {spec.output_shape} 와 다릅니다")
    if spec.insider_width and not spec.has_insider:
        raise BuildError(f"{spec.name}: insider_width 가 있지만 insider 레이어가 없습니다")

    parametric = [layer for layer in spec.layers if layer.has_params]
    if spec.kind == 'classifier':
        last = spec.layers[-1]
        if last.kind != LayerKind.FC or last.units != NUM_CLASSES:
            raise BuildError(f"{spec.name}: 분류기는 {NUM_CLASSES}-unit FC logit 레이어로 끝나야 합니다")
    elif spec.kind == 'atn':
        if shape != IMAGE_SHAPE or not parametric or parametric[-1].activation != 'tanh':
            raise BuildError(f"{spec.name}: ATN 본체는 28x28x1 tanh 레이어로 끝나야 합니다")
    else:
        raise BuildError(f"{spec.name}: kind 는 classifier|atn 이어야 합니다 ({spec.kind})")
    return shapes


def param_shapes(spec: NetworkSpec) -> Dict[str, Tuple[int, ...]]:
    """파라미터 이름 -> shape (체크포인트 검증용)"""
    shapes = infer_shapes(spec)
    result: Dict[str, Tuple[int, ...]] = {}
    prev = tuple(spec.input_shape)
    for i, layer in enumerate(spec.layers):
        name = _layer_name(i, layer)
        if layer.kind == LayerKind.CONV:
            result[f"{name}.kernel"] = (*layer.kernel, prev[2], layer.units)
        elif layer.kind == LayerKind.DECONV:
            result[f"{name}.kernel"] = (*layer.kernel, layer.units, prev[2])
        elif layer.kind == LayerKind.FC:
            result[f"{name}.kernel"] = (prev[0], layer.units)
        if layer.has_params:
            result[f"{name}.bias"] = (layer.units,)
        prev = shapes[i]
    return result


def _truncated_normal(rng: np.random.Generator, shape, std: float) -> np.ndarray:
    """±2σ 밖의 값은 다시 뽑기"""
    values = rng.standard_normal(shape)
    mask = np.abs(values) > 2.0
    while mask.any():
        values[mask] = rng.standard_normal(int(mask.sum()))
        mask = np.abs(values) > 2.0
    return values * std


class Network:
    """
    학습 가능한 파라미터 집합 + forward

    분류기 f 와 ATN 본체 g 모두 이 클래스로 표현합니다.
    """

    def __init__(self, spec: NetworkSpec, params: Dict[str, Tensor], frozen: bool = False):
        self.spec = spec
        self.params = params
        self._shapes = infer_shapes(spec)
        self.frozen = False
        if frozen:
            self.freeze()

    @property
    def name(self) -> str:
        return self.spec.name

    def freeze(self) -> 'Network':
        """파라미터 고정 (grad 추적 해제)"""
        self.frozen = True
        for p in self.params.values():
            p.requires_grad = False
            p.grad = None
        return self

    def unfreeze(self) -> 'Network':
        self.frozen = False
        for p in self.params.values():
            p.requires_grad = True
        return self

    def parameters(self) -> Dict[str, Tensor]:
        return self.params

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.params.items()}

    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    # ----- forward -----
    def _check_input(self, x: Tensor, insider: Optional[Tensor]) -> None:
        if x.ndim != len(self.spec.input_shape) + 1 or x.shape[1:] != tuple(self.spec.input_shape):
            raise DimensionError(f"{self.name}: 입력 shape {x.shape} (기대값 N×{self.spec.input_shape})")
        if self.spec.has_insider:
            if insider is None:
                raise ContractError(f"{self.name}: insider 활성값이 필요합니다")
            if insider.shape != (x.shape[0], self.spec.insider_width):
                raise DimensionError(
                    f"{self.name}: insider shape {insider.shape} (기대값 {(x.shape[0], self.spec.insider_width)})"
                )
        elif insider is not None:
            raise ContractError(f"{self.name}: insider 입력을 받지 않는 네트워크입니다")

    def _run(self, x, insider=None, stop_at: Optional[int] = None) -> Tensor:
        x = F.as_tensor(x)
        insider = None if insider is None else F.as_tensor(insider)
        self._check_input(x, insider)

        h = x
        for i, layer in enumerate(self.spec.layers):
            name = _layer_name(i, layer)
            if layer.kind == LayerKind.CONV:
                h = F.conv2d(h, self.params[f"{name}.kernel"], layer.stride, layer.padding)
                h = F.add(h, self.params[f"{name}.bias"])
            elif layer.kind == LayerKind.DECONV:
                h = F.conv2d_transpose(h, self.params[f"{name}.kernel"], layer.stride,
                                       self._shapes[i], layer.padding)
                h = F.add(h, self.params[f"{name}.bias"])
            elif layer.kind == LayerKind.FC:
                h = F.add(F.matmul(h, self.params[f"{name}.kernel"]), self.params[f"{name}.bias"])
            elif layer.kind == LayerKind.FLATTEN:
                h = F.flatten(h)
            elif layer.kind == LayerKind.RESHAPE:
                h = F.reshape(h, (h.shape[0], *layer.shape))
            elif layer.kind == LayerKind.INSIDER:
                h = F.concat([h, insider], axis=1)

            if layer.activation == 'relu':
                h = F.relu(h)
            elif layer.activation == 'tanh':
                h = F.tanh(h)
            if stop_at is not None and i == stop_at:
                break
        return h

    def forward(self, x, insider=None) -> Tensor:
        """분류기: N×10 logits / ATN 본체: N×28×28×1 이미지"""
        return self._run(x, insider)

    __call__ = forward

    def penultimate(self, x) -> Tensor:
        """마지막 hidden FC 레이어 활성값 (logit 직전)"""
        fc_layers = [i for i, layer in enumerate(self.spec.layers) if layer.kind == LayerKind.FC]
        if len(fc_layers) < 2:
            raise ContractError(f"{self.name}: hidden FC 레이어가 없어 penultimate 활성값을 낼 수 없습니다")
        return self._run(x, stop_at=fc_layers[-2])

    def penultimate_width(self) -> int:
        fc_layers = [i for i, layer in enumerate(self.spec.layers) if layer.kind == LayerKind.FC]
        if len(fc_layers) < 2:
            raise ContractError(f"{self.name}: hidden FC 레이어가 없습니다")
        return self.spec.layers[fc_layers[-2]].units

    def __repr__(self):
        return f"Network({self.name}, params={self.num_parameters():,}, frozen={self.frozen})"


def build_network(spec: NetworkSpec) -> Network:
    """명세 검증 후 seed 결정적으로 파라미터 초기화"""
    shapes = param_shapes(spec)
    rng = np.random.default_rng(spec.seed)
    dtype = get_default_dtype()
    params: Dict[str, Tensor] = {}

    for i, layer in enumerate(spec.layers):
        if not layer.has_params:
            continue
        name = _layer_name(i, layer)
        kshape = shapes[f"{name}.kernel"]
        if layer.kind == LayerKind.FC:
            fan_in = kshape[0]
        elif layer.kind == LayerKind.CONV:
            fan_in = kshape[0] * kshape[1] * kshape[2]
        else:
            fan_in = kshape[0] * kshape[1] * kshape[3]
        gain = 2.0 if layer.activation == 'relu' else 1.0
        std = np.sqrt(gain / fan_in) * layer.init_scale
        params[f"{name}.kernel"] = Tensor(_truncated_normal(rng, kshape, std), requires_grad=True, dtype=dtype)
        params[f"{name}.bias"] = Tensor(np.zeros(layer.units), requires_grad=True, dtype=dtype)

    net = Network(spec, params)
    logger.debug(f"✅ {net} 생성 (seed={spec.seed})")
    return net


def forward(net: Network, x, insider=None) -> Tensor:
    return net.forward(x, insider)


def penultimate(net: Network, x) -> Tensor:
    return net.penultimate(x)


def predict_proba(net, images: np.ndarray, batch: int = 500) -> np.ndarray:
    """grad 없이 배치 단위 softmax 확률 계산"""
    images = np.asarray(images)
    if len(images) == 0:
        return np.zeros((0, NUM_CLASSES), dtype=np.float64)
    rows = []
    for start in range(0, len(images), batch):
        logits = net.forward(Tensor(images[start:start + batch]))
        rows.append(F.softmax(logits).data)
    return np.concatenate(rows, axis=0)
