"""
src/networks/specs.py

선언적 네트워크 명세 (NetworkSpec) 와 기본 아키텍처 레지스트리

🎯 핵심 목표:
- 분류기 5종 (classifier_p, a0, a1, a2, a3)
- ATN 본체 3종 (a: FC, b: Conv→FC, c: Conv→Deconv)
- 설정 파일에서 한 줄씩 쓸 수 있는 레이어 문자열 포맷
"""

from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from config.settings import IMAGE_SHAPE, NUM_CLASSES
from src.errors import BuildError, ConfigError


class LayerKind(Enum):
    """레이어 유형"""
    CONV = "conv"
    DECONV = "deconv"
    FC = "fc"
    FLATTEN = "flatten"
    RESHAPE = "reshape"
    INSIDER = "insider"  # 분류기 내부 활성값을 이어붙이는 지점


ACTIVATIONS = ('relu', 'tanh', 'none')
PARAMETRIC = (LayerKind.CONV, LayerKind.DECONV, LayerKind.FC)


@dataclass(frozen=True)
class LayerSpec:
    """레이어 하나의 명세"""
    kind: LayerKind
    units: int = 0                      # FC 출력 수 / conv 필터 수
    kernel: Tuple[int, int] = (0, 0)
    stride: int = 1
    padding: str = 'same'
    activation: str = 'none'
    shape: Tuple[int, ...] = ()         # reshape 대상 / deconv 출력 공간 크기
    init_scale: float = 1.0

    @property
    def has_params(self) -> bool:
        return self.kind in PARAMETRIC

    def to_dict(self) -> Dict:
        d = asdict(self)
        d['kind'] = self.kind.value
        d['kernel'] = list(self.kernel)
        d['shape'] = list(self.shape)
        return d

    @classmethod
    def from_dict(cls, d: Dict) -> 'LayerSpec':
        return cls(
            kind=LayerKind(d['kind']),
            units=int(d.get('units', 0)),
            kernel=tuple(d.get('kernel', (0, 0))),
            stride=int(d.get('stride', 1)),
            padding=d.get('padding', 'same'),
            activation=d.get('activation', 'none'),
            shape=tuple(d.get('shape', ())),
            init_scale=float(d.get('init_scale', 1.0)),
        )


@dataclass(frozen=True)
class NetworkSpec:
    """
    네트워크 명세

    kind 가 'classifier' 면 10개 logit 으로, 'atn' 이면 28×28×1 tanh 이미지로 끝나야 합니다.
    """
    name: str
    kind: str
    layers: Tuple[LayerSpec, ...]
    input_shape: Tuple[int, ...] = IMAGE_SHAPE
    output_shape: Tuple[int, ...] = ()
    seed: int = 0
    insider_width: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'layers', tuple(self.layers))
        object.__setattr__(self, 'input_shape', tuple(self.input_shape))
        if not self.output_shape:
            default = (NUM_CLASSES,) if self.kind == 'classifier' else IMAGE_SHAPE
            object.__setattr__(self, 'output_shape', default)
        else:
            object.__setattr__(self, 'output_shape', tuple(self.output_shape))

    @property
    def has_insider(self) -> bool:
        return any(layer.kind == LayerKind.INSIDER for layer in self.layers)

    def with_seed(self, seed: int) -> 'NetworkSpec':
        return replace(self, seed=int(seed))

    def to_dict(self) -> Dict:
        return {
            'name': self.name,
            'kind': self.kind,
            'layers': [layer.to_dict() for layer in self.layers],
            'input_shape': list(self.input_shape),
            'output_shape': list(self.output_shape),
            'seed': self.seed,
            'insider_width': self.insider_width,
        }

    @classmethod
    def from_dict(cls, d: Dict) -> 'NetworkSpec':
        return cls(
            name=d['name'],
            kind=d['kind'],
            layers=tuple(LayerSpec.from_dict(layer) for layer in d['layers']),
            input_shape=tuple(d['input_shape']),
            output_shape=tuple(d['output_shape']),
            seed=int(d.get('seed', 0)),
            insider_width=int(d.get('insider_width', 0)),
        )


# ----- 레이어 생성 헬퍼 -----
def conv(k: int, filters: int, stride: int = 1, activation: str = 'relu', padding: str = 'same') -> LayerSpec:
    return LayerSpec(LayerKind.CONV, units=filters, kernel=(k, k), stride=stride,
                     padding=padding, activation=activation)


def deconv(k: int, filters: int, out_hw: Tuple[int, int], stride: int = 2,
           activation: str = 'relu', padding: str = 'same') -> LayerSpec:
    return LayerSpec(LayerKind.DECONV, units=filters, kernel=(k, k), stride=stride,
                     padding=padding, activation=activation, shape=tuple(out_hw))


def fc(units: int, activation: str = 'none') -> LayerSpec:
    return LayerSpec(LayerKind.FC, units=units, activation=activation)


FLATTEN = LayerSpec(LayerKind.FLATTEN)
INSIDER = LayerSpec(LayerKind.INSIDER)


def reshape(*shape: int) -> LayerSpec:
    return LayerSpec(LayerKind.RESHAPE, shape=tuple(shape))


# ----- 분류기 (hidden width 256, 채널 32→64→64) -----
CLASSIFIER_SPECS: Dict[str, NetworkSpec] = {
    'classifier_p': NetworkSpec(
        'classifier_p', 'classifier',
        (conv(5, 32, 2), conv(5, 64, 2), FLATTEN, fc(256, 'relu'), fc(NUM_CLASSES)),
        seed=1,
    ),
    # classifier_p 와 같은 구조, 초기화만 다름
    'classifier_a0': NetworkSpec(
        'classifier_a0', 'classifier',
        (conv(5, 32, 2), conv(5, 64, 2), FLATTEN, fc(256, 'relu'), fc(NUM_CLASSES)),
        seed=2,
    ),
    'classifier_a1': NetworkSpec(
        'classifier_a1', 'classifier',
        (conv(4, 32, 2), conv(4, 64, 2), conv(4, 64, 1), FLATTEN, fc(256, 'relu'), fc(NUM_CLASSES)),
        seed=3,
    ),
    'classifier_a2': NetworkSpec(
        'classifier_a2', 'classifier',
        (conv(3, 32, 2), conv(3, 64, 2), conv(3, 64, 1), FLATTEN, fc(256, 'relu'), fc(NUM_CLASSES)),
        seed=4,
    ),
    'classifier_a3': NetworkSpec(
        'classifier_a3', 'classifier',
        (conv(3, 32, 2), FLATTEN, fc(256, 'relu'), fc(128, 'relu'), fc(NUM_CLASSES)),
        seed=5,
    ),
}

ATN_ARCHITECTURES = ('a', 'b', 'c')
IMAGE_UNITS = IMAGE_SHAPE[0] * IMAGE_SHAPE[1] * IMAGE_SHAPE[2]


def atn_body_spec(architecture: str, insider_width: int = 0, perturbation: bool = False,
                  seed: int = 0, init_scale: float = 0.01) -> NetworkSpec:
    """
    ATN 본체 명세 생성

    - a: FC → FC → 28x28 이미지
    - b: (3x3 Conv)×3 → FC → 28x28 이미지
    - c: (3x3 Conv)×3 → Deconv 7x7 → Deconv 14x14 → 28x28 이미지

    insider_width > 0 이면 분류기 penultimate 활성값을 평탄화된 특징 뒤에 이어붙입니다.
    perturbation=True 면 마지막 레이어를 init_scale 로 줄여 G(x) ≈ 0 에서 시작합니다.
    """
    insider = [INSIDER] if insider_width else []
    last_scale = init_scale if perturbation else 1.0

    if architecture == 'a':
        layers = [FLATTEN, *insider, fc(1024, 'relu'),
                  replace(fc(IMAGE_UNITS, 'tanh'), init_scale=last_scale), reshape(*IMAGE_SHAPE)]
    elif architecture == 'b':
        layers = [conv(3, 32, 2), conv(3, 64, 2), conv(3, 64, 1), FLATTEN, *insider,
                  replace(fc(IMAGE_UNITS, 'tanh'), init_scale=last_scale), reshape(*IMAGE_SHAPE)]
    elif architecture == 'c':
        bottleneck = [FLATTEN, INSIDER, fc(4 * 4 * 64, 'relu'), reshape(4, 4, 64)] if insider_width else []
        layers = [conv(3, 32, 2), conv(3, 64, 2), conv(3, 64, 2), *bottleneck,
                  deconv(3, 64, (7, 7)), deconv(3, 32, (14, 14)),
                  replace(deconv(3, IMAGE_SHAPE[2], IMAGE_SHAPE[:2], activation='tanh'), init_scale=last_scale)]
    else:
        raise BuildError(f"알 수 없는 ATN 아키텍처: {architecture} (a|b|c)")

    suffix = '_insider' if insider_width else ''
    return NetworkSpec(f'atn_{architecture}{suffix}', 'atn', tuple(layers),
                       seed=seed, insider_width=insider_width)


# ----- 설정 파일용 레이어 문자열 -----
def format_layer(layer: LayerSpec) -> str:
    """LayerSpec -> 'conv 5x5 32 stride=2 same relu' 형식"""
    kind = layer.kind.value
    if layer.kind in (LayerKind.FLATTEN, LayerKind.INSIDER):
        return kind
    if layer.kind == LayerKind.RESHAPE:
        return f"{kind} {'x'.join(str(d) for d in layer.shape)}"

    parts = [kind]
    if layer.kind == LayerKind.FC:
        parts.append(str(layer.units))
    else:
        parts += [f"{layer.kernel[0]}x{layer.kernel[1]}", str(layer.units), f"stride={layer.stride}"]
        if layer.kind == LayerKind.DECONV:
            parts.append(f"out={layer.shape[0]}x{layer.shape[1]}")
        parts.append(layer.padding)
    parts.append(layer.activation)
    if layer.init_scale != 1.0:
        parts.append(f"scale={layer.init_scale!r}")
    return ' '.join(parts)


def _dims(token: str, line: str) -> Tuple[int, ...]:
    try:
        return tuple(int(d) for d in token.lower().split('x'))
    except ValueError as e:
        raise ConfigError(f"차원 표기 오류 '{token}' ({line})") from e


def parse_layer(line: str) -> LayerSpec:
    """format_layer 의 역변환"""
    tokens = line.split()
    if not tokens:
        raise ConfigError("빈 레이어 정의")
    try:
        kind = LayerKind(tokens[0].lower())
    except ValueError as e:
        raise ConfigError(f"알 수 없는 레이어 유형 '{tokens[0]}' ({line})") from e

    if kind in (LayerKind.FLATTEN, LayerKind.INSIDER):
        return LayerSpec(kind)
    if kind == LayerKind.RESHAPE:
        if len(tokens) != 2:
            raise ConfigError(f"reshape 는 'reshape HxWxC' 형식이어야 합니다 ({line})")
        return LayerSpec(kind, shape=_dims(tokens[1], line))

    fields: Dict = {'kind': kind}
    positional: List[str] = []
    for token in tokens[1:]:
        low = token.lower()
        if '=' in low:
            key, value = low.split('=', 1)
            if key == 'stride':
                fields['stride'] = int(value)
            elif key == 'out':
                fields['shape'] = _dims(value, line)
            elif key == 'scale':
                fields['init_scale'] = float(value)
            else:
                raise ConfigError(f"알 수 없는 옵션 '{key}' ({line})")
        elif low in ('same', 'valid'):
            fields['padding'] = low
        elif low in ACTIVATIONS:
            fields['activation'] = low
        else:
            positional.append(token)

    try:
        if kind == LayerKind.FC:
            (units,) = positional
            fields['units'] = int(units)
        else:
            kernel, units = positional
            fields['kernel'] = _dims(kernel, line)
            fields['units'] = int(units)
    except ValueError as e:
        raise ConfigError(f"레이어 정의 형식 오류 ({line})") from e

    if kind == LayerKind.DECONV and 'shape' not in fields:
        raise ConfigError(f"deconv 에는 out=HxW 가 필요합니다 ({line})")
    return LayerSpec(**fields)


def spec_from_lines(name: str, kind: str, lines: Sequence[str], seed: int = 0,
                    insider_width: int = 0, input_shape: Optional[Sequence[int]] = None) -> NetworkSpec:
    layers = tuple(parse_layer(line) for line in lines if line.strip())
    return NetworkSpec(name, kind, layers, input_shape=tuple(input_shape or IMAGE_SHAPE),
                       seed=seed, insider_width=insider_width)
