"""
src/adversary/atn.py

Adversarial Transformation Network (ATN) 정의와 적용

🎯 핵심 목표:
- P-ATN: x′ = tanh(x + G(x)) (잔차 섭동만 학습)
- AAE:   x′ = G(x)           (적대적 오토인코딩)
- 추론에는 타깃 분류기가 필요 없음 (insider 모드는 활성값 한 번만 전달)
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from config.settings import ATN_TRAINING, EVALUATION, NUM_CLASSES
from src.adversary.rerank import RerankMode
from src.autodiff import functional as F
from src.autodiff.tensor import Tensor
from src.data_io.checkpoint import network_from_checkpoint, read_checkpoint, serialize
from src.errors import ContractError
from src.networks.network import Network, build_network
from src.networks.specs import NetworkSpec, atn_body_spec

logger = logging.getLogger(__name__)


class GenerationMode(Enum):
    """적대적 예제 생성 방식"""
    PERTURBATION = "perturbation"
    AUTOENCODE = "autoencode"


@dataclass
class AtnConfig:
    """ATN_t 설정 (targets 는 학습 중에만 필요)"""
    target_class: int
    beta: float
    body_spec: NetworkSpec
    targets: List[Network] = field(default_factory=list)
    alpha: float = ATN_TRAINING['ALPHA']
    mode: GenerationMode = GenerationMode.AUTOENCODE
    insider: bool = False
    rerank: RerankMode = RerankMode.RANK_PRESERVING

    def __post_init__(self):
        self.mode = GenerationMode(self.mode)
        self.rerank = RerankMode(self.rerank)
        self.target_class = int(self.target_class)
        if not 0 <= self.target_class < NUM_CLASSES:
            raise ContractError(f"목표 클래스는 0~{NUM_CLASSES - 1} 이어야 합니다: {self.target_class}")
        if not self.beta > 0:
            raise ContractError(f"beta 는 양수여야 합니다: {self.beta}")
        if not self.alpha > 1:
            raise ContractError(f"alpha 는 1 보다 커야 합니다: {self.alpha}")
        if self.insider != self.body_spec.has_insider:
            raise ContractError(f"insider={self.insider} 인데 본체 명세 {self.body_spec.name} 와 맞지 않습니다")

    def metadata(self) -> Dict:
        """체크포인트에 함께 저장할 설정 (타깃 네트워크 자체는 제외)"""
        return {
            'target_class': self.target_class,
            'beta': self.beta,
            'alpha': self.alpha,
            'mode': self.mode.value,
            'insider': self.insider,
            'rerank': self.rerank.value,
            'target_names': [net.name for net in self.targets],
        }


class Atn:
    """학습 가능한 본체 + 설정"""

    def __init__(self, config: AtnConfig, body: Optional[Network] = None):
        self.config = config
        self.body = body if body is not None else build_network(config.body_spec)
        self.trained_against: List[str] = [net.name for net in config.targets]

    @property
    def target_class(self) -> int:
        return self.config.target_class

    @property
    def name(self) -> str:
        return f"{self.config.body_spec.name}_t{self.target_class}"

    def release_targets(self) -> None:
        """학습 후 타깃 네트워크 참조 해제"""
        self.config.targets = []

    def __call__(self, x, activations=None) -> Tensor:
        return apply_atn(self, x, activations)

    def __repr__(self):
        return f"Atn({self.name}, beta={self.config.beta}, mode={self.config.mode.value})"


def build_atn(target_class: int, beta: float, targets: List[Network], architecture: str = 'a',
              mode: Union[str, GenerationMode] = GenerationMode.AUTOENCODE, insider: bool = False,
              alpha: float = ATN_TRAINING['ALPHA'], seed: int = 0,
              rerank: Union[str, RerankMode] = RerankMode.RANK_PRESERVING,
              body_spec: Optional[NetworkSpec] = None) -> Atn:
    """아키텍처 이름(a|b|c)으로 ATN 생성"""
    mode = GenerationMode(mode)
    if body_spec is None:
        if insider and not targets:
            raise ContractError("insider 모드에는 활성값을 제공할 타깃 분류기가 필요합니다")
        width = targets[0].penultimate_width() if insider else 0
        body_spec = atn_body_spec(architecture, insider_width=width,
                                  perturbation=mode == GenerationMode.PERTURBATION, seed=seed,
                                  init_scale=ATN_TRAINING['PERTURBATION_INIT_SCALE'])
    else:
        body_spec = body_spec.with_seed(seed)
    config = AtnConfig(target_class, beta, body_spec, list(targets), alpha, mode, insider, RerankMode(rerank))
    return Atn(config)


def apply_atn(atn: Atn, x, activations=None) -> Tensor:
    """
    x′ = tanh(x + G(x)) (perturbation) 또는 G(x) (autoencode)

    activations 는 config.insider 일 때만, 그리고 반드시 전달해야 합니다.
    """
    if atn.config.insider and activations is None:
        raise ContractError(f"{atn.name}: insider ATN 에는 분류기 활성값이 필요합니다")
    if not atn.config.insider and activations is not None:
        raise ContractError(f"{atn.name}: insider 가 아닌 ATN 에 활성값이 전달되었습니다")

    x = F.as_tensor(x)
    g = atn.body.forward(x, insider=activations)
    if atn.config.mode == GenerationMode.PERTURBATION:
        return F.tanh(F.add(x, g))
    return g


def insider_activations(source: Optional[Network], images: np.ndarray) -> Optional[np.ndarray]:
    """insider 입력: 변형 전 이미지에 대한 분류기 penultimate 활성값"""
    if source is None:
        return None
    return source.penultimate(Tensor(images)).data


def generate(atn: Atn, images: np.ndarray, insider_source: Optional[Network] = None,
             batch: int = EVALUATION['BATCH']) -> np.ndarray:
    """grad 없이 배치 단위로 x′ 생성"""
    if atn.config.insider and insider_source is None:
        raise ContractError(f"{atn.name}: insider ATN 추론에는 활성값을 낼 분류기가 필요합니다")
    images = np.asarray(images, dtype=np.float32)
    outputs = []
    for start in range(0, len(images), batch):
        chunk = images[start:start + batch]
        acts = insider_activations(insider_source, chunk) if atn.config.insider else None
        outputs.append(apply_atn(atn, Tensor(chunk), acts).data)
    if not outputs:
        return images.copy()
    return np.concatenate(outputs, axis=0)


def save_atn(atn: Atn, path: Union[str, Path]) -> Path:
    metadata = atn.config.metadata()
    metadata['target_names'] = atn.trained_against
    return serialize(atn.body, path, metadata=metadata)


def load_atn(path: Union[str, Path]) -> Atn:
    """체크포인트 -> 추론 전용 Atn (타깃 네트워크 없음)"""
    ckpt = read_checkpoint(path)
    meta = ckpt.metadata
    if 'target_class' not in meta:
        raise ContractError(f"{path}: ATN 체크포인트가 아닙니다 (설정 메타데이터 없음)")
    body = network_from_checkpoint(ckpt, path)
    config = AtnConfig(meta['target_class'], meta['beta'], ckpt.spec, [], meta['alpha'],
                       GenerationMode(meta['mode']), meta['insider'], RerankMode(meta['rerank']))
    atn = Atn(config, body)
    atn.trained_against = list(meta.get('target_names', []))
    return atn
