"""
src/experiments/chain.py

ATN_0 ~ ATN_9 열 개를 한 이미지에 병렬 / 직렬로 적용

- parallel: 각 ATN_k 를 원본 x 에 독립 적용, argmax f(g_k(x)) == k 면 성공
- serial:   x⁰ = x, xᵏ⁺¹ = g_k(xᵏ), 단계별로 argmax f(xᵏ⁺¹) == k 면 성공
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from config.settings import EVALUATION, NUM_CLASSES
from src.adversary.atn import Atn, generate
from src.errors import ContractError
from src.experiments.metrics import require_frozen, second_choice
from src.networks.network import Network, predict_proba

logger = logging.getLogger(__name__)


class ChainMode(Enum):
    PARALLEL = "parallel"
    SERIAL = "serial"


@dataclass
class ChainReport:
    """이미지별 10칸 성공 마스크와 k-성공 히스토그램"""
    mode: ChainMode
    masks: np.ndarray                 # N×10 bool
    histogram: np.ndarray             # 길이 11, histogram[k] = 정확히 k 개 성공한 이미지 수
    all10_count: int
    # 단계별 변환 이미지 (격자 출력용)
    outputs: List[np.ndarray] = field(default_factory=list, repr=False)
    # 직렬 모드에서 직전 이미지의 1위가 2위로 남은 비율 (참고용)
    second_kept_rate: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n_images(self) -> int:
        return int(self.masks.shape[0])

    def per_step_rate(self) -> np.ndarray:
        return self.masks.mean(axis=0) if self.n_images else np.zeros(NUM_CLASSES)


def _check_atns(atns: Sequence[Atn]) -> None:
    if len(atns) != NUM_CLASSES:
        raise ContractError(f"ATN 은 목표 클래스마다 하나씩 {NUM_CLASSES}개가 필요합니다: {len(atns)}개")
    order = [atn.target_class for atn in atns]
    if order != list(range(NUM_CLASSES)):
        raise ContractError(f"ATN 목표 클래스 순서가 0..9 가 아닙니다: {order}")


def _build_report(mode: ChainMode, masks: np.ndarray, outputs: List[np.ndarray],
                  second_kept: Optional[np.ndarray] = None) -> ChainReport:
    histogram = np.bincount(masks.sum(axis=1), minlength=NUM_CLASSES + 1).astype(np.int64)
    report = ChainReport(mode, masks, histogram, int(histogram[NUM_CLASSES]), outputs, second_kept)
    logger.info(f"⛓️ {mode.value} chain: {report.all10_count}/{report.n_images} 이미지가 10개 ATN 모두 성공")
    return report


def _source(atn: Atn, classifier: Network) -> Optional[Network]:
    return classifier if atn.config.insider else None


def parallel_chain(atns: Sequence[Atn], classifier: Network, images: np.ndarray,
                   batch: int = EVALUATION['BATCH']) -> ChainReport:
    """원본 이미지에 ATN 10개를 각각 독립 적용"""
    _check_atns(atns)
    require_frozen([classifier])
    images = np.asarray(images, dtype=np.float32)

    masks = np.zeros((len(images), NUM_CLASSES), dtype=bool)
    outputs = []
    for k, atn in enumerate(atns):
        x_prime = generate(atn, images, insider_source=_source(atn, classifier), batch=batch)
        masks[:, k] = predict_proba(classifier, x_prime, batch).argmax(axis=1) == k
        outputs.append(x_prime)
    return _build_report(ChainMode.PARALLEL, masks, outputs)


def serial_chain(atns: Sequence[Atn], classifier: Network, images: np.ndarray,
                 batch: int = EVALUATION['BATCH']) -> ChainReport:
    """ATN_0 부터 ATN_9 까지 이전 출력에 이어서 적용"""
    _check_atns(atns)
    require_frozen([classifier])
    current = np.asarray(images, dtype=np.float32)

    masks = np.zeros((len(current), NUM_CLASSES), dtype=bool)
    second_kept = np.zeros(NUM_CLASSES)
    outputs = []
    before = predict_proba(classifier, current, batch)
    for k, atn in enumerate(atns):
        current = generate(atn, current, insider_source=_source(atn, classifier), batch=batch)
        after = predict_proba(classifier, current, batch)
        masks[:, k] = after.argmax(axis=1) == k
        if len(current):
            second_kept[k] = float((second_choice(after) == before.argmax(axis=1)).mean())
        outputs.append(current)
        before = after

    logger.debug(f"직렬 단계별 2위 유지율: {np.round(second_kept, 3).tolist()}")
    return _build_report(ChainMode.SERIAL, masks, outputs, second_kept)
