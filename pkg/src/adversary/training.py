"""
src/adversary/training.py

ATN 자기지도 학습 루프

라벨 없이 이미지 배열만 받습니다. 타깃 분류기 출력 y 를 재순위한 분포가
곧 학습 목표이므로 데이터셋 라벨은 필요하지 않습니다.
"""

import logging
import math
from typing import Iterator, Optional

import numpy as np
import pandas as pd

from config.settings import ATN_TRAINING
from src.adversary.atn import Atn, apply_atn
from src.adversary.losses import loss_terms
from src.autodiff import functional as F
from src.autodiff.optim import Adam
from src.autodiff.tensor import Tensor, backward
from src.data_io.mnist import LabeledDataset, iterate_batches
from src.errors import ContractError, NumericalError

logger = logging.getLogger(__name__)

LOG_COLUMNS = ['step', 'total', 'input_loss', 'output_loss']


def _require_finite(value: Tensor, what: str) -> None:
    if not np.all(np.isfinite(value.data)):
        raise NumericalError(f"{what} 에 NaN/Inf 가 있습니다")


def steps_for_epochs(n_images: int, epochs: int, batch: int) -> int:
    """epoch 수 -> optimizer step 수 (마지막 부분 배치 포함)"""
    return epochs * math.ceil(n_images / batch)


def _batch_stream(n: int, batch: int, seed: int) -> Iterator[np.ndarray]:
    epoch = 0
    while True:
        yield from iterate_batches(n, batch, seed + epoch)
        epoch += 1


def _target_probs(target, x: Tensor) -> np.ndarray:
    """y = softmax(f(x)), 재순위 검증을 위해 float64 로 계산"""
    logits = target.forward(x).data.astype(np.float64)
    return F.softmax(Tensor(logits, dtype=np.float64)).data


def train_atn(atn: Atn, images: np.ndarray, steps: int, batch: int = ATN_TRAINING['BATCH'],
              seed: int = 0, optimizer: Optional[Adam] = None,
              log_every: int = ATN_TRAINING['LOG_EVERY']) -> pd.DataFrame:
    """
    ATN 본체 파라미터만 갱신하며 β·L2(x′, x) + Σ L2(y′, r(y, t)) 최소화

    Args:
        atn: 타깃 분류기(들)가 config.targets 에 들어있는 ATN
        images: N×28×28×1 이미지 배열 (라벨 없음)
        steps: optimizer step 수

    Returns:
        step 별 total / input_loss / output_loss DataFrame
    """
    if isinstance(images, LabeledDataset):
        raise ContractError("train_atn 은 라벨 없는 이미지 배열만 받습니다 (dataset.images 전달)")
    targets = atn.config.targets
    if not targets:
        raise ContractError(f"{atn.name}: 타깃 네트워크가 하나 이상 필요합니다")
    unfrozen = [net.name for net in targets if not net.frozen]
    if unfrozen:
        raise ContractError(f"{atn.name}: 타깃 네트워크가 frozen 상태가 아닙니다: {unfrozen}")
    if atn.body.frozen:
        raise ContractError(f"{atn.name}: ATN 본체가 frozen 상태입니다")

    images = np.asarray(images, dtype=np.float32)
    if len(images) == 0 and steps > 0:
        raise ContractError("빈 이미지 집합으로는 학습할 수 없습니다")

    cfg = atn.config
    optimizer = optimizer or Adam(lr=ATN_TRAINING['LR'])
    params = atn.body.parameters()
    batches = _batch_stream(len(images), batch, seed)
    rows = []

    logger.info(f"🚀 {atn.name} 학습 시작: targets={[t.name for t in targets]}, beta={cfg.beta}, steps={steps}")
    for step in range(1, steps + 1):
        x = Tensor(images[next(batches)])
        ys = [_target_probs(target, x) for target in targets]
        acts = targets[0].penultimate(x).data if cfg.insider else None

        x_prime = apply_atn(atn, x, acts)
        _require_finite(x_prime, f"{atn.name}: step {step} 의 x′")
        logits = [target.forward(x_prime) for target in targets]
        for target, out in zip(targets, logits):
            _require_finite(out, f"{atn.name}: step {step} 의 {target.name} logits")
        pairs = [(F.softmax(out), y) for out, y in zip(logits, ys)]
        terms = loss_terms(x, x_prime, pairs, cfg.beta, cfg.target_class, cfg.alpha, cfg.rerank)

        if not np.isfinite(terms.total.data):
            raise NumericalError(f"{atn.name}: step {step} 에서 loss 가 {terms.total.item()} 입니다")
        backward(terms.total)
        optimizer.step(params)

        row = {'step': step, **terms.as_floats()}
        rows.append(row)
        if log_every and step % log_every == 0:
            logger.info(
                f"📊 {atn.name} step {step}/{steps}: total={row['total']:.5f} "
                f"L_X={row['input_loss']:.5f} L_Y={row['output_loss']:.5f}"
            )

    logger.info(f"✅ {atn.name} 학습 완료 ({steps} steps)")
    return pd.DataFrame(rows, columns=LOG_COLUMNS)
