"""
src/networks/training.py

분류기 학습 (softmax cross-entropy + Adam) 과 정확도 평가
"""

import logging
from typing import Optional

import numpy as np
import pandas as pd

from config.settings import CLASSIFIER_TRAINING, EVALUATION
from src.autodiff import functional as F
from src.autodiff.optim import Adam
from src.autodiff.tensor import Tensor, backward
from src.data_io.mnist import LabeledDataset, iterate_batches
from src.errors import ContractError, NumericalError
from src.networks.network import Network, predict_proba

logger = logging.getLogger(__name__)

LOG_COLUMNS = ['epoch', 'loss', 'train_accuracy', 'test_accuracy']


def train_classifier(net: Network, data: LabeledDataset, epochs: int = CLASSIFIER_TRAINING['EPOCHS'],
                     batch: int = CLASSIFIER_TRAINING['BATCH'], seed: int = 0,
                     optimizer: Optional[Adam] = None, test_data: Optional[LabeledDataset] = None) -> pd.DataFrame:
    """
    cross-entropy 최소화로 분류기 학습

    Returns:
        epoch 별 평균 loss / train 정확도 / test 정확도 DataFrame
    """
    if net.frozen:
        raise ContractError(f"{net.name}: frozen 네트워크는 학습할 수 없습니다")
    if len(data) == 0:
        raise ContractError("빈 데이터셋으로는 학습할 수 없습니다")

    optimizer = optimizer or Adam(lr=CLASSIFIER_TRAINING['LR'])
    params = net.parameters()
    rows = []

    for epoch in range(1, epochs + 1):
        losses, correct = [], 0
        for idx in iterate_batches(len(data), batch, seed + epoch):
            logits = net.forward(Tensor(data.images[idx]))
            if not np.all(np.isfinite(logits.data)):
                raise NumericalError(f"{net.name}: epoch {epoch} 에서 logits 에 NaN/Inf 가 있습니다")
            loss = F.softmax_cross_entropy(logits, data.labels[idx])
            if not np.isfinite(loss.data):
                raise NumericalError(f"{net.name}: epoch {epoch} 에서 loss 가 {loss.item()} 입니다")
            backward(loss)
            optimizer.step(params)
            losses.append(loss.item())
            correct += int((logits.data.argmax(axis=1) == data.labels[idx]).sum())

        row = {
            'epoch': epoch,
            'loss': float(np.mean(losses)),
            'train_accuracy': correct / len(data),
            'test_accuracy': evaluate_accuracy(net, test_data) if test_data is not None else np.nan,
        }
        rows.append(row)
        logger.info(
            f"📈 {net.name} epoch {epoch}/{epochs}: loss={row['loss']:.4f} "
            f"train={row['train_accuracy']:.2%} test={row['test_accuracy']:.2%}"
        )

    return pd.DataFrame(rows, columns=LOG_COLUMNS)


def evaluate_accuracy(net, data: LabeledDataset, batch: int = EVALUATION['BATCH']) -> float:
    """argmax(softmax(forward)) == label 비율 (동점은 낮은 클래스 번호)"""
    if data is None or len(data) == 0:
        raise ContractError("빈 데이터셋은 평가할 수 없습니다")
    probs = predict_proba(net, data.images, batch)
    return float((probs.argmax(axis=1) == data.labels).mean())
