"""
src/experiments/fgsm.py

목표(targeted) fast gradient sign 기준선

    x′ = clip(x − ε · sign(∂CE(f(x), t)/∂x), −1, 1)

자동미분 파이프라인이 입력 gradient 까지 제대로 흐르는지 확인하는 용도입니다.
"""

import logging

import numpy as np

from config.settings import EVALUATION
from src.autodiff import functional as F
from src.autodiff.tensor import Tensor, backward
from src.data_io.mnist import LabeledDataset
from src.errors import ContractError
from src.experiments.metrics import EvalReport, require_frozen, score_classifier
from src.networks.network import Network

logger = logging.getLogger(__name__)


def fgsm(classifier: Network, x: np.ndarray, t: int, eps: float) -> np.ndarray:
    """배치 x 전체를 목표 클래스 t 쪽으로 한 걸음 이동"""
    if eps < 0:
        raise ContractError(f"eps 는 0 이상이어야 합니다: {eps}")
    x = np.asarray(x, dtype=np.float32)
    if eps == 0 or len(x) == 0:
        return x.copy()

    xt = Tensor(x, requires_grad=True)
    loss = F.softmax_cross_entropy(classifier.forward(xt), np.full(len(x), t))
    backward(loss)
    if not classifier.frozen:
        for p in classifier.parameters().values():
            p.zero_grad()

    step = np.sign(xt.grad).astype(x.dtype)
    return np.clip(x - np.float32(eps) * step, -1.0, 1.0)


def fgsm_images(classifier: Network, images: np.ndarray, t: int, eps: float,
                batch: int = EVALUATION['BATCH']) -> np.ndarray:
    images = np.asarray(images, dtype=np.float32)
    if len(images) == 0:
        return images.copy()
    return np.concatenate([fgsm(classifier, images[s:s + batch], t, eps)
                           for s in range(0, len(images), batch)], axis=0)


def fgsm_report(classifier: Network, data: LabeledDataset, t: int, eps: float = EVALUATION['FGSM_EPSILON'],
                batch: int = EVALUATION['BATCH']) -> EvalReport:
    """ATN 리포트와 같은 형식 (beta 컬럼에는 eps 를 기록)"""
    require_frozen([classifier])
    x_prime = fgsm_images(classifier, data.images, t, eps, batch)
    report = score_classifier(classifier, data, x_prime, t, 'fgsm', eps, batch)
    logger.info(f"📊 fgsm eps={eps} t={t} vs {classifier.name}: top1={report.top1_target_rate:.2%}")
    return report
