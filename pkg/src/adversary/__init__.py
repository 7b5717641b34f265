"""
적대적 변환 모듈
src/adversary/__init__.py

재순위 함수, ATN 손실, 두 가지 생성 방식(P-ATN / AAE), 자기지도 학습을 제공합니다.
"""

from .atn import (
    Atn, AtnConfig, GenerationMode, apply_atn, build_atn, generate, insider_activations, load_atn, save_atn,
)
from .losses import LossTerms, loss_terms, loss_y, total_loss
from .rerank import RerankMode, RerankTarget, rerank, rerank_batch, rerank_onehot, rerank_targets
from .training import steps_for_epochs, train_atn

__all__ = [
    'Atn', 'AtnConfig', 'GenerationMode', 'build_atn', 'apply_atn', 'generate', 'insider_activations',
    'save_atn', 'load_atn',
    'LossTerms', 'loss_y', 'loss_terms', 'total_loss',
    'RerankMode', 'RerankTarget', 'rerank', 'rerank_batch', 'rerank_onehot', 'rerank_targets',
    'train_atn', 'steps_for_epochs',
]
