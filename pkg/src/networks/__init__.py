"""
네트워크 모듈
src/networks/__init__.py

분류기 5종과 ATN 본체 3종의 선언적 명세, 생성, 학습, 평가를 제공합니다.
"""

from .network import Network, build_network, forward, infer_shapes, penultimate, predict_proba
from .specs import CLASSIFIER_SPECS, LayerKind, LayerSpec, NetworkSpec, atn_body_spec, format_layer, parse_layer
from .training import evaluate_accuracy, train_classifier

__all__ = [
    'Network', 'NetworkSpec', 'LayerSpec', 'LayerKind', 'CLASSIFIER_SPECS', 'atn_body_spec',
    'build_network', 'forward', 'penultimate', 'predict_proba', 'infer_shapes',
    'format_layer', 'parse_layer', 'train_classifier', 'evaluate_accuracy',
]
