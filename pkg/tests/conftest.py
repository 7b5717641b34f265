"""
공용 pytest fixture

실제 MNIST 없이 돌아가도록 절차적으로 만든 합성 숫자 이미지와
작은 네트워크 명세를 제공합니다.
"""

import os
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# 프로젝트 루트를 Python 경로에 추가
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from config.settings import DATA_DIR, MNIST_FILES  # noqa: E402
from src.autodiff.optim import Adam  # noqa: E402
from src.data_io.mnist import LabeledDataset, write_idx  # noqa: E402
from src.networks.network import build_network  # noqa: E402
from src.networks.specs import FLATTEN, NetworkSpec, conv, fc, reshape  # noqa: E402
from src.networks.training import train_classifier  # noqa: E402

settings.register_profile('ci', max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile('dev', max_examples=30, deadline=None)
settings.load_profile(os.getenv('HYPOTHESIS_PROFILE', 'dev'))


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: 실제 MNIST 로 전체 실험을 돌리는 느린 테스트')


def synthetic_digits(n: int, seed: int = 0) -> LabeledDataset:
    """
    클래스 c 마다 가로 막대 위치가 다른 28x28 이미지

    배경 -1, 막대 +1, 약간의 잡음. 작은 분류기도 몇 epoch 만에 구분합니다.
    """
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % 10
    rng.shuffle(labels)
    images = np.full((n, 28, 28, 1), -1.0, dtype=np.float32)
    for i, c in enumerate(labels):
        top = 2 + 2 * int(c)
        images[i, top:top + 3, 4:24, 0] = 1.0
    images += rng.normal(0.0, 0.05, images.shape).astype(np.float32)
    return LabeledDataset(np.clip(images, -1.0, 1.0), labels, 'train')


TINY_CLASSIFIER = NetworkSpec(
    'classifier_tiny', 'classifier',
    (conv(3, 4, 2), conv(3, 4, 2), FLATTEN, fc(16, 'relu'), fc(10)),
    seed=7,
)

TINY_ATN = NetworkSpec(
    'atn_tiny', 'atn',
    (FLATTEN, fc(32, 'relu'), fc(784, 'tanh'), reshape(28, 28, 1)),
    seed=3,
)


@pytest.fixture
def digits() -> LabeledDataset:
    return synthetic_digits(200, seed=0)


@pytest.fixture
def digits_test() -> LabeledDataset:
    data = synthetic_digits(100, seed=1)
    return LabeledDataset(data.images, data.labels, 'test')


@pytest.fixture
def tiny_classifier():
    return build_network(TINY_CLASSIFIER)


@pytest.fixture(scope='session')
def trained_tiny_classifier():
    """합성 데이터로 학습한 frozen 분류기 (세션 공유, 읽기 전용)"""
    net = build_network(TINY_CLASSIFIER)
    train_classifier(net, synthetic_digits(300, seed=5), epochs=3, batch=32, seed=0, optimizer=Adam(lr=3e-3))
    return net.freeze()


@pytest.fixture
def mnist_dir(tmp_path) -> Path:
    """합성 데이터를 MNIST IDX 파일 4개로 저장한 디렉토리"""
    root = tmp_path / 'mnist'
    for prefix, data in (('TRAIN', synthetic_digits(120, seed=2)), ('TEST', synthetic_digits(60, seed=3))):
        raw = np.floor((data.images[..., 0] + 1.0) * 127.5 + 0.5).clip(0, 255).astype(np.uint8)
        write_idx(root / MNIST_FILES[f'{prefix}_IMAGES'], raw)
        write_idx(root / MNIST_FILES[f'{prefix}_LABELS'], data.labels.astype(np.uint8))
    return root


def real_mnist_available() -> bool:
    return all((DATA_DIR / name).exists() or (DATA_DIR / f'{name}.gz').exists() for name in MNIST_FILES.values())
