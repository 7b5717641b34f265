"""
프로젝트 기본 설정

이 파일은 프로젝트 전체에서 사용하는 기본 설정들을 관리합니다.
실험 설정 파일(INI)에 값이 없으면 여기 값이 기본값으로 쓰입니다.
"""

import os
from pathlib import Path

# 프로젝트 루트 디렉토리
ROOT_DIR = Path(__file__).parent.parent

# 데이터 디렉토리 (환경변수에서 읽기)
DATA_DIR = Path(os.getenv('ATNFORGE_DATA', str(ROOT_DIR / 'data' / 'mnist')))
OUTPUT_DIR = Path(os.getenv('ATNFORGE_OUTPUT', str(ROOT_DIR / 'runs' / 'default')))

# MNIST IDX 파일 이름 (.gz 압축본도 자동 인식)
MNIST_FILES = {
    'TRAIN_IMAGES': 'train-images-idx3-ubyte',
    'TRAIN_LABELS': 'train-labels-idx1-ubyte',
    'TEST_IMAGES': 't10k-images-idx3-ubyte',
    'TEST_LABELS': 't10k-labels-idx1-ubyte',
}

IMAGE_SHAPE = (28, 28, 1)
NUM_CLASSES = 10

# 출력 디렉토리 구조 (테스트 하네스가 찾을 수 있도록 고정)
OUTPUT_LAYOUT = {
    'CHECKPOINTS': 'checkpoints',
    'REPORTS': 'reports',
    'GRIDS': 'grids',
    'LOGS': 'logs',
}

# Adam 기본값 (분류기 학습)
ADAM_DEFAULTS = {
    'LR': 1e-3,
    'BETA1': 0.9,
    'BETA2': 0.999,
    'EPSILON': 1e-8,
}

# 분류기 학습 기본 설정
CLASSIFIER_TRAINING = {
    'NAMES': ['classifier_p'],
    'EPOCHS': 10,
    'BATCH': 64,
    'LR': 1e-3,
}

# ATN 학습 기본 설정
ATN_TRAINING = {
    'ARCHITECTURES': ['a'],
    'MODE': 'autoencode',
    'TARGETS': list(range(10)),
    'TARGET_CLASSIFIERS': ['classifier_p'],
    'ALPHA': 1.5,
    'BETAS': [0.010, 0.005, 0.001],
    'EPOCHS': 5,
    'BATCH': 64,
    'LR': 1e-4,
    'INSIDER': False,
    'RERANK': 'rank_preserving',
    'PERTURBATION_INIT_SCALE': 0.01,
    'LOG_EVERY': 100,
}

# 평가 기본 설정
EVALUATION = {
    'CLASSIFIER': 'classifier_p',
    'TRANSFER_CLASSIFIERS': [
        'classifier_p', 'classifier_a0', 'classifier_a1', 'classifier_a2', 'classifier_a3',
    ],
    'CHAIN_ARCHITECTURE': 'c',
    'CHAIN_BETA': 0.005,
    'CHAIN_IMAGES': 1000,
    'FGSM_EPSILON': 0.25,
    'BATCH': 500,
    'REPORT_FORMATS': ['csv', 'json'],
    'DECIMALS': 4,
}

# 로깅 설정
LOGGING = {
    'LEVEL': os.getenv('ATNFORGE_LOG_LEVEL', 'INFO'),
    'FORMAT': '%(asctime)s - %(levelname)s - %(message)s',
    'FILE_NAME': 'run.log',
}

# CLI 종료 코드
EXIT_CODES = {
    'OK': 0,
    'CONFIG_ERROR': 2,
    'NUMERICAL_ERROR': 3,
}
