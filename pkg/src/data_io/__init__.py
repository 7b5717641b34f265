"""
데이터 입출력 모듈
src/data_io/__init__.py

MNIST IDX 로드, PGM 격자 저장, Network 체크포인트를 제공합니다.
"""

from .checkpoint import Checkpoint, deserialize, read_checkpoint, serialize
from .mnist import (
    LabeledDataset, denormalize_pixels, iterate_batches, load_mnist, load_mnist_split,
    normalize_pixels, shuffled_indices, write_idx,
)
from .pgm import read_pgm, save_image_grid

__all__ = [
    'LabeledDataset', 'load_mnist', 'load_mnist_split', 'write_idx', 'normalize_pixels',
    'denormalize_pixels', 'shuffled_indices', 'iterate_batches',
    'save_image_grid', 'read_pgm',
    'Checkpoint', 'serialize', 'deserialize', 'read_checkpoint',
]
