"""
src/data_io/mnist.py

MNIST IDX 파일 로드와 픽셀 정규화

IDX 포맷 (big endian):
    i32 | magic (이미지 0x00000803, 라벨 0x00000801)
    i32 | 차원별 크기 ...
    u8[] | 데이터 (row-major)
"""

import gzip
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Union

import numpy as np

from config.settings import DATA_DIR, IMAGE_SHAPE, MNIST_FILES, NUM_CLASSES
from src.errors import ContractError, DatasetConsistencyError, DatasetFormatError, TruncatedFileError

logger = logging.getLogger(__name__)

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049
SPLITS = ('train', 'test')

PathLike = Union[str, Path]


def normalize_pixels(raw: np.ndarray) -> np.ndarray:
    """바이트 0~255 -> [-1, 1] (v / 127.5 - 1)"""
    return (np.asarray(raw, dtype=np.float32) / np.float32(127.5) - np.float32(1.0)).astype(np.float32)


def denormalize_pixels(values: np.ndarray) -> np.ndarray:
    """[-1, 1] -> 바이트 (반올림 half-up, 범위 밖은 잘라냄)"""
    scaled = (np.asarray(values, dtype=np.float64) + 1.0) * 127.5
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


@dataclass
class LabeledDataset:
    """이미지(N×28×28×1, [-1,1]) + 라벨(N, 0~9)"""
    images: np.ndarray
    labels: np.ndarray
    split: str = 'train'

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.images) != len(self.labels):
            raise DatasetConsistencyError(f"이미지 {len(self.images)}개 / 라벨 {len(self.labels)}개 불일치")
        if self.split not in SPLITS:
            raise ContractError(f"split 은 train|test 여야 합니다: {self.split}")
        if self.images.size and (self.images.min() < -1.0 or self.images.max() > 1.0):
            raise ContractError("픽셀 값은 [-1, 1] 범위여야 합니다")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= NUM_CLASSES):
            raise ContractError("라벨은 0~9 범위여야 합니다")

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, indices) -> 'LabeledDataset':
        indices = np.asarray(indices)
        return LabeledDataset(self.images[indices], self.labels[indices], self.split)

    def take(self, n: int) -> 'LabeledDataset':
        return self.subset(np.arange(min(n, len(self))))


def _read_bytes(path: PathLike) -> bytes:
    path = Path(path)
    opener = gzip.open if path.suffix == '.gz' else open
    with opener(path, 'rb') as f:
        return f.read()


def read_idx(path: PathLike, expected_magic: int) -> np.ndarray:
    """IDX 파일 하나를 uint8 배열로 읽기"""
    raw = _read_bytes(path)
    if len(raw) < 4:
        raise TruncatedFileError(f"{path}: 헤더가 잘렸습니다 ({len(raw)} bytes)")

    magic = int(np.frombuffer(raw, dtype='>u4', count=1)[0])
    if magic != expected_magic:
        raise DatasetFormatError(f"{path}: magic {magic} (기대값 {expected_magic})")

    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise TruncatedFileError(f"{path}: 차원 헤더가 잘렸습니다")
    dims = tuple(int(d) for d in np.frombuffer(raw, dtype='>u4', count=ndim, offset=4))
    expected = int(np.prod(dims))
    if len(raw) - header < expected:
        raise TruncatedFileError(f"{path}: 데이터 {len(raw) - header} bytes (필요 {expected} bytes)")

    return np.frombuffer(raw, dtype=np.uint8, count=expected, offset=header).reshape(dims)


def write_idx(path: PathLike, array: np.ndarray) -> Path:
    """uint8 배열을 IDX 파일로 저장 (테스트 fixture, 데이터 가공용)"""
    array = np.asarray(array, dtype=np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    magic = 0x0800 | array.ndim
    header = np.array([magic, *array.shape], dtype='>u4').tobytes()
    opener = gzip.open if path.suffix == '.gz' else open
    with opener(path, 'wb') as f:
        f.write(header + array.tobytes())
    return path


def load_mnist(images_path: PathLike, labels_path: PathLike, split: str = 'train') -> LabeledDataset:
    """IDX 이미지/라벨 파일 쌍 -> LabeledDataset"""
    raw_images = read_idx(images_path, IMAGE_MAGIC)
    raw_labels = read_idx(labels_path, LABEL_MAGIC)
    if len(raw_images) != len(raw_labels):
        raise DatasetConsistencyError(
            f"이미지 {len(raw_images)}개 / 라벨 {len(raw_labels)}개 불일치 ({images_path}, {labels_path})"
        )

    images = normalize_pixels(raw_images).reshape(len(raw_images), *raw_images.shape[1:], 1)
    if images.shape[1:] != IMAGE_SHAPE:
        logger.warning(f"⚠️ 이미지 shape {images.shape[1:]} 가 기본값 {IMAGE_SHAPE} 와 다릅니다")
    dataset = LabeledDataset(images, raw_labels, split)
    logger.info(f"📊 MNIST {split} 로드 완료: {len(dataset):,}개")
    return dataset


def resolve_mnist_file(root: PathLike, key: str) -> Path:
    """압축 안 된 파일 우선, 없으면 .gz"""
    base = Path(root) / MNIST_FILES[key]
    gz = base.with_name(base.name + '.gz')
    return gz if not base.exists() and gz.exists() else base


def load_mnist_split(split: str, root: Optional[PathLike] = None) -> LabeledDataset:
    root = Path(root or DATA_DIR)
    prefix = 'TRAIN' if split == 'train' else 'TEST'
    return load_mnist(resolve_mnist_file(root, f'{prefix}_IMAGES'),
                      resolve_mnist_file(root, f'{prefix}_LABELS'), split)


def shuffled_indices(n: int, seed: int) -> np.ndarray:
    """seed 가 같으면 같은 순열"""
    return np.random.default_rng(seed).permutation(n)


def iterate_batches(n: int, batch: int, seed: int) -> Iterator[np.ndarray]:
    """한 epoch 분량의 셔플된 배치 인덱스"""
    if batch < 1:
        raise ContractError(f"batch 는 1 이상이어야 합니다: {batch}")
    order = shuffled_indices(n, seed)
    for start in range(0, n, batch):
        yield order[start:start + batch]
