"""
src/data_io/pgm.py

이미지 격자를 흑백 PGM(P5) 파일로 저장/읽기
"""

import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from src.data_io.mnist import denormalize_pixels
from src.errors import ContractError, DatasetFormatError

logger = logging.getLogger(__name__)


def _as_cell(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim == 3 and image.shape[-1] == 1:
        image = image[..., 0]
    if image.ndim != 2:
        raise ContractError(f"흑백 이미지(H×W 또는 H×W×1)가 필요합니다: {image.shape}")
    return image


def save_image_grid(images: Sequence[Optional[np.ndarray]], rows: int, cols: int,
                    path: Union[str, Path]) -> Path:
    """
    이미지들을 row-major 로 타일링해 P5 파일 하나로 저장

    값은 [-1,1] -> 0~255 (반올림 half-up). 빈 칸과 None 은 검은색입니다.
    """
    images = list(images)
    if rows < 1 or cols < 1 or rows * cols < len(images):
        raise ContractError(f"{rows}x{cols} 격자에 이미지 {len(images)}개를 넣을 수 없습니다")

    cells = [None if img is None else _as_cell(img) for img in images]
    sample = next((c for c in cells if c is not None), None)
    cell_h, cell_w = sample.shape if sample is not None else (28, 28)

    canvas = np.zeros((rows * cell_h, cols * cell_w), dtype=np.uint8)
    for idx, cell in enumerate(cells):
        if cell is None:
            continue
        if cell.shape != (cell_h, cell_w):
            raise ContractError(f"격자 안 이미지 크기가 다릅니다: {cell.shape} vs {(cell_h, cell_w)}")
        r, c = divmod(idx, cols)
        canvas[r * cell_h:(r + 1) * cell_h, c * cell_w:(c + 1) * cell_w] = denormalize_pixels(cell)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = f"P5\n{canvas.shape[1]} {canvas.shape[0]}\n255\n".encode('ascii')
    with open(path, 'wb') as f:
        f.write(header + canvas.tobytes())
    logger.debug(f"🖼️ 격자 저장: {path} ({rows}x{cols})")
    return path


def read_pgm(path: Union[str, Path]) -> np.ndarray:
    """P5 파일 -> uint8 배열 (H×W)"""
    raw = Path(path).read_bytes()
    tokens, pos = [], 0
    # 헤더 토큰 4개, maxval 뒤 공백 한 글자 다음부터 픽셀
    while len(tokens) < 4 and pos < len(raw):
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    if len(tokens) < 4 or tokens[0] != b'P5':
        raise DatasetFormatError(f"{path}: P5 PGM 파일이 아닙니다")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as e:
        raise DatasetFormatError(f"{path}: 헤더 형식 오류") from e
    if maxval != 255:
        raise DatasetFormatError(f"{path}: maxval {maxval} 은 지원하지 않습니다")
    data = raw[pos + 1:]
    if len(data) < width * height:
        raise DatasetFormatError(f"{path}: 픽셀 데이터가 부족합니다")
    return np.frombuffer(data[:width * height], dtype=np.uint8).reshape(height, width)
