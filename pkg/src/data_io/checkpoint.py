"""
src/data_io/checkpoint.py

Network 체크포인트 저장/복원

파일 구조 (little endian):
    '<4sHII'  magic b'ATNF', 포맷 버전, JSON 길이, 파라미터 수
    JSON      {"spec": ..., "metadata": ...} (sort_keys)
    파라미터   '<H' 이름 길이, 이름, '<B' dtype 바이트 수, '<B' ndim, '<I'×ndim, raw 배열
    '<Q'      앞의 모든 바이트에 대한 blake2b-64 checksum
"""

import hashlib
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from src.autodiff.tensor import Tensor
from src.errors import CheckpointCorruptionError, CheckpointVersionError
from src.networks.network import Network, param_shapes
from src.networks.specs import NetworkSpec

logger = logging.getLogger(__name__)

MAGIC = b'ATNF'
FORMAT_VERSION = 1
_HEADER = struct.Struct('<4sHII')
_CHECKSUM = struct.Struct('<Q')
_DTYPES = {4: np.dtype('<f4'), 8: np.dtype('<f8')}


@dataclass
class Checkpoint:
    """디스크의 체크포인트 내용"""
    spec: NetworkSpec
    params: Dict[str, np.ndarray]
    version: int = FORMAT_VERSION
    checksum: int = 0
    metadata: Dict[str, Any] = field(default_factory=dict)


def _checksum(payload: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), 'little')


def _encode(spec: NetworkSpec, params: Dict[str, np.ndarray], metadata: Dict[str, Any]) -> bytes:
    meta = json.dumps({'spec': spec.to_dict(), 'metadata': metadata}, sort_keys=True).encode('utf-8')
    chunks = [_HEADER.pack(MAGIC, FORMAT_VERSION, len(meta), len(params)), meta]
    for name, array in params.items():
        dtype = _DTYPES[8] if array.dtype == np.float64 else _DTYPES[4]
        encoded = name.encode('utf-8')
        chunks.append(struct.pack('<H', len(encoded)) + encoded)
        chunks.append(struct.pack('<BB', dtype.itemsize, array.ndim))
        chunks.append(struct.pack(f'<{array.ndim}I', *array.shape))
        chunks.append(np.ascontiguousarray(array, dtype=dtype).tobytes())
    payload = b''.join(chunks)
    return payload + _CHECKSUM.pack(_checksum(payload))


def serialize(net: Network, path: Union[str, Path], metadata: Optional[Dict[str, Any]] = None) -> Path:
    """Network -> 체크포인트 파일"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blob = _encode(net.spec, {name: p.data for name, p in net.params.items()}, metadata or {})
    with open(path, 'wb') as f:
        f.write(blob)
    logger.info(f"💾 체크포인트 저장: {path.name} ({len(blob):,} bytes)")
    return path


def read_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """checksum -> magic -> 버전 순으로 검증 후 파싱"""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size + _CHECKSUM.size:
        raise CheckpointCorruptionError(f"{path}: 파일이 너무 짧습니다 ({len(raw)} bytes)")

    payload, stored = raw[:-_CHECKSUM.size], _CHECKSUM.unpack(raw[-_CHECKSUM.size:])[0]
    if _checksum(payload) != stored:
        raise CheckpointCorruptionError(f"{path}: checksum 불일치")

    magic, version, meta_len, n_params = _HEADER.unpack_from(payload, 0)
    if magic != MAGIC:
        raise CheckpointCorruptionError(f"{path}: 체크포인트 파일이 아닙니다 (magic={magic!r})")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"{path}: 포맷 버전 {version} (지원: {FORMAT_VERSION})")

    try:
        pos = _HEADER.size
        meta = json.loads(payload[pos:pos + meta_len].decode('utf-8'))
        pos += meta_len
        params: Dict[str, np.ndarray] = {}
        for _ in range(n_params):
            (name_len,) = struct.unpack_from('<H', payload, pos)
            pos += 2
            name = payload[pos:pos + name_len].decode('utf-8')
            pos += name_len
            itemsize, ndim = struct.unpack_from('<BB', payload, pos)
            pos += 2
            shape = struct.unpack_from(f'<{ndim}I', payload, pos)
            pos += 4 * ndim
            dtype = _DTYPES[itemsize]
            count = int(np.prod(shape))
            params[name] = np.frombuffer(payload, dtype=dtype, count=count, offset=pos).reshape(shape).copy()
            pos += count * itemsize
        spec = NetworkSpec.from_dict(meta['spec'])
    except (struct.error, KeyError, ValueError, UnicodeDecodeError) as e:
        raise CheckpointCorruptionError(f"{path}: 내용 파싱 실패 ({e})") from e

    return Checkpoint(spec, params, version, stored, meta.get('metadata', {}))


def deserialize(path: Union[str, Path]) -> Network:
    """체크포인트 파일 -> Network (파라미터 bit-exact 복원)"""
    ckpt = read_checkpoint(path)
    return network_from_checkpoint(ckpt, path)


def network_from_checkpoint(ckpt: Checkpoint, path: Union[str, Path] = '<memory>') -> Network:
    expected = param_shapes(ckpt.spec)
    actual = {name: tuple(a.shape) for name, a in ckpt.params.items()}
    if expected != actual:
        raise CheckpointCorruptionError(f"{path}: 파라미터 shape 가 명세와 다릅니다")
    params = {
        name: Tensor(array, requires_grad=True, dtype=array.dtype.newbyteorder('='))
        for name, array in ckpt.params.items()
    }
    return Network(ckpt.spec, params)
