"""
MNIST IDX / PGM 격자 / 체크포인트 입출력 테스트
"""

import gzip
import hashlib
import struct

import numpy as np
import pytest

from config.settings import MNIST_FILES
from src.autodiff import precision
from src.data_io import (
    LabeledDataset, denormalize_pixels, deserialize, iterate_batches, load_mnist, load_mnist_split,
    normalize_pixels, read_checkpoint, read_pgm, save_image_grid, serialize, shuffled_indices, write_idx,
)
from src.data_io.checkpoint import FORMAT_VERSION, MAGIC
from src.errors import (
    CheckpointCorruptionError, CheckpointVersionError, ContractError, DatasetConsistencyError, DatasetFormatError,
    TruncatedFileError,
)
from src.networks import build_network

from conftest import TINY_ATN, TINY_CLASSIFIER


def _write_pair(root, n_images=5, n_labels=5, gz=False):
    suffix = '.gz' if gz else ''
    rng = np.random.default_rng(0)
    images = write_idx(root / f'img{suffix}', rng.integers(0, 256, (n_images, 28, 28)))
    labels = write_idx(root / f'lbl{suffix}', rng.integers(0, 10, n_labels))
    return images, labels


class TestIdx:
    def test_load_shapes_and_range(self, tmp_path):
        dataset = load_mnist(*_write_pair(tmp_path))
        assert dataset.images.shape == (5, 28, 28, 1)
        assert dataset.images.dtype == np.float32
        assert dataset.images.min() >= -1.0 and dataset.images.max() <= 1.0
        assert len(dataset) == 5

    def test_gzip_files(self, tmp_path):
        plain = load_mnist(*_write_pair(tmp_path))
        gz = load_mnist(*_write_pair(tmp_path, gz=True))
        np.testing.assert_array_equal(plain.images, gz.images)

    def test_wrong_magic(self, tmp_path):
        images, labels = _write_pair(tmp_path)
        with pytest.raises(DatasetFormatError):
            load_mnist(labels, images)

    def test_truncated_data(self, tmp_path):
        images, labels = _write_pair(tmp_path)
        images.write_bytes(images.read_bytes()[:-10])
        with pytest.raises(TruncatedFileError):
            load_mnist(images, labels)

    def test_truncated_header(self, tmp_path):
        images, labels = _write_pair(tmp_path)
        images.write_bytes(images.read_bytes()[:6])
        with pytest.raises(TruncatedFileError):
            load_mnist(images, labels)

    def test_count_mismatch(self, tmp_path):
        with pytest.raises(DatasetConsistencyError):
            load_mnist(*_write_pair(tmp_path, n_images=5, n_labels=4))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_mnist(tmp_path / 'nope', tmp_path / 'nada')

    def test_split_loader_reads_standard_names(self, mnist_dir):
        train = load_mnist_split('train', mnist_dir)
        test = load_mnist_split('test', mnist_dir)
        assert (len(train), len(test)) == (120, 60)
        assert test.split == 'test'

    def test_split_loader_falls_back_to_gz(self, tmp_path, mnist_dir):
        for key in ('TEST_IMAGES', 'TEST_LABELS'):
            raw = (mnist_dir / MNIST_FILES[key]).read_bytes()
            write_path = tmp_path / 'gz' / f'{MNIST_FILES[key]}.gz'
            write_path.parent.mkdir(exist_ok=True)
            write_path.write_bytes(gzip.compress(raw))
        assert len(load_mnist_split('test', tmp_path / 'gz')) == 60


class TestPixels:
    def test_normalize_endpoints(self):
        out = normalize_pixels(np.array([0, 255], dtype=np.uint8))
        np.testing.assert_array_equal(out, [-1.0, 1.0])
        assert normalize_pixels(np.array([128]))[0] == pytest.approx(128 / 127.5 - 1)

    def test_denormalize_round_trips_bytes(self):
        raw = np.arange(256, dtype=np.uint8)
        np.testing.assert_array_equal(denormalize_pixels(normalize_pixels(raw)), raw)

    def test_denormalize_clips(self):
        np.testing.assert_array_equal(denormalize_pixels(np.array([-3.0, 3.0])), [0, 255])

    def test_dataset_validates_range_and_labels(self):
        with pytest.raises(ContractError):
            LabeledDataset(np.full((1, 28, 28, 1), 2.0), [0])
        with pytest.raises(ContractError):
            LabeledDataset(np.zeros((1, 28, 28, 1)), [10])
        with pytest.raises(DatasetConsistencyError):
            LabeledDataset(np.zeros((2, 28, 28, 1)), [0])


class TestShuffle:
    def test_same_seed_same_order(self):
        np.testing.assert_array_equal(shuffled_indices(50, 3), shuffled_indices(50, 3))
        assert not np.array_equal(shuffled_indices(50, 3), shuffled_indices(50, 4))

    def test_batches_cover_everything_once(self):
        batches = list(iterate_batches(23, 5, seed=1))
        assert [len(b) for b in batches] == [5, 5, 5, 5, 3]
        assert sorted(np.concatenate(batches)) == list(range(23))

    def test_bad_batch(self):
        with pytest.raises(ContractError):
            list(iterate_batches(10, 0, seed=1))


class TestPgm:
    def test_single_black_image(self, tmp_path):
        path = save_image_grid([np.full((28, 28, 1), -1.0)], 1, 1, tmp_path / 'one.pgm')
        raw = path.read_bytes()
        assert raw.startswith(b'P5\n28 28\n255\n')
        assert len(raw) == len(b'P5\n28 28\n255\n') + 28 * 28
        assert not np.any(read_pgm(path))

    def test_ten_by_ten_grid(self, tmp_path, digits):
        images = list(digits.images[:100])
        grid = read_pgm(save_image_grid(images, 10, 10, tmp_path / 'grid.pgm'))
        assert grid.shape == (280, 280)
        np.testing.assert_array_equal(grid[28:56, 56:84], denormalize_pixels(images[12][..., 0]))

    def test_empty_cells_are_black(self, tmp_path, digits):
        grid = read_pgm(save_image_grid([digits.images[0], None], 2, 2, tmp_path / 'sparse.pgm'))
        assert grid.shape == (56, 56)
        assert not np.any(grid[:, 28:]) and not np.any(grid[28:, :])

    def test_values_round_half_up(self, tmp_path):
        image = np.full((2, 2), 0.0)
        grid = read_pgm(save_image_grid([image], 1, 1, tmp_path / 'mid.pgm'))
        assert np.all(grid == 128)

    def test_too_many_images(self, tmp_path, digits):
        with pytest.raises(ContractError):
            save_image_grid(list(digits.images[:5]), 2, 2, tmp_path / 'x.pgm')

    def test_not_a_pgm(self, tmp_path):
        path = tmp_path / 'x.pgm'
        path.write_bytes(b'P2\n1 1\n255\n0')
        with pytest.raises(DatasetFormatError):
            read_pgm(path)


class TestCheckpoint:
    def test_round_trip_is_bit_exact(self, tmp_path, tiny_classifier):
        path = serialize(tiny_classifier, tmp_path / 'clf.ckpt', metadata={'test_accuracy': 0.5})
        restored = deserialize(path)
        assert restored.spec == tiny_classifier.spec
        for name, p in tiny_classifier.params.items():
            assert restored.params[name].data.dtype == p.data.dtype
            np.testing.assert_array_equal(restored.params[name].data, p.data)
        assert read_checkpoint(path).metadata == {'test_accuracy': 0.5}

    def test_float64_parameters_survive(self, tmp_path):
        with precision(np.float64):
            net = build_network(TINY_ATN)
        restored = deserialize(serialize(net, tmp_path / 'f64.ckpt'))
        assert all(p.data.dtype == np.float64 for p in restored.params.values())

    def test_serialize_is_byte_deterministic(self, tmp_path, tiny_classifier):
        a = serialize(tiny_classifier, tmp_path / 'a.ckpt').read_bytes()
        b = serialize(deserialize(tmp_path / 'a.ckpt'), tmp_path / 'b.ckpt').read_bytes()
        assert a == b

    def test_restored_network_gives_same_outputs(self, tmp_path, tiny_classifier, digits):
        restored = deserialize(serialize(tiny_classifier, tmp_path / 'clf.ckpt'))
        x = digits.images[:6]
        np.testing.assert_array_equal(restored(x).data, tiny_classifier(x).data)

    @pytest.mark.parametrize('offset', [0, 20, -3])
    def test_any_flipped_byte_is_detected(self, tmp_path, tiny_classifier, offset):
        path = serialize(tiny_classifier, tmp_path / 'clf.ckpt')
        raw = bytearray(path.read_bytes())
        raw[offset] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(CheckpointCorruptionError):
            read_checkpoint(path)

    def test_truncated_file(self, tmp_path):
        path = tmp_path / 'short.ckpt'
        path.write_bytes(b'ATNF')
        with pytest.raises(CheckpointCorruptionError):
            read_checkpoint(path)

    def test_future_version_rejected(self, tmp_path, tiny_classifier):
        path = serialize(tiny_classifier, tmp_path / 'clf.ckpt')
        payload = bytearray(path.read_bytes()[:-8])
        struct.pack_into('<4sH', payload, 0, MAGIC, FORMAT_VERSION + 1)
        digest = hashlib.blake2b(bytes(payload), digest_size=8).digest()
        path.write_bytes(bytes(payload) + struct.pack('<Q', int.from_bytes(digest, 'little')))
        with pytest.raises(CheckpointVersionError):
            read_checkpoint(path)

    def test_spec_survives_for_every_kind(self, tmp_path):
        net = build_network(TINY_CLASSIFIER.with_seed(42))
        assert deserialize(serialize(net, tmp_path / 'x.ckpt')).spec.seed == 42
