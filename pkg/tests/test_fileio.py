import struct

import numpy as np
import pytest

from ttmri import ComplexTensor3, DataFormatError, KSpaceVector, SamplingSpec, forward
from ttmri.fileio import (
    dump_frames_pgm,
    load_kspace,
    load_mask,
    load_tensor,
    load_transform_matrix,
    save_kspace,
    save_mask,
    save_tensor,
    save_transform_matrix,
)

from conftest import rand_tensor, random_unitary


class TestTensorFormat:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        x = rand_tensor(rng, (3, 4, 5))
        path = tmp_path / "x.t2t"
        save_tensor(path, x)
        back = load_tensor(path)
        assert back.dims == x.dims
        assert np.array_equal(back.slices, x.slices)

    def test_header_layout(self, tmp_path):
        x = ComplexTensor3.zeros((2, 3, 4))
        path = tmp_path / "x.t2t"
        save_tensor(path, x)
        raw = path.read_bytes()
        assert raw[:4] == b"T2T1"
        n1, n2, n3 = struct.unpack_from("<III", raw, 4)
        assert (n1, n2, n3) == (2, 3, 4)
        assert raw[16] == 0  # complex double tag
        assert len(raw) == 17 + 2 * 3 * 4 * 16

    def test_payload_is_storage_order(self, tmp_path):
        # Raw payload equals the documented flat layout: slice-major,
        # row-major within a slice, interleaved re/im little-endian.
        rng = np.random.default_rng(1)
        x = rand_tensor(rng, (2, 3, 2))
        path = tmp_path / "x.t2t"
        save_tensor(path, x)
        payload = path.read_bytes()[17:]
        expected = x.slices.ravel().astype("<c16").tobytes()
        assert payload == expected

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.t2t"
        path.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(DataFormatError):
            load_tensor(path)

    def test_truncated_payload(self, tmp_path):
        x = ComplexTensor3.zeros((2, 2, 2))
        path = tmp_path / "x.t2t"
        save_tensor(path, x)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(DataFormatError):
            load_tensor(path)

    def test_unknown_dtype_tag(self, tmp_path):
        path = tmp_path / "x.t2t"
        header = struct.pack("<4sIIIB", b"T2T1", 1, 1, 1, 7)
        path.write_bytes(header + bytes(16))
        with pytest.raises(DataFormatError):
            load_tensor(path)

    def test_mask_tag_rejected_as_tensor(self, tmp_path):
        spec = SamplingSpec(np.ones((2, 3, 3), dtype=bool))
        path = tmp_path / "m.t2t"
        save_mask(path, spec)
        with pytest.raises(DataFormatError):
            load_tensor(path)


class TestMaskFormat:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(2)
        mask = rng.random((4, 5, 6)) < 0.4
        path = tmp_path / "m.t2t"
        save_mask(path, SamplingSpec(mask))
        assert np.array_equal(load_mask(path), mask)

    def test_plain_array_accepted(self, tmp_path):
        mask = np.zeros((2, 3, 3), dtype=bool)
        mask[0, 1, 2] = True
        path = tmp_path / "m.t2t"
        save_mask(path, mask)
        assert np.array_equal(load_mask(path), mask)

    def test_header_dims_are_logical(self, tmp_path):
        # Header carries (nx, ny, nt) while the payload is frame-major.
        mask = np.zeros((4, 2, 3), dtype=bool)
        path = tmp_path / "m.t2t"
        save_mask(path, mask)
        raw = path.read_bytes()
        assert struct.unpack_from("<III", raw, 4) == (2, 3, 4)
        assert raw[16] == 1

    def test_non_binary_payload_rejected(self, tmp_path):
        path = tmp_path / "m.t2t"
        header = struct.pack("<4sIIIB", b"T2T1", 1, 1, 1, 1)
        path.write_bytes(header + bytes([3]))
        with pytest.raises(DataFormatError):
            load_mask(path)

    def test_tensor_tag_rejected_as_mask(self, tmp_path):
        path = tmp_path / "x.t2t"
        save_tensor(path, ComplexTensor3.zeros((1, 1, 1)))
        with pytest.raises(DataFormatError):
            load_mask(path)


class TestKSpaceFormat:
    def test_roundtrip_with_sidecar(self, tmp_path):
        rng = np.random.default_rng(3)
        spec = SamplingSpec(rng.random((2, 4, 4)) < 0.5)
        b = KSpaceVector(
            rng.standard_normal(spec.m) + 1j * rng.standard_normal(spec.m), spec
        )
        path = tmp_path / "b.t2k"
        save_kspace(path, b, mask_path="masks/m.t2t")
        values, mask_path = load_kspace(path)
        assert np.array_equal(values, b.values)
        assert mask_path == "masks/m.t2t"

    def test_no_sidecar(self, tmp_path):
        spec = SamplingSpec(np.ones((1, 2, 2), dtype=bool))
        b = KSpaceVector(np.arange(4, dtype=complex), spec)
        path = tmp_path / "b.t2k"
        save_kspace(path, b)
        values, mask_path = load_kspace(path)
        assert np.array_equal(values, b.values)
        assert mask_path is None

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "b.t2k"
        path.write_bytes(b"XXXX" + bytes(8))
        with pytest.raises(DataFormatError):
            load_kspace(path)

    def test_count_mismatch(self, tmp_path):
        path = tmp_path / "b.t2k"
        path.write_bytes(struct.pack("<4sQ", b"T2K1", 3) + bytes(16))
        with pytest.raises(DataFormatError):
            load_kspace(path)

    def test_values_in_raster_order(self, tmp_path):
        rng = np.random.default_rng(4)
        spec = SamplingSpec(rng.random((2, 4, 3)) < 0.6)
        x = rand_tensor(rng, spec.dims)
        b = forward(x, spec)
        path = tmp_path / "b.t2k"
        save_kspace(path, b)
        values, _ = load_kspace(path)
        rebuilt = KSpaceVector(values, spec)
        assert np.array_equal(rebuilt.values, b.values)


class TestTransformMatrixFormat:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(5)
        u = random_unitary(rng, 6)
        path = tmp_path / "u.t2t"
        save_transform_matrix(path, u)
        assert np.array_equal(load_transform_matrix(path), u)

    def test_multi_slice_rejected(self, tmp_path):
        path = tmp_path / "x.t2t"
        save_tensor(path, ComplexTensor3.zeros((3, 3, 2)))
        with pytest.raises(DataFormatError):
            load_transform_matrix(path)

    def test_rectangular_rejected(self, tmp_path):
        path = tmp_path / "x.t2t"
        save_tensor(path, ComplexTensor3.zeros((3, 4, 1)))
        with pytest.raises(DataFormatError):
            load_transform_matrix(path)


class TestPgm:
    def test_frame_dump(self, tmp_path):
        rng = np.random.default_rng(6)
        x = rand_tensor(rng, (5, 7, 3))
        paths = dump_frames_pgm(tmp_path / "frames", x)
        assert len(paths) == 3
        raw = paths[0].read_bytes()
        assert raw.startswith(b"P5\n7 5\n255\n")
        body = raw[len(b"P5\n7 5\n255\n") :]
        assert len(body) == 35
        # Normalisation is global: the overall maximum maps to 255.
        all_bytes = b"".join(p.read_bytes().split(b"255\n", 1)[1] for p in paths)
        assert max(all_bytes) == 255

    def test_zero_tensor(self, tmp_path):
        paths = dump_frames_pgm(tmp_path, ComplexTensor3.zeros((2, 2, 1)))
        body = paths[0].read_bytes().split(b"255\n", 1)[1]
        assert set(body) == {0}


def test_atomic_write_leaves_no_temp_files(tmp_path):
    x = ComplexTensor3.zeros((2, 2, 2))
    save_tensor(tmp_path / "x.t2t", x)
    save_tensor(tmp_path / "x.t2t", x)  # overwrite in place
    assert sorted(p.name for p in tmp_path.iterdir()) == ["x.t2t"]
