"""Binary checkpoint format: roundtrip, layout, rejection of bad files."""

import struct

import numpy as np
import pytest

from nshd.checkpoint import (
    CheckpointFormatError,
    read_checkpoint,
    write_checkpoint,
)

from conftest import make_random_field


def test_roundtrip(tmp_path):
    u = make_random_field(seed=41, N=16)
    path = tmp_path / "state.nshd"
    write_checkpoint(path, u, alpha=1.25, nu=0.5, seed=41)
    back, meta = read_checkpoint(path)
    np.testing.assert_array_equal(back.coeffs, u.coeffs)
    assert back.time == u.time
    assert (meta.alpha, meta.nu, meta.seed) == (1.25, 0.5, 41)


def test_layout_by_hand(tmp_path):
    # parse the header and first coefficient with struct, independently
    u = make_random_field(seed=42, N=8, band=(1, 2))
    path = tmp_path / "state.nshd"
    write_checkpoint(path, u, alpha=1.0, nu=2.0, seed=7)
    raw = path.read_bytes()
    magic, version, n, N, alpha, nu, time, seed = struct.unpack_from(
        "<4sBBIdddQ", raw
    )
    assert magic == b"NSHD" and version == 1
    assert (n, N) == (2, 8)
    assert (alpha, nu, time, seed) == (1.0, 2.0, 0.0, 7)
    header_size = struct.calcsize("<4sBBIdddQ")
    assert len(raw) == header_size + 2 * 8 * 8 * 16
    # flat row-major FFT order: coefficient at flat index 9 is mode (1, 1)
    re, im = struct.unpack_from("<dd", raw, header_size + 9 * 16)
    assert re + 1j * im == u.coeffs[0].reshape(-1)[9]


def test_reject_bad_magic(tmp_path):
    u = make_random_field(seed=43, N=8, band=(1, 2))
    path = tmp_path / "state.nshd"
    write_checkpoint(path, u, alpha=1.0, nu=1.0)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"JUNK"
    bad = tmp_path / "bad.nshd"
    bad.write_bytes(bytes(raw))
    with pytest.raises(CheckpointFormatError, match="magic"):
        read_checkpoint(bad)


def test_reject_bad_version(tmp_path):
    u = make_random_field(seed=44, N=8, band=(1, 2))
    path = tmp_path / "state.nshd"
    write_checkpoint(path, u, alpha=1.0, nu=1.0)
    raw = bytearray(path.read_bytes())
    raw[4] = 99
    bad = tmp_path / "bad.nshd"
    bad.write_bytes(bytes(raw))
    with pytest.raises(CheckpointFormatError, match="version"):
        read_checkpoint(bad)


def test_reject_truncated_body(tmp_path):
    u = make_random_field(seed=45, N=8, band=(1, 2))
    path = tmp_path / "state.nshd"
    write_checkpoint(path, u, alpha=1.0, nu=1.0)
    raw = path.read_bytes()
    bad = tmp_path / "bad.nshd"
    bad.write_bytes(raw[:-8])
    with pytest.raises(CheckpointFormatError, match="body"):
        read_checkpoint(bad)
