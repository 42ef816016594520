"""Raw raster + sidecar header round-trips."""

import numpy as np
import pytest

import altruist as alt
from altruist.errors import InvalidArgumentError
from altruist.field import DisplacementField
from altruist.rasters import (frame_meta, read_displacement, read_frame,
                              read_raster, read_strain, write_displacement,
                              write_frame, write_raster, write_strain)
from conftest import speckle_frame


def test_raster_round_trip(tmp_path):
    array = np.arange(12.0).reshape(3, 4)
    path = tmp_path / "grid.raw"
    write_raster(path, array, {"sampling_rate_hz": 40e6})
    back, meta = read_raster(path)
    np.testing.assert_array_equal(back, array)
    assert meta["sampling_rate_hz"] == 40e6
    assert (tmp_path / "grid.hdr").exists()


def test_raw_payload_is_little_endian_float32(tmp_path):
    array = np.array([[1.5, -2.0], [0.25, 3.0]])
    path = tmp_path / "grid.raw"
    write_raster(path, array)
    raw = np.frombuffer(path.read_bytes(), dtype="<f4")
    np.testing.assert_array_equal(raw, array.ravel().astype("<f4"))


def test_frame_round_trip(tmp_path):
    frame = speckle_frame(8, 6, seed=1)
    frame = alt.RfFrame(frame.samples, 40e6, 7.27e6, 1.925e-5, 3e-4)
    path = tmp_path / "pre.raw"
    write_frame(path, frame)
    back = read_frame(path)
    np.testing.assert_allclose(back.samples, frame.samples, atol=1e-6)
    assert back.sampling_rate == 40e6
    assert back.center_frequency == 7.27e6


def test_frame_requires_metadata(tmp_path):
    path = tmp_path / "bare.raw"
    write_raster(path, np.zeros((4, 4)))
    with pytest.raises(InvalidArgumentError):
        read_frame(path)


def test_displacement_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    field = DisplacementField(rng.standard_normal(2 * 6 * 5) * 0.01, 6, 5)
    path = tmp_path / "disp.raw"
    write_displacement(path, field)
    back, _ = read_displacement(path)
    assert (back.m, back.n) == (6, 5)
    np.testing.assert_allclose(back.values, field.values, atol=1e-8)


def test_strain_round_trip(tmp_path):
    strain = alt.strain_from_displacement(DisplacementField.zeros(8, 4), 3)
    path = tmp_path / "strain.raw"
    write_strain(path, strain, frame_meta(speckle_frame(8, 4)))
    back, _ = read_strain(path)
    np.testing.assert_array_equal(back.values, strain.values)


def test_unknown_header_key_rejected(tmp_path):
    path = tmp_path / "grid.raw"
    write_raster(path, np.zeros((4, 4)))
    hdr = tmp_path / "grid.hdr"
    hdr.write_text(hdr.read_text() + "color purple\n")
    with pytest.raises(InvalidArgumentError):
        read_raster(path)


def test_size_mismatch_rejected(tmp_path):
    path = tmp_path / "grid.raw"
    write_raster(path, np.zeros((4, 4)))
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(InvalidArgumentError):
        read_raster(path)


def test_missing_header(tmp_path):
    path = tmp_path / "orphan.raw"
    path.write_bytes(b"\x00" * 16)
    with pytest.raises(FileNotFoundError):
        read_raster(path)
