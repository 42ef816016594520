"""Raw-float raster files with text sidecar headers.

Every raster is stored as raw little-endian 32-bit floats in row-major
(axial-major) order, next to a ``.hdr`` sidecar holding one ``key value`` pair
per line.  Header keys: ``rows``, ``cols``, ``sampling_rate_hz``,
``center_frequency_hz``, ``axial_spacing_m``, ``lateral_spacing_m``.
Displacement rasters reuse the format with ``cols`` equal to twice the lateral
line count (interleaved axial/lateral per sample); strain rasters are plain
``rows x cols`` grids.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .field import DisplacementField, RfFrame, StrainImage

HEADER_KEYS = (
    "rows",
    "cols",
    "sampling_rate_hz",
    "center_frequency_hz",
    "axial_spacing_m",
    "lateral_spacing_m",
)

_META_KEYS = HEADER_KEYS[2:]


def header_path(path) -> Path:
    return Path(path).with_suffix(".hdr")


def atomic_write_bytes(path, payload: bytes) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_raster(path, array, meta: dict | None = None) -> None:
    """Write a 2-D array as raw '<f4' plus its sidecar header."""
    array = np.asarray(array, dtype=float)
    if array.ndim != 2:
        raise InvalidArgumentError(f"raster must be 2-D, got shape {array.shape}")
    meta = dict(meta or {})
    rows, cols = array.shape
    lines = [f"rows {rows}", f"cols {cols}"]
    for key in _META_KEYS:
        if key in meta and meta[key] is not None:
            lines.append(f"{key} {float(meta[key]):.17g}")
    atomic_write_bytes(path, array.astype("<f4").tobytes())
    atomic_write_bytes(header_path(path), ("\n".join(lines) + "\n").encode())


def read_raster(path):
    """Read a raw raster; returns ``(array, meta)`` with float64 values."""
    path = Path(path)
    hdr = header_path(path)
    if not hdr.exists():
        raise FileNotFoundError(f"missing sidecar header {hdr}")
    meta: dict = {}
    for line in hdr.read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        key, _, value = line.partition(" ")
        if key not in HEADER_KEYS:
            raise InvalidArgumentError(f"unknown header key {key!r} in {hdr}")
        meta[key] = value.strip()
    try:
        rows = int(meta.pop("rows"))
        cols = int(meta.pop("cols"))
    except KeyError as exc:
        raise InvalidArgumentError(f"header {hdr} lacks required key {exc}") from None
    meta = {key: float(val) for key, val in meta.items()}
    raw = np.frombuffer(path.read_bytes(), dtype="<f4")
    if raw.size != rows * cols:
        raise InvalidArgumentError(
            f"{path}: expected {rows * cols} float32 samples, found {raw.size}"
        )
    return raw.astype(float).reshape(rows, cols), meta


def frame_meta(frame: RfFrame) -> dict:
    return {
        "sampling_rate_hz": frame.sampling_rate,
        "center_frequency_hz": frame.center_frequency,
        "axial_spacing_m": frame.axial_spacing,
        "lateral_spacing_m": frame.lateral_spacing,
    }


def write_frame(path, frame: RfFrame) -> None:
    write_raster(path, frame.samples, frame_meta(frame))


def read_frame(path) -> RfFrame:
    array, meta = read_raster(path)
    missing = [key for key in _META_KEYS if key not in meta]
    if missing:
        raise InvalidArgumentError(f"{header_path(path)} lacks frame metadata keys {missing}")
    return RfFrame(
        samples=array,
        sampling_rate=meta["sampling_rate_hz"],
        center_frequency=meta["center_frequency_hz"],
        axial_spacing=meta["axial_spacing_m"],
        lateral_spacing=meta["lateral_spacing_m"],
    )


def write_displacement(path, disp: DisplacementField, meta: dict | None = None) -> None:
    write_raster(path, disp.values.reshape(disp.m, 2 * disp.n), meta)


def read_displacement(path) -> tuple[DisplacementField, dict]:
    array, meta = read_raster(path)
    rows, cols = array.shape
    if cols % 2:
        raise InvalidArgumentError(
            f"{path}: displacement raster needs an even column count, got {cols}"
        )
    return DisplacementField(array.ravel(), rows, cols // 2), meta


def write_strain(path, strain: StrainImage, meta: dict | None = None) -> None:
    write_raster(path, strain.values, meta)


def read_strain(path, kernel_length: int = 3) -> tuple[StrainImage, dict]:
    array, meta = read_raster(path)
    return StrainImage(array, kernel_length), meta
