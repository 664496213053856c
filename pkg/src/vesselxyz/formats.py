"""Bit-exact file formats: PFM float maps, PGM masks, OBJ meshes.

PFM stores IEEE 754 single-precision values, so round trips are exact for
float32-representable data.  Depth maps are 1-channel "Pf" files with -inf
marking invalid pixels; XYZ maps are 3-channel "PF" files with NaN marking
invalid pixels.  In both cases the authoritative validity mask is written
alongside as ``<name>.valid.pgm``; readers use it when present and fall
back to the sentinel pattern otherwise.

Rows follow the PFM convention: bottom-to-top, little-endian (negative
scale).  PGM is binary P5, maxval 255; any value >= 128 reads as set.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import MalformedHeader, TruncatedPayload
from .geometry import DepthMap, SegMask, XyzMap
from .procgen import TriMesh

_PFM_SCALE = -1.0  # little-endian


def validity_path(path) -> Path:
    return Path(path).with_suffix(".valid.pgm")


def write_pgm(path, mask: SegMask) -> None:
    data = np.where(mask.values, 255, 0).astype(np.uint8)
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    with open(path, "wb") as f:
        f.write(header + data.tobytes())


def read_pgm(path) -> SegMask:
    with open(path, "rb") as f:
        magic = _read_token(f)
        if magic != b"P5":
            raise MalformedHeader(f"{path}: expected binary PGM magic 'P5', got {magic!r}")
        try:
            width = int(_read_token(f))
            height = int(_read_token(f))
            maxval = int(_read_token(f))
        except ValueError as e:
            raise MalformedHeader(f"{path}: non-numeric PGM header field") from e
        if maxval != 255:
            raise MalformedHeader(f"{path}: only maxval 255 is supported, got {maxval}")
        payload = f.read(width * height)
    if len(payload) < width * height:
        raise TruncatedPayload(f"{path}: expected {width * height} bytes, got {len(payload)}")
    values = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return SegMask(values >= 128)


def _read_token(f) -> bytes:
    """One whitespace-delimited header token; consumes the delimiter after it."""
    token = b""
    while True:
        c = f.read(1)
        if not c:
            raise MalformedHeader("unexpected end of file in header")
        if c.isspace():
            if token:
                return token
            continue
        token += c


def write_pfm(path, m) -> None:
    """Write a DepthMap (Pf) or XyzMap (PF) plus its validity sibling."""
    if isinstance(m, DepthMap):
        magic = b"Pf"
        data = np.where(m.valid, m.values, -np.inf).astype("<f4")
    elif isinstance(m, XyzMap):
        magic = b"PF"
        data = np.where(m.valid[..., None], m.coords, np.nan).astype("<f4")
    else:
        raise TypeError(f"write_pfm expects DepthMap or XyzMap, got {type(m).__name__}")
    header = magic + f"\n{m.width} {m.height}\n{_PFM_SCALE}\n".encode("ascii")
    with open(path, "wb") as f:
        f.write(header + np.flipud(data).tobytes())
    write_pgm(validity_path(path), SegMask(m.valid))


def _read_pfm_raw(path):
    with open(path, "rb") as f:
        magic = _read_token(f)
        if magic == b"PF":
            channels = 3
        elif magic == b"Pf":
            channels = 1
        else:
            raise MalformedHeader(f"{path}: not a PFM file (magic {magic!r})")
        try:
            width = int(_read_token(f))
            height = int(_read_token(f))
            scale = float(_read_token(f))
        except ValueError as e:
            raise MalformedHeader(f"{path}: non-numeric PFM header field") from e
        if scale == 0.0:
            raise MalformedHeader(f"{path}: zero scale")
        count = width * height * channels
        payload = f.read(count * 4)
    if len(payload) < count * 4:
        raise TruncatedPayload(f"{path}: expected {count * 4} payload bytes, got {len(payload)}")
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    shape = (height, width) if channels == 1 else (height, width, channels)
    return np.flipud(data.reshape(shape)).copy(), channels


def _sibling_validity(path, shape):
    vp = validity_path(path)
    if not os.path.exists(vp):
        return None
    mask = read_pgm(vp)
    if (mask.height, mask.width) != shape:
        raise MalformedHeader(f"{vp}: validity mask size differs from the map")
    return mask.values


def read_depth_pfm(path) -> DepthMap:
    data, channels = _read_pfm_raw(path)
    if channels != 1:
        raise MalformedHeader(f"{path}: expected 1-channel 'Pf' depth, found 3-channel 'PF'")
    valid = _sibling_validity(path, data.shape)
    if valid is None:
        valid = np.isfinite(data) & (data > 0)
    return DepthMap(data, valid)


def read_xyz_pfm(path) -> XyzMap:
    data, channels = _read_pfm_raw(path)
    if channels != 3:
        raise MalformedHeader(f"{path}: expected 3-channel 'PF' coordinates, found 'Pf'")
    valid = _sibling_validity(path, data.shape[:2])
    if valid is None:
        valid = np.all(np.isfinite(data), axis=-1)
    return XyzMap(data, valid)


def read_pfm(path):
    """Read either flavor of PFM, dispatching on the header."""
    with open(path, "rb") as f:
        magic = f.read(2)
    if magic == b"Pf":
        return read_depth_pfm(path)
    if magic == b"PF":
        return read_xyz_pfm(path)
    raise MalformedHeader(f"{path}: not a PFM file (magic {magic!r})")


def write_obj(path, mesh: TriMesh) -> None:
    """ASCII OBJ for inspection; deterministic float formatting."""
    lines = [f"# {mesh.label}: {len(mesh.vertices)} vertices, {mesh.num_triangles} triangles"]
    for x, y, z in mesh.vertices:
        lines.append(f"v {x:.17g} {y:.17g} {z:.17g}")
    for a, b, c in mesh.triangles:
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
