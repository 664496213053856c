"""Map and camera data model plus the pixel-pair difference machinery.

Conventions used throughout the package:

* Images are indexed ``[row, col]`` = ``[v, u]`` with ``u`` growing right and
  ``v`` growing down.  Flat pixel indices are row-major (``v * width + u``).
* Depth is the distance along the camera optical axis (the Z coordinate in
  the camera frame), not the Euclidean ray length.
* The camera frame is the standard computer-vision frame: X right, Y down,
  Z forward.  ``PinholeCamera.rotation/translation`` map world points into
  that frame.
* Invalid pixels store a quiet-NaN sentinel that no operation reads.

All types are immutable after construction (arrays are frozen read-only)
and all operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyMask,
    InvalidEndpoint,
    NonPositiveDepth,
)

DEFAULT_DILATIONS = (1, 2, 4, 8, 16, 32, 64)


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SegMask:
    """Boolean per-pixel object region."""

    values: np.ndarray  # (H, W) bool

    def __post_init__(self):
        v = np.asarray(self.values, dtype=bool)
        if v.ndim != 2:
            raise DimensionMismatch(f"mask must be 2-D, got shape {v.shape}")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def count(self) -> int:
        return int(self.values.sum())


@dataclass(frozen=True)
class DepthMap:
    """Per-pixel optical-axis depth in meters with a validity mask.

    Valid pixels are positive and finite; invalid pixels are stored as NaN
    and are never read by any operation.
    """

    values: np.ndarray  # (H, W) float64
    valid: np.ndarray  # (H, W) bool

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        valid = np.asarray(self.valid, dtype=bool)
        if values.ndim != 2 or values.shape != valid.shape:
            raise DimensionMismatch(
                f"depth {values.shape} and validity {valid.shape} must be equal 2-D shapes"
            )
        sel = values[valid]
        if sel.size and not (np.all(np.isfinite(sel)) and np.all(sel > 0.0)):
            raise NonPositiveDepth("valid pixels must have finite depth > 0")
        values = values.copy()
        values[~valid] = np.nan
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "valid", _frozen(valid))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class XyzMap:
    """Per-pixel 3D coordinates (meters) with a validity mask.

    Equivalent to an organized point cloud; carries no camera information.
    """

    coords: np.ndarray  # (H, W, 3) float64
    valid: np.ndarray  # (H, W) bool

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        valid = np.asarray(self.valid, dtype=bool)
        if coords.ndim != 3 or coords.shape[2] != 3 or coords.shape[:2] != valid.shape:
            raise DimensionMismatch(
                f"coords {coords.shape} must be (H, W, 3) matching mask {valid.shape}"
            )
        if not np.all(np.isfinite(coords[valid])):
            raise NonPositiveDepth("valid pixels must have finite coordinates")
        coords = coords.copy()
        coords[~valid] = np.nan
        object.__setattr__(self, "coords", _frozen(coords))
        object.__setattr__(self, "valid", _frozen(valid))

    @property
    def height(self) -> int:
        return self.coords.shape[0]

    @property
    def width(self) -> int:
        return self.coords.shape[1]

    def points(self, mask: "SegMask | None" = None) -> np.ndarray:
        """Valid pixels as an (N, 3) array, optionally restricted to a mask."""
        sel = self.valid if mask is None else (self.valid & mask.values)
        return self.coords[sel]

    def shifted(self, offset) -> "XyzMap":
        """New map translated by a constant per-axis offset."""
        off = np.asarray(offset, dtype=np.float64).reshape(3)
        coords = self.coords.copy()
        coords[self.valid] += off
        return XyzMap(coords, self.valid)


@dataclass(frozen=True)
class PinholeCamera:
    """Pinhole intrinsics plus a rigid world-to-camera transform.

    ``rotation @ p_world + translation`` gives camera-frame coordinates.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")
        r = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if r.shape != (3, 3):
            raise DimensionMismatch("rotation must be 3x3")
        if np.max(np.abs(r @ r.T - np.eye(3))) > 1e-9 or abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValueError("rotation must be orthonormal with determinant +1")
        object.__setattr__(self, "rotation", _frozen(r))
        object.__setattr__(self, "translation", _frozen(t))

    @property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates."""
        return -self.rotation.T @ self.translation

    def world_to_camera(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def camera_to_world(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return (pts - self.translation) @ self.rotation


@dataclass(frozen=True)
class PairSet:
    """Pixel pairs (flat row-major indices) produced by dilated enumeration.

    The ordering is deterministic: ascending dilation, horizontal pairs
    before vertical, row-major within each block.  Within a pair the first
    pixel is the left/top one, so differences are signed consistently.
    """

    first: np.ndarray  # (N,) int64 flat indices
    second: np.ndarray  # (N,) int64 flat indices
    dilations: tuple
    shape: tuple  # (H, W) of the originating mask
    axis_count: int = 3

    def __post_init__(self):
        a = np.asarray(self.first, dtype=np.int64)
        b = np.asarray(self.second, dtype=np.int64)
        if a.shape != b.shape or a.ndim != 1:
            raise DimensionMismatch("pair index arrays must be equal-length 1-D")
        object.__setattr__(self, "first", _frozen(a))
        object.__setattr__(self, "second", _frozen(b))
        object.__setattr__(self, "dilations", tuple(int(d) for d in self.dilations))
        object.__setattr__(self, "shape", (int(self.shape[0]), int(self.shape[1])))

    def __len__(self) -> int:
        return int(self.first.shape[0])


def default_dilations(height: int, width: int) -> tuple:
    """Powers-of-two dilation ladder clipped to the image extent."""
    return tuple(d for d in DEFAULT_DILATIONS if d < max(height, width))


def depth_to_xyz(depth: DepthMap, camera: PinholeCamera) -> XyzMap:
    """Back-project a depth map into camera-frame XYZ coordinates.

    X = (u - cx) * Z / fx, Y = (v - cy) * Z / fy, Z = depth(v, u), so the
    result is expressed in the camera frame regardless of the camera pose.
    Validity is preserved pixel-for-pixel.
    """
    if (depth.height, depth.width) != (camera.height, camera.width):
        raise DimensionMismatch(
            f"depth {depth.height}x{depth.width} vs camera {camera.height}x{camera.width}"
        )
    us = np.arange(depth.width, dtype=np.float64)
    vs = np.arange(depth.height, dtype=np.float64)
    uu, vv = np.meshgrid(us, vs)
    z = depth.values
    coords = np.empty((depth.height, depth.width, 3), dtype=np.float64)
    coords[..., 0] = (uu - camera.cx) * z / camera.fx
    coords[..., 1] = (vv - camera.cy) * z / camera.fy
    coords[..., 2] = z
    return XyzMap(coords, depth.valid)


def xyz_to_depth(xyz: XyzMap, camera: PinholeCamera) -> DepthMap:
    """Project a camera-frame XYZ map back to its depth channel (Z).

    Inverse of :func:`depth_to_xyz` on valid pixels; the round trip is the
    identity to floating-point precision.
    """
    if (xyz.height, xyz.width) != (camera.height, camera.width):
        raise DimensionMismatch(
            f"xyz {xyz.height}x{xyz.width} vs camera {camera.height}x{camera.width}"
        )
    z = xyz.coords[..., 2]
    sel = z[xyz.valid]
    if sel.size and not np.all(sel > 0.0):
        raise NonPositiveDepth("all valid pixels must have Z > 0")
    return DepthMap(z, xyz.valid)


def build_pair_set(mask: SegMask, dilations=None) -> PairSet:
    """Enumerate all in-mask pixel pairs (p, p + d) per dilation and direction.

    For each dilation d the horizontal pairs are (v, u)-(v, u+d) and the
    vertical pairs are (v, u)-(v+d, u), both endpoints inside the mask.
    A dilation larger than the mask extent simply contributes no pairs.
    """
    if mask.count == 0:
        raise EmptyMask("cannot build pairs over an empty mask")
    if dilations is None:
        dilations = default_dilations(mask.height, mask.width)
    dil = [int(d) for d in dilations]
    if any(d <= 0 for d in dil) or any(b <= a for a, b in zip(dil, dil[1:])):
        raise ValueError(f"dilations must be positive and strictly increasing: {dil}")

    h, w = mask.height, mask.width
    m = mask.values
    flat = np.arange(h * w, dtype=np.int64).reshape(h, w)
    firsts, seconds = [], []
    for d in dil:
        if d < w:
            both = m[:, : w - d] & m[:, d:]
            firsts.append(flat[:, : w - d][both])
            seconds.append(flat[:, d:][both])
        if d < h:
            both = m[: h - d, :] & m[d:, :]
            firsts.append(flat[: h - d, :][both])
            seconds.append(flat[d:, :][both])
    if firsts:
        first = np.concatenate(firsts)
        second = np.concatenate(seconds)
    else:
        first = np.empty(0, dtype=np.int64)
        second = np.empty(0, dtype=np.int64)
    return PairSet(first, second, tuple(dil), (h, w))


def pair_differences(xyz: XyzMap, pairs: PairSet) -> np.ndarray:
    """Signed per-axis coordinate differences over a pair set.

    Returns an (N, 3) array with row i holding coords(first_i) - coords(second_i)
    for the X, Y, Z axes.  Differences are kept signed here; consumers apply
    absolute values where they need them.
    """
    if pairs.shape != (xyz.height, xyz.width):
        raise DimensionMismatch(
            f"pair set built for {pairs.shape}, map is {(xyz.height, xyz.width)}"
        )
    flat_valid = xyz.valid.reshape(-1)
    if len(pairs) and not (
        np.all(flat_valid[pairs.first]) and np.all(flat_valid[pairs.second])
    ):
        raise InvalidEndpoint("pair set references invalid pixels")
    flat = xyz.coords.reshape(-1, 3)
    return flat[pairs.first] - flat[pairs.second]
