"""Shared fixtures and oracle helpers for the test suite.

The oracles here deliberately recompute results by direct enumeration
(python loops over pixels/pairs/triangles) so they stay independent of the
vectorized paths they check.  Final reductions use np.mean/np.sum on arrays
collected in the library's documented element order, which is what makes
bit-identical comparisons meaningful.
"""

from __future__ import annotations

import math

import numpy as np

from vesselxyz import DepthMap, PinholeCamera, SegMask, TriMesh, XyzMap


# ── random data builders ─────────────────────────────────────────────────

def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_camera(rng: np.random.Generator, width=32, height=24) -> PinholeCamera:
    return PinholeCamera(
        fx=float(rng.uniform(50, 500)),
        fy=float(rng.uniform(50, 500)),
        cx=float(rng.uniform(0, width - 1)),
        cy=float(rng.uniform(0, height - 1)),
        width=width,
        height=height,
        rotation=random_rotation(rng),
        translation=rng.uniform(-1, 1, 3),
    )


def random_depth(rng: np.random.Generator, height, width, holes=0.0) -> DepthMap:
    values = rng.uniform(0.2, 5.0, (height, width))
    valid = rng.uniform(size=(height, width)) >= holes
    if not valid.any():
        valid[0, 0] = True
    return DepthMap(values, valid)


def random_xyz(rng: np.random.Generator, height, width, scale=2.0, holes=0.0) -> XyzMap:
    coords = rng.uniform(-scale, scale, (height, width, 3))
    valid = rng.uniform(size=(height, width)) >= holes
    return XyzMap(coords, valid)


def random_mask(rng: np.random.Generator, height, width, density=0.5) -> SegMask:
    m = rng.uniform(size=(height, width)) < density
    if not m.any():
        m[rng.integers(height), rng.integers(width)] = True
    return SegMask(m)


def dyadic_xyz(rng: np.random.Generator, height, width) -> XyzMap:
    """Random map on a dyadic grid, so adding small dyadic offsets is exact.

    Values are k * 2**-18 with k < 2**20; sums with offsets of the form
    m * 2**-10 (|m| < 2**12) stay exactly representable in float64, which
    makes translation invariance testable as bit equality.
    """
    k = rng.integers(0, 2**20, (height, width, 3))
    return XyzMap(k.astype(np.float64) * 2.0**-18, np.ones((height, width), bool))


def dyadic_offset(rng: np.random.Generator) -> np.ndarray:
    return rng.integers(-(2**12), 2**12, 3).astype(np.float64) * 2.0**-10


# ── naive oracles: geometry ──────────────────────────────────────────────

def oracle_pair_list(mask: SegMask, dilations) -> list:
    """Direct scan of the mask for (p, p+d) pairs, in the documented order."""
    h, w = mask.height, mask.width
    m = mask.values
    out = []
    for d in dilations:
        for r in range(h):
            for c in range(w - d):
                if m[r, c] and m[r, c + d]:
                    out.append((r * w + c, r * w + c + d))
        for r in range(h - d):
            for c in range(w):
                if m[r, c] and m[r + d, c]:
                    out.append((r * w + c, (r + d) * w + c))
    return out


# ── naive oracles: losses ────────────────────────────────────────────────
# Enumeration runs over plain python floats (identical IEEE semantics to
# numpy float64 element ops) so a thousand-case sweep stays fast; only the
# final reduction reuses np.mean, applied to terms collected in the same
# (pair-major, axis-minor) order the library documents.

def _pair_terms(pred: XyzMap, gt: XyzMap, pairs):
    fp = pred.coords.reshape(-1, 3).tolist()
    fg = gt.coords.reshape(-1, 3).tolist()
    out = []
    for a, b in zip(pairs.first.tolist(), pairs.second.tolist()):
        pa, pb, ga, gb = fp[a], fp[b], fg[a], fg[b]
        for ax in range(3):
            out.append((ga[ax] - gb[ax], pa[ax] - pb[ax]))
    return out


def oracle_translation_invariant(pred, gt, pairs) -> float:
    terms = [abs(dg - dp) for dg, dp in _pair_terms(pred, gt, pairs)]
    return float(np.mean(np.array(terms)))


def oracle_scale_factor(pred, gt, pairs) -> float:
    nums, dens = [], []
    for dg, dp in _pair_terms(pred, gt, pairs):
        if dg * dp > 0.0:
            nums.append(abs(dg))
            dens.append(abs(dp))
    return float(np.mean(np.array(nums))) / float(np.mean(np.array(dens)))


def oracle_scale_invariant(pred, gt, pairs) -> float:
    k = oracle_scale_factor(pred, gt, pairs)
    terms = [abs(dg - k * dp) for dg, dp in _pair_terms(pred, gt, pairs)]
    value = float(np.mean(np.array(terms)))
    if k > 10.0:
        return value + k
    if k < 0.1:
        return value - k
    return value


# ── naive oracles: metrics ───────────────────────────────────────────────

def masked_point_list(m: XyzMap, mask: SegMask) -> list:
    """Row-major scan of masked pixels, as plain [x, y, z] float lists."""
    coords = m.coords.tolist()
    mv = mask.values.tolist()
    return [
        coords[r][c]
        for r in range(mask.height)
        for c in range(mask.width)
        if mv[r][c]
    ]


def oracle_mae(pred, gt, mask) -> float:
    dists = []
    for p, g in zip(masked_point_list(pred, mask), masked_point_list(gt, mask)):
        dx, dy, dz = g[0] - p[0], g[1] - p[1], g[2] - p[2]
        dists.append(math.sqrt((dx * dx + dy * dy) + dz * dz))
    return float(np.mean(np.array(dists)))


def oracle_mad(gt, mask) -> float:
    pts = masked_point_list(gt, mask)
    cx, cy, cz = (float(v) for v in np.mean(np.array(pts), axis=0))
    dists = []
    for p in pts:
        dx, dy, dz = p[0] - cx, p[1] - cy, p[2] - cz
        dists.append(math.sqrt((dx * dx + dy * dy) + dz * dz))
    return float(np.mean(np.array(dists)))


def oracle_max_dst(gt, mask) -> float:
    pts = masked_point_list(gt, mask)
    best = 0.0
    for i, a in enumerate(pts):
        ax, ay, az = a
        for b in pts[i + 1 :]:
            d = ((ax - b[0]) ** 2 + (ay - b[1]) ** 2) + (az - b[2]) ** 2
            if d > best:
                best = d
    return math.sqrt(best)


def oracle_r_squared(pred, gt, mask) -> float:
    g = np.array(masked_point_list(gt, mask))
    p = np.array(masked_point_list(pred, mask))
    centroid = np.mean(g, axis=0)
    rss = float(np.sum(np.sum((g - p) ** 2, axis=-1)))
    tss = float(np.sum(np.sum((g - centroid) ** 2, axis=-1)))
    return 1.0 - rss / tss


def oracle_chamfer(a_pts, b_pts) -> float:
    a = np.asarray(a_pts, dtype=np.float64)
    b = np.asarray(b_pts, dtype=np.float64)
    fwd = [min(math.dist(x, y) for y in a) for x in b]
    bwd = [min(math.dist(x, y) for y in b) for x in a]
    return float(np.mean(fwd) + np.mean(bwd))


# ── icosphere for renderer tests ─────────────────────────────────────────

def icosphere(subdivisions: int = 4, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> TriMesh:
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    verts = [np.array(v, dtype=np.float64) / np.linalg.norm(v) for v in verts]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    for _ in range(subdivisions):
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    vertices = np.array(verts) * radius + np.asarray(center, dtype=np.float64)
    return TriMesh(vertices, np.array(faces, dtype=np.int64), "content")
