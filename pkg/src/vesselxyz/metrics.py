"""Evaluation metrics over XYZ maps, segmentation masks, and material vectors.

All 3D metrics operate on the per-pixel point sets selected by an object
mask.  Errors are reported in meters and, because absolute scale is
arbitrary for camera-agnostic predictions, normalized by two GT-side
size measures: MAD (mean distance to the object centroid) and MaxDst
(the point-set diameter).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DegenerateGT,
    DimensionMismatch,
    EmptyMask,
    EmptySet,
    InvalidEndpoint,
    TooFewPoints,
)
from .geometry import SegMask, XyzMap, build_pair_set
from .losses import MIN_SCALE_PAIRS, scale_factor

MAX_EXACT_DIAMETER_POINTS = 5000
_DIAMETER_SUBSAMPLE_SEED = 0x5EED
_TSS_FLOOR = 1e-12
IOR_PHYSICAL_RANGE = (1.0, 2.0)


@dataclass(frozen=True)
class EvalReport:
    """3D-reconstruction metrics for one object, raw and normalized."""

    mae: float
    mad: float
    max_dst: float
    mae_over_mad: float
    mae_over_maxdst: float
    chamfer: float
    chamfer_over_mad: float
    chamfer_over_maxdst: float
    r_squared: float


@dataclass(frozen=True)
class SegReport:
    """Per-object segmentation quality."""

    iou: float
    precision: float
    recall: float
    intersection: int
    union: int


@dataclass(frozen=True)
class MaterialVector:
    """Scalar material properties, all stored in [0, 1].

    IOR is normalized from its physical range [1, 2]; use ``ior_physical``
    to recover the refractive index itself.
    """

    rgb: tuple
    transmission: float
    roughness: float
    metallic: float
    ior: float

    def __post_init__(self):
        rgb = tuple(float(c) for c in self.rgb)
        if len(rgb) != 3:
            raise DimensionMismatch("rgb must have exactly 3 components")
        object.__setattr__(self, "rgb", rgb)
        for name in ("transmission", "roughness", "metallic", "ior"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
            object.__setattr__(self, name, v)
        if any(not 0.0 <= c <= 1.0 for c in rgb):
            raise ValueError(f"rgb {rgb} outside [0, 1]")

    @property
    def ior_physical(self) -> float:
        lo, hi = IOR_PHYSICAL_RANGE
        return lo + self.ior * (hi - lo)

    @classmethod
    def with_physical_ior(cls, rgb, transmission, roughness, metallic, ior_physical):
        lo, hi = IOR_PHYSICAL_RANGE
        return cls(rgb, transmission, roughness, metallic, (ior_physical - lo) / (hi - lo))


@dataclass(frozen=True)
class MaterialErrors:
    """Per-property mean absolute errors (color averaged over RGB)."""

    transmission: float
    color: float
    roughness: float
    metallic: float
    ior: float


def _masked_points(xyz: XyzMap, mask: SegMask) -> np.ndarray:
    if (xyz.height, xyz.width) != (mask.height, mask.width):
        raise DimensionMismatch("map and mask sizes differ")
    if mask.count == 0:
        raise EmptyMask("metric mask is empty")
    if not np.all(xyz.valid[mask.values]):
        raise InvalidEndpoint("mask covers invalid pixels")
    return xyz.coords[mask.values]


def _norms(d: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(d * d, axis=-1))


def mae_points(pred: XyzMap, gt: XyzMap, mask: SegMask) -> float:
    """Mean Euclidean distance between same-pixel predicted and GT points."""
    p = _masked_points(pred, mask)
    g = _masked_points(gt, mask)
    return float(np.mean(_norms(g - p)))


def mad(gt: XyzMap, mask: SegMask) -> float:
    """Mean distance from each masked GT point to the GT centroid."""
    g = _masked_points(gt, mask)
    centroid = np.mean(g, axis=0)
    return float(np.mean(_norms(g - centroid)))


def max_dst(gt: XyzMap, mask: SegMask) -> float:
    """Diameter of the masked GT point set (max pairwise distance).

    Exact up to MAX_EXACT_DIAMETER_POINTS points; larger sets are reduced to
    a deterministic seeded subsample first, which makes the result a lower
    bound on the true diameter.
    """
    g = _masked_points(gt, mask)
    if len(g) < 2:
        raise TooFewPoints("diameter needs at least 2 points")
    if len(g) > MAX_EXACT_DIAMETER_POINTS:
        rng = np.random.default_rng(_DIAMETER_SUBSAMPLE_SEED)
        g = g[rng.permutation(len(g))[:MAX_EXACT_DIAMETER_POINTS]]
    best = 0.0
    chunk = 256
    for i in range(0, len(g), chunk):
        d = g[i : i + chunk, None, :] - g[None, :, :]
        best = max(best, float(np.max(np.sum(d * d, axis=-1))))
    return float(np.sqrt(best))


def r_squared(pred: XyzMap, gt: XyzMap, mask: SegMask) -> float:
    """1 - RSS/TSS with squared point distances against the GT centroid."""
    p = _masked_points(pred, mask)
    g = _masked_points(gt, mask)
    centroid = np.mean(g, axis=0)
    rss = float(np.sum(np.sum((g - p) ** 2, axis=-1)))
    tss = float(np.sum(np.sum((g - centroid) ** 2, axis=-1)))
    if tss <= _TSS_FLOOR:
        raise DegenerateGT("all GT points coincide; TSS is zero")
    return 1.0 - rss / tss


def chamfer(pred_points: np.ndarray, gt_points: np.ndarray) -> float:
    """Two-sided Chamfer distance between raw point sets.

    Mean distance from each GT point to its nearest predicted point plus the
    mean in the opposite direction.  Pixel-grid positions are irrelevant;
    nearest neighbors come from an exact KD-tree.
    """
    p = np.asarray(pred_points, dtype=np.float64).reshape(-1, 3)
    g = np.asarray(gt_points, dtype=np.float64).reshape(-1, 3)
    if len(p) == 0 or len(g) == 0:
        raise EmptySet("chamfer needs two nonempty point sets")
    forward = cKDTree(p).query(g)[0]
    backward = cKDTree(g).query(p)[0]
    return float(np.mean(forward) + np.mean(backward))


@dataclass(frozen=True)
class SimilarityTransform:
    """Scale-then-translate map p' = k * p + t estimated from one region."""

    k: float
    t: np.ndarray

    def apply(self, m: XyzMap, target_mask: SegMask) -> XyzMap:
        """Transformed copy of ``m``, valid only on the target pixels."""
        if target_mask.count == 0:
            raise EmptyMask("alignment target mask is empty")
        if not np.all(m.valid[target_mask.values]):
            raise InvalidEndpoint("target mask covers invalid pixels")
        coords = np.full_like(m.coords, np.nan)
        sel = target_mask.values
        coords[sel] = self.k * m.coords[sel] + self.t
        return XyzMap(coords, sel)


def similarity_from_region(
    pred: XyzMap,
    gt: XyzMap,
    region: SegMask,
    dilations=None,
    min_pairs: int = MIN_SCALE_PAIRS,
) -> SimilarityTransform:
    """Estimate the similarity aligning a prediction to GT over one region.

    The scale is the pair-difference ratio K over the region; the translation
    matches the region centroids after scaling (the L2-optimal translation
    for a fixed scale).
    """
    pairs = build_pair_set(region, dilations)
    k = scale_factor(pred, gt, pairs, min_pairs=min_pairs).k
    p_ref = _masked_points(pred, region)
    g_ref = _masked_points(gt, region)
    t = np.mean(g_ref, axis=0) - k * np.mean(p_ref, axis=0)
    return SimilarityTransform(k, t)


def align_prediction(
    pred: XyzMap,
    gt: XyzMap,
    ref_mask: SegMask,
    target_mask: SegMask,
    dilations=None,
    min_pairs: int = MIN_SCALE_PAIRS,
) -> XyzMap:
    """Rescale and translate a prediction to GT using a reference region.

    Using the vessel as reference for a content target keeps the content's
    relative placement errors in the result; using the object itself as
    reference removes them and isolates pure shape error.
    """
    transform = similarity_from_region(pred, gt, ref_mask, dilations, min_pairs)
    return transform.apply(pred, target_mask)


def seg_eval(pred: SegMask, gt: SegMask) -> SegReport:
    """IOU, precision, and recall between predicted and GT masks.

    Empty-mask conventions: both empty scores 1.0 everywhere; one-sided
    empties score 0.0 everywhere.
    """
    if (pred.height, pred.width) != (gt.height, gt.width):
        raise DimensionMismatch("masks differ in size")
    inter = int(np.count_nonzero(pred.values & gt.values))
    union = int(np.count_nonzero(pred.values | gt.values))
    n_pred = pred.count
    n_gt = gt.count
    if n_pred == 0 and n_gt == 0:
        return SegReport(1.0, 1.0, 1.0, 0, 0)
    iou = inter / union if union else 0.0
    precision = inter / n_pred if n_pred else 0.0
    recall = inter / n_gt if n_gt else 0.0
    return SegReport(iou, precision, recall, inter, union)


def material_mae(pred: MaterialVector, gt: MaterialVector) -> MaterialErrors:
    """Per-property absolute errors, with RGB averaged into one color error."""
    color = float(np.mean(np.abs(np.asarray(pred.rgb) - np.asarray(gt.rgb))))
    return MaterialErrors(
        transmission=abs(pred.transmission - gt.transmission),
        color=color,
        roughness=abs(pred.roughness - gt.roughness),
        metallic=abs(pred.metallic - gt.metallic),
        ior=abs(pred.ior - gt.ior),
    )


def evaluate_xyz(pred: XyzMap, gt: XyzMap, mask: SegMask) -> EvalReport:
    """Full metric bundle for one object: MAE, MAD, MaxDst, Chamfer, R^2."""
    err = mae_points(pred, gt, mask)
    spread = mad(gt, mask)
    diameter = max_dst(gt, mask)
    cd = chamfer(pred.coords[mask.values], gt.coords[mask.values])
    r2 = r_squared(pred, gt, mask)
    if spread <= 0.0 or diameter <= 0.0:
        raise DegenerateGT("GT object has zero spatial extent")
    return EvalReport(
        mae=err,
        mad=spread,
        max_dst=diameter,
        mae_over_mad=err / spread,
        mae_over_maxdst=err / diameter,
        chamfer=cd,
        chamfer_over_mad=cd / spread,
        chamfer_over_maxdst=cd / diameter,
        r_squared=r2,
    )


__all__ = [
    "EvalReport",
    "SegReport",
    "MaterialVector",
    "MaterialErrors",
    "SimilarityTransform",
    "mae_points",
    "mad",
    "max_dst",
    "r_squared",
    "chamfer",
    "similarity_from_region",
    "align_prediction",
    "seg_eval",
    "material_mae",
    "evaluate_xyz",
]
