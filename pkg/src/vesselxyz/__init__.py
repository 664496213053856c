"""vesselxyz: camera-agnostic 3D reconstruction toolkit.

Per-pixel XYZ maps and depth maps, translation/scale-invariant pairwise
losses with analytic gradients, a full evaluation-metric suite, procedural
vessel-scene generation, and a ray-cast renderer for ground-truth maps.
"""

__version__ = "0.1.0"

from .errors import (
    DegenerateGT,
    DegenerateScale,
    DimensionMismatch,
    EmptyMask,
    EmptyPairSet,
    EmptyScene,
    EmptySet,
    GenerationFailed,
    InvalidEndpoint,
    InvalidResolution,
    MalformedHeader,
    MissingPrediction,
    NonPositiveDepth,
    TooFewPoints,
    TruncatedPayload,
    VesselXyzError,
)
from .geometry import (
    DepthMap,
    PairSet,
    PinholeCamera,
    SegMask,
    XyzMap,
    build_pair_set,
    default_dilations,
    depth_to_xyz,
    pair_differences,
    xyz_to_depth,
)
from .losses import (
    LossReport,
    ScaleFactor,
    loss_gradient,
    scale_factor,
    scale_invariant_loss,
    translation_consistency_loss,
    translation_invariant_loss,
)
from .metrics import (
    EvalReport,
    MaterialErrors,
    MaterialVector,
    SegReport,
    SimilarityTransform,
    align_prediction,
    chamfer,
    evaluate_xyz,
    mad,
    mae_points,
    material_mae,
    max_dst,
    r_squared,
    seg_eval,
    similarity_from_region,
)
from .procgen import (
    GroundPlane,
    LinearTerm,
    PolynomialTerm,
    ProfileConfig,
    SceneConfig,
    SceneRecord,
    SinusoidTerm,
    TriMesh,
    VesselProfile,
    assemble_scene,
    enclosed_volume,
    flat_liquid_fill,
    generate_profile,
    look_at_camera,
    opening_plane,
    profile_to_mesh,
    scene_violations,
    surface_area,
)
from .bvh import Bvh, Hit, build_bvh, bvh_intersect, intersect_rays, intersect_rays_brute
from .renderer import RenderOutput, clean_depth, render_depth, render_scene
from .formats import (
    read_depth_pfm,
    read_pfm,
    read_pgm,
    read_xyz_pfm,
    write_obj,
    write_pfm,
    write_pgm,
)
from .manifest import SceneManifest, emit_scene, load_manifest, replay_manifest
from .evaluation import run_eval
from .report import ReportDocument
