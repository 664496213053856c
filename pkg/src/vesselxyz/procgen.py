"""Procedural vessel profiles, surface-of-revolution meshes, and scene assembly.

A vessel is a surface of revolution around the +Y axis sitting on the ground
plane y = 0.  Its radius-versus-height curve r(h) is the numerical integral
of a random derivative built from constant-slope, monomial, and sinusoidal
terms, which yields smooth but varied labware-like silhouettes.  Content is
a static liquid: the vessel interior up to a fill height, shrunk by a small
wall clearance and capped by a flat horizontal disk.

Everything is a pure function of (seed, config); regenerating with the same
inputs is bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import DimensionMismatch, GenerationFailed, InvalidResolution
from .geometry import PinholeCamera, _frozen
from .metrics import MaterialVector, IOR_PHYSICAL_RANGE

MIN_TRIANGLE_AREA = 1e-12
MESH_LABELS = ("vessel", "content", "opening", "ground")

_FILL_SALT = 11
_MATERIAL_SALT = 12
_CAMERA_SALT = 13
_CONTAINMENT_SALT = 14


# ---------------------------------------------------------------------------
# Profiles


@dataclass(frozen=True)
class LinearTerm:
    """Constant radius slope: contributes a linear piece to r(h)."""

    slope: float

    def derivative(self, u: np.ndarray) -> np.ndarray:
        return np.full_like(u, self.slope)


@dataclass(frozen=True)
class PolynomialTerm:
    """Monomial derivative in normalized height: coefficient * u**degree."""

    coefficient: float
    degree: int

    def derivative(self, u: np.ndarray) -> np.ndarray:
        return self.coefficient * u**self.degree


@dataclass(frozen=True)
class SinusoidTerm:
    """Sinusoidal derivative: amplitude * sin(2*pi*frequency*u + phase)."""

    amplitude: float
    frequency: float
    phase: float

    def derivative(self, u: np.ndarray) -> np.ndarray:
        return self.amplitude * np.sin(2.0 * math.pi * self.frequency * u + self.phase)


def term_to_dict(term) -> dict:
    d = {"kind": type(term).__name__, **asdict(term)}
    return d


def term_from_dict(d: dict):
    kinds = {c.__name__: c for c in (LinearTerm, PolynomialTerm, SinusoidTerm)}
    d = dict(d)
    cls = kinds[d.pop("kind")]
    return cls(**d)


@dataclass(frozen=True)
class VesselProfile:
    """Radius-vs-height curve r(h) on [0, height], sampled at evenly spaced knots.

    The curve is base_radius plus the trapezoid integral of the summed term
    derivatives; between knots it is evaluated by linear interpolation.
    """

    terms: tuple
    base_radius: float
    height: float
    samples: int = 1024

    def __post_init__(self):
        if self.samples < 2:
            raise InvalidResolution("profile needs at least 2 knots")
        if self.base_radius <= 0 or self.height <= 0:
            raise ValueError("base_radius and height must be positive")
        object.__setattr__(self, "terms", tuple(self.terms))
        hs = np.linspace(0.0, self.height, self.samples)
        u = hs / self.height
        deriv = np.zeros_like(hs)
        for term in self.terms:
            deriv = deriv + term.derivative(u)
        dh = hs[1] - hs[0]
        radii = np.empty_like(hs)
        radii[0] = self.base_radius
        radii[1:] = self.base_radius + np.cumsum((deriv[1:] + deriv[:-1]) * (0.5 * dh))
        object.__setattr__(self, "_knot_heights", _frozen(hs))
        object.__setattr__(self, "_knot_radii", _frozen(radii))

    def radius(self, h) -> np.ndarray:
        """Interpolated radius at height(s) h (clamped to [0, height])."""
        return np.interp(h, self._knot_heights, self._knot_radii)

    @property
    def rim_radius(self) -> float:
        return float(self._knot_radii[-1])

    def min_radius(self, grid: int = 10000) -> float:
        hs = np.linspace(0.0, self.height, grid)
        return float(np.min(self.radius(hs)))

    def to_dict(self) -> dict:
        return {
            "terms": [term_to_dict(t) for t in self.terms],
            "base_radius": self.base_radius,
            "height": self.height,
            "samples": self.samples,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VesselProfile":
        return cls(
            terms=tuple(term_from_dict(t) for t in d["terms"]),
            base_radius=d["base_radius"],
            height=d["height"],
            samples=d["samples"],
        )


@dataclass(frozen=True)
class ProfileConfig:
    """Ranges for random profile generation (uniform draws unless noted)."""

    term_count: tuple = (1, 4)  # inclusive
    linear_slope: tuple = (-0.5, 0.5)
    poly_degrees: tuple = (2, 3)
    poly_coefficient: tuple = (-0.3, 0.3)
    sin_amplitude_scale: tuple = (0.0, 0.3)  # multiplied by base_radius
    sin_frequency: tuple = (0.5, 4.0)  # cycles per height
    base_radius: tuple = (0.02, 0.08)
    height: tuple = (0.05, 0.25)
    min_radius: float = 0.005
    samples: int = 1024
    max_retries: int = 100

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ProfileConfig":
        kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**kwargs)


def _draw_term(rng: np.random.Generator, config: ProfileConfig, base_radius: float):
    kind = rng.integers(0, 3)
    if kind == 0:
        return LinearTerm(float(rng.uniform(*config.linear_slope)))
    if kind == 1:
        degree = int(rng.integers(config.poly_degrees[0], config.poly_degrees[1] + 1))
        return PolynomialTerm(float(rng.uniform(*config.poly_coefficient)), degree)
    lo, hi = config.sin_amplitude_scale
    return SinusoidTerm(
        amplitude=float(rng.uniform(lo, hi) * base_radius),
        frequency=float(rng.uniform(*config.sin_frequency)),
        phase=float(rng.uniform(0.0, 2.0 * math.pi)),
    )


def generate_profile(seed: int, config: ProfileConfig | None = None) -> VesselProfile:
    """Draw random derivative terms and integrate them into a vessel profile.

    Rejects and redraws any candidate whose radius dips to ``min_radius`` or
    below anywhere on [0, height]; gives up after ``max_retries`` attempts.
    """
    config = config or ProfileConfig()
    rng = np.random.default_rng(seed)
    for _ in range(config.max_retries):
        base_radius = float(rng.uniform(*config.base_radius))
        height = float(rng.uniform(*config.height))
        n_terms = int(rng.integers(config.term_count[0], config.term_count[1] + 1))
        terms = tuple(_draw_term(rng, config, base_radius) for _ in range(n_terms))
        profile = VesselProfile(terms, base_radius, height, config.samples)
        if float(np.min(profile._knot_radii)) > config.min_radius:
            return profile
    raise GenerationFailed(
        f"no positive-radius profile within {config.max_retries} retries (seed {seed})"
    )


# ---------------------------------------------------------------------------
# Meshes


@dataclass(frozen=True)
class TriMesh:
    """Indexed triangle mesh with a semantic label.

    Triangles are wound counterclockwise seen from outside, so cross products
    of edge vectors give outward normals and the divergence-theorem volume of
    a closed mesh comes out positive.
    """

    vertices: np.ndarray  # (N, 3) float64
    triangles: np.ndarray  # (M, 3) int64
    label: str

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        t = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.label not in MESH_LABELS:
            raise ValueError(f"label must be one of {MESH_LABELS}")
        if len(t) and (t.min() < 0 or t.max() >= len(v)):
            raise DimensionMismatch("triangle indices out of range")
        if len(t):
            a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
            areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
            if np.any(areas <= MIN_TRIANGLE_AREA):
                raise ValueError("mesh contains degenerate triangles")
        object.__setattr__(self, "vertices", _frozen(v))
        object.__setattr__(self, "triangles", _frozen(t))

    @property
    def num_triangles(self) -> int:
        return int(self.triangles.shape[0])

    @property
    def is_empty(self) -> bool:
        return self.num_triangles == 0

    def centroid(self) -> np.ndarray:
        return np.mean(self.vertices, axis=0)


def empty_mesh(label: str) -> TriMesh:
    return TriMesh(np.empty((0, 3)), np.empty((0, 3), dtype=np.int64), label)


def surface_area(mesh: TriMesh) -> float:
    if mesh.is_empty:
        return 0.0
    v, t = mesh.vertices, mesh.triangles
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    return float(np.sum(0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)))


def enclosed_volume(mesh: TriMesh) -> float:
    """Signed volume via the divergence theorem; positive for outward winding."""
    if mesh.is_empty:
        return 0.0
    v, t = mesh.vertices, mesh.triangles
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    return float(np.sum(np.einsum("ij,ij->i", a, np.cross(b, c))) / 6.0)


def _revolution_rings(radii: np.ndarray, heights: np.ndarray, angular_segments: int):
    """Stacked rings of a surface of revolution: (R*A, 3) vertices."""
    theta = np.linspace(0.0, 2.0 * math.pi, angular_segments, endpoint=False)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    rings = np.empty((len(heights), angular_segments, 3))
    rings[:, :, 0] = radii[:, None] * cos_t[None, :]
    rings[:, :, 1] = heights[:, None]
    rings[:, :, 2] = radii[:, None] * sin_t[None, :]
    return rings.reshape(-1, 3)


def _lateral_triangles(n_rings: int, angular_segments: int) -> np.ndarray:
    """Outward-wound quads between consecutive rings, split into triangles."""
    a = angular_segments
    j = np.repeat(np.arange(n_rings - 1), a)
    k = np.tile(np.arange(a), n_rings - 1)
    k1 = (k + 1) % a
    v00 = j * a + k  # (j, k)
    v10 = (j + 1) * a + k  # (j+1, k)
    v11 = (j + 1) * a + k1  # (j+1, k+1)
    v01 = j * a + k1  # (j, k+1)
    tris = np.empty((2 * len(j), 3), dtype=np.int64)
    tris[0::2] = np.stack([v00, v10, v11], axis=1)
    tris[1::2] = np.stack([v00, v11, v01], axis=1)
    return tris


def _disk_fan(center_index: int, ring_start: int, angular_segments: int, upward: bool):
    a = angular_segments
    k = np.arange(a)
    k1 = (k + 1) % a
    if upward:
        tris = np.stack([np.full(a, center_index), ring_start + k1, ring_start + k], axis=1)
    else:
        tris = np.stack([np.full(a, center_index), ring_start + k, ring_start + k1], axis=1)
    return tris.astype(np.int64)


def profile_to_mesh(
    profile: VesselProfile, angular_segments: int = 256, vertical_segments: int = 64
) -> TriMesh:
    """Vessel surface of revolution: closed bottom disk, open top rim."""
    if angular_segments < 3 or vertical_segments < 2:
        raise InvalidResolution(
            f"need >= 3 angular and >= 2 vertical segments, got {angular_segments}/{vertical_segments}"
        )
    heights = np.linspace(0.0, profile.height, vertical_segments + 1)
    radii = profile.radius(heights)
    verts = _revolution_rings(radii, heights, angular_segments)
    tris = _lateral_triangles(vertical_segments + 1, angular_segments)
    center = np.array([[0.0, 0.0, 0.0]])
    vertices = np.vstack([verts, center])
    cap = _disk_fan(len(vertices) - 1, 0, angular_segments, upward=False)
    return TriMesh(vertices, np.vstack([tris, cap]), "vessel")


def flat_liquid_fill(
    profile: VesselProfile,
    fill_fraction: float,
    angular_segments: int = 256,
    vertical_segments: int = 64,
    clearance: float = 1e-4,
) -> TriMesh:
    """Static liquid: the vessel interior up to the fill height, shrunk inward.

    The solid spans heights [clearance, fill_fraction*height - clearance] with
    lateral radius r(h) - clearance, closed by flat disks at both ends.  The
    clearance keeps liquid faces off the vessel faces so ray casting never
    sees coplanar geometry.  A fill too small to fit the clearance margins
    yields an empty mesh.
    """
    if not 0.0 <= fill_fraction <= 1.0:
        raise ValueError("fill_fraction must lie in [0, 1]")
    if angular_segments < 3 or vertical_segments < 2:
        raise InvalidResolution("need >= 3 angular and >= 2 vertical segments")
    top = fill_fraction * profile.height - clearance
    bottom = clearance
    if top - bottom <= clearance:
        return empty_mesh("content")
    heights = np.linspace(bottom, top, vertical_segments + 1)
    radii = profile.radius(heights) - clearance
    verts = _revolution_rings(radii, heights, angular_segments)
    tris = _lateral_triangles(vertical_segments + 1, angular_segments)
    bottom_center = np.array([[0.0, bottom, 0.0]])
    top_center = np.array([[0.0, top, 0.0]])
    vertices = np.vstack([verts, bottom_center, top_center])
    n = len(verts)
    bottom_cap = _disk_fan(n, 0, angular_segments, upward=False)
    top_cap = _disk_fan(n + 1, n - angular_segments, angular_segments, upward=True)
    return TriMesh(vertices, np.vstack([tris, bottom_cap, top_cap]), "content")


def opening_plane(profile: VesselProfile, angular_segments: int = 256) -> TriMesh:
    """Flat disk spanning the vessel's top rim."""
    if angular_segments < 3:
        raise InvalidResolution("need >= 3 angular segments")
    rim = profile.rim_radius
    ring = _revolution_rings(
        np.array([rim]), np.array([profile.height]), angular_segments
    )
    vertices = np.vstack([ring, [[0.0, profile.height, 0.0]]])
    tris = _disk_fan(len(vertices) - 1, 0, angular_segments, upward=True)
    return TriMesh(vertices, tris, "opening")


# ---------------------------------------------------------------------------
# Scenes


@dataclass(frozen=True)
class GroundPlane:
    """Horizontal square ground patch at a fixed height."""

    height: float = 0.0
    half_extent: float = 2.0

    def to_mesh(self) -> TriMesh:
        e, y = self.half_extent, self.height
        vertices = np.array(
            [[-e, y, -e], [-e, y, e], [e, y, e], [e, y, -e]], dtype=np.float64
        )
        triangles = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int64)
        return TriMesh(vertices, triangles, "ground")


@dataclass(frozen=True)
class SceneConfig:
    """All knobs for random scene assembly, JSON-serializable."""

    profile: ProfileConfig = field(default_factory=ProfileConfig)
    angular_segments: int = 96
    vertical_segments: int = 48
    wall_clearance: float = 1e-4
    fill_fraction: tuple = (0.2, 0.9)
    camera_distance: tuple = (0.35, 0.8)  # meters from the vessel centroid
    camera_elevation_deg: tuple = (10.0, 60.0)
    camera_azimuth_deg: tuple = (0.0, 360.0)
    focal_px: float = 320.0
    resolution: int = 256
    ground_half_extent: float = 2.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["profile"] = self.profile.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SceneConfig":
        d = dict(d)
        profile = ProfileConfig.from_dict(d.pop("profile", {}))
        kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(profile=profile, **kwargs)


@dataclass(frozen=True)
class SceneRecord:
    """One generated scene: geometry, camera, materials, and provenance."""

    seed: int
    profile: VesselProfile
    vessel: TriMesh
    content: TriMesh
    opening: TriMesh
    ground_plane: GroundPlane
    camera: PinholeCamera
    vessel_material: MaterialVector
    content_material: MaterialVector
    fill_fraction: float


def look_at_camera(
    eye,
    target,
    fx: float,
    fy: float,
    cx: float,
    cy: float,
    width: int,
    height: int,
    up=(0.0, 1.0, 0.0),
) -> PinholeCamera:
    """Camera at ``eye`` looking toward ``target`` (CV frame: X right, Y down, Z forward)."""
    eye = np.asarray(eye, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    forward = target - eye
    norm = np.linalg.norm(forward)
    if norm < 1e-12:
        raise ValueError("eye and target coincide")
    forward = forward / norm
    upv = np.asarray(up, dtype=np.float64)
    if abs(float(np.dot(forward, upv))) > 0.999 * np.linalg.norm(upv):
        upv = np.array([0.0, 0.0, 1.0])
    right = np.cross(forward, upv)
    right = right / np.linalg.norm(right)
    down = np.cross(forward, right)
    rotation = np.stack([right, down, forward])
    return PinholeCamera(
        fx=fx, fy=fy, cx=cx, cy=cy, width=width, height=height,
        rotation=rotation, translation=-rotation @ eye,
    )


def _random_material(rng: np.random.Generator) -> MaterialVector:
    return MaterialVector.with_physical_ior(
        rgb=tuple(float(x) for x in rng.uniform(0.0, 1.0, 3)),
        transmission=float(rng.uniform(0.0, 1.0)),
        roughness=float(rng.uniform(0.0, 1.0)),
        metallic=float(rng.uniform(0.0, 1.0)),
        ior_physical=float(rng.uniform(*IOR_PHYSICAL_RANGE)),
    )


def assemble_scene(seed: int, config: SceneConfig | None = None) -> SceneRecord:
    """Build a full random scene deterministically from a seed.

    Independent RNG streams (seeded by the scene seed plus a per-purpose
    salt) drive the fill level, the materials, and the camera, so changing
    one config range never perturbs the other draws.
    """
    config = config or SceneConfig()
    profile = generate_profile(seed, config.profile)
    vessel = profile_to_mesh(profile, config.angular_segments, config.vertical_segments)

    fill_rng = np.random.default_rng([seed, _FILL_SALT])
    fill = float(fill_rng.uniform(*config.fill_fraction))
    content = flat_liquid_fill(
        profile, fill, config.angular_segments, config.vertical_segments,
        clearance=config.wall_clearance,
    )
    opening = opening_plane(profile, config.angular_segments)

    mat_rng = np.random.default_rng([seed, _MATERIAL_SALT])
    vessel_material = _random_material(mat_rng)
    content_material = _random_material(mat_rng)

    cam_rng = np.random.default_rng([seed, _CAMERA_SALT])
    distance = float(cam_rng.uniform(*config.camera_distance))
    elevation = math.radians(float(cam_rng.uniform(*config.camera_elevation_deg)))
    azimuth = math.radians(float(cam_rng.uniform(*config.camera_azimuth_deg)))
    target = vessel.centroid()
    offset = distance * np.array(
        [
            math.cos(elevation) * math.sin(azimuth),
            math.sin(elevation),
            math.cos(elevation) * math.cos(azimuth),
        ]
    )
    res = config.resolution
    camera = look_at_camera(
        eye=target + offset, target=target,
        fx=config.focal_px, fy=config.focal_px,
        cx=(res - 1) / 2.0, cy=(res - 1) / 2.0,
        width=res, height=res,
    )
    return SceneRecord(
        seed=seed,
        profile=profile,
        vessel=vessel,
        content=content,
        opening=opening,
        ground_plane=GroundPlane(0.0, config.ground_half_extent),
        camera=camera,
        vessel_material=vessel_material,
        content_material=content_material,
        fill_fraction=fill,
    )


def sample_surface_points(mesh: TriMesh, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform area-weighted random points on a mesh surface."""
    if mesh.is_empty:
        return np.empty((0, 3))
    v, t = mesh.vertices, mesh.triangles
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    idx = rng.choice(len(t), size=n, p=areas / areas.sum())
    r1 = np.sqrt(rng.uniform(0.0, 1.0, n))
    r2 = rng.uniform(0.0, 1.0, n)
    w0 = 1.0 - r1
    w1 = r1 * (1.0 - r2)
    w2 = r1 * r2
    return w0[:, None] * a[idx] + w1[:, None] * b[idx] + w2[:, None] * c[idx]


def scene_violations(scene: SceneRecord, samples: int = 1000, tol: float = 1e-6) -> list:
    """Check a scene's structural guarantees; returns human-readable violations.

    Content containment is verified on ``samples`` random content-surface
    points (seeded from the scene seed, so the check is reproducible); each
    must sit inside the vessel interior within ``tol``.  The opening disk
    must sit exactly at the rim height with the rim radius.
    """
    problems = []
    profile = scene.profile
    if not scene.content.is_empty:
        rng = np.random.default_rng([scene.seed, _CONTAINMENT_SALT])
        pts = sample_surface_points(scene.content, samples, rng)
        ys = pts[:, 1]
        radial = np.sqrt(pts[:, 0] ** 2 + pts[:, 2] ** 2)
        if np.any(ys < -tol) or np.any(ys > profile.height + tol):
            problems.append("content extends beyond the vessel height range")
        limit = profile.radius(np.clip(ys, 0.0, profile.height)) + tol
        if np.any(radial > limit):
            problems.append("content reaches outside the vessel wall")
    ys = scene.opening.vertices[:, 1]
    if np.max(np.abs(ys - profile.height)) > 1e-12:
        problems.append("opening disk is not at the rim height")
    radial = np.sqrt(scene.opening.vertices[:, 0] ** 2 + scene.opening.vertices[:, 2] ** 2)
    if abs(float(np.max(radial)) - profile.rim_radius) > 1e-12:
        problems.append("opening disk radius differs from the rim radius")
    return problems
