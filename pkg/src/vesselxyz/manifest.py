"""Scene manifests: a self-contained, replayable record of one generated scene.

A manifest is a JSON document with a fixed field order holding the seed, the
full generation config, the camera, the drawn profile/materials/fill, and
the relative names of every emitted artifact.  Re-running generation with
the manifest's seed and config reproduces every artifact byte-for-byte.

File naming is fixed so evaluation needs no configuration:
``<seed>_<role>_<kind>.<ext>`` with role in {vessel, content, opening} and
kind in {depth, xyz, mask}; meshes are ``<seed>_<role>_mesh.obj`` and the
manifest itself is ``<seed>_manifest.json``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .formats import write_obj, write_pfm, write_pgm
from .geometry import PinholeCamera, SegMask
from .metrics import MaterialVector
from .procgen import SceneConfig, SceneRecord, VesselProfile, assemble_scene
from .renderer import RenderOutput, render_scene

FORMAT_VERSION = 1
ROLES = ("vessel", "content", "opening")


def artifact_name(seed: int, role: str, kind: str) -> str:
    ext = {"depth": "pfm", "xyz": "pfm", "mask": "pgm", "mesh": "obj"}[kind]
    return f"{seed}_{role}_{kind}.{ext}"


def manifest_name(seed: int) -> str:
    return f"{seed}_manifest.json"


def _camera_to_dict(camera: PinholeCamera) -> dict:
    return {
        "fx": camera.fx,
        "fy": camera.fy,
        "cx": camera.cx,
        "cy": camera.cy,
        "width": camera.width,
        "height": camera.height,
        "rotation": camera.rotation.tolist(),
        "translation": camera.translation.tolist(),
    }


def camera_from_dict(d: dict) -> PinholeCamera:
    return PinholeCamera(
        fx=d["fx"], fy=d["fy"], cx=d["cx"], cy=d["cy"],
        width=d["width"], height=d["height"],
        rotation=np.array(d["rotation"]), translation=np.array(d["translation"]),
    )


def _material_to_dict(m: MaterialVector) -> dict:
    return {
        "rgb": list(m.rgb),
        "transmission": m.transmission,
        "roughness": m.roughness,
        "metallic": m.metallic,
        "ior": m.ior,
    }


def material_from_dict(d: dict) -> MaterialVector:
    return MaterialVector(
        rgb=tuple(d["rgb"]),
        transmission=d["transmission"],
        roughness=d["roughness"],
        metallic=d["metallic"],
        ior=d["ior"],
    )


@dataclass(frozen=True)
class SceneManifest:
    """Everything needed to reproduce and evaluate one scene."""

    format_version: int
    seed: int
    config: SceneConfig
    camera: PinholeCamera
    profile: VesselProfile
    fill_fraction: float
    vessel_material: MaterialVector
    content_material: MaterialVector
    files: dict

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "seed": self.seed,
            "config": self.config.to_dict(),
            "camera": _camera_to_dict(self.camera),
            "profile": self.profile.to_dict(),
            "fill_fraction": self.fill_fraction,
            "vessel_material": _material_to_dict(self.vessel_material),
            "content_material": _material_to_dict(self.content_material),
            "files": dict(self.files),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneManifest":
        return cls(
            format_version=d["format_version"],
            seed=d["seed"],
            config=SceneConfig.from_dict(d["config"]),
            camera=camera_from_dict(d["camera"]),
            profile=VesselProfile.from_dict(d["profile"]),
            fill_fraction=d["fill_fraction"],
            vessel_material=material_from_dict(d["vessel_material"]),
            content_material=material_from_dict(d["content_material"]),
            files=dict(d["files"]),
        )


def write_manifest(manifest: SceneManifest, path) -> None:
    Path(path).write_text(json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_manifest(path) -> SceneManifest:
    return SceneManifest.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def emit_scene(
    seed: int,
    config: SceneConfig,
    out_dir,
    write_meshes: bool = True,
) -> SceneManifest:
    """Assemble, render, and write one scene's artifacts plus its manifest."""
    scene = assemble_scene(seed, config)
    output = render_scene(scene)
    return write_scene_artifacts(scene, output, config, out_dir, write_meshes)


def write_scene_artifacts(
    scene: SceneRecord,
    output: RenderOutput,
    config: SceneConfig,
    out_dir,
    write_meshes: bool = True,
) -> SceneManifest:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = scene.seed
    files = {}

    depths = {
        "vessel": output.vessel_depth,
        "content": output.content_depth,
        "opening": output.opening_depth,
    }
    xyzs = {
        "vessel": output.vessel_xyz,
        "content": output.content_xyz,
        "opening": output.opening_xyz,
    }
    masks = {
        "vessel": output.vessel_mask,
        "content": output.content_mask,
        "opening": SegMask(output.opening_depth.valid),
    }
    for role in ROLES:
        name = artifact_name(seed, role, "depth")
        write_pfm(out / name, depths[role])
        files[f"{role}_depth"] = name
        name = artifact_name(seed, role, "xyz")
        write_pfm(out / name, xyzs[role])
        files[f"{role}_xyz"] = name
        name = artifact_name(seed, role, "mask")
        write_pgm(out / name, masks[role])
        files[f"{role}_mask"] = name

    if write_meshes:
        for role, mesh in (
            ("vessel", scene.vessel),
            ("content", scene.content),
            ("opening", scene.opening),
        ):
            name = artifact_name(seed, role, "mesh")
            write_obj(out / name, mesh)
            files[f"{role}_mesh"] = name

    manifest = SceneManifest(
        format_version=FORMAT_VERSION,
        seed=seed,
        config=config,
        camera=scene.camera,
        profile=scene.profile,
        fill_fraction=scene.fill_fraction,
        vessel_material=scene.vessel_material,
        content_material=scene.content_material,
        files=files,
    )
    write_manifest(manifest, out / manifest_name(seed))
    return manifest


def replay_manifest(manifest: SceneManifest, out_dir, write_meshes: bool = True) -> SceneManifest:
    """Regenerate a manifest's scene from its seed and config echo."""
    return emit_scene(manifest.seed, manifest.config, out_dir, write_meshes)
