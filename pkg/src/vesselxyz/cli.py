"""Command-line surface: generate, render, eval, loss, clean-depth.

Exit codes form a stable contract: 0 success, 1 usage error, 2 data error
(unreadable/malformed inputs, unwritable output), 3 partial batch failure
(some seeds failed, the rest were emitted).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .errors import VesselXyzError
from .evaluation import MODES, run_eval
from .formats import read_depth_pfm, read_pgm, read_xyz_pfm, write_pfm
from .geometry import build_pair_set, SegMask
from .losses import LOSS_KINDS, scale_invariant_loss, translation_invariant_loss
from .manifest import camera_from_dict, emit_scene, load_manifest, replay_manifest
from .procgen import SceneConfig
from .renderer import clean_depth

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PARTIAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def parse_seeds(text: str) -> list:
    """Seed list syntax: comma-separated values and inclusive ranges (1..5 or 1-5)."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        sep = ".." if ".." in part else ("-" if "-" in part[1:] else None)
        if sep:
            lo, hi = part.split(sep, 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ValueError(f"no seeds in {text!r}")
    return seeds


def parse_dilations(text: str | None):
    if text is None:
        return None
    return tuple(int(d) for d in text.split(","))


def _load_config(path: str | None, resolution: int | None) -> SceneConfig:
    if path is None:
        config = SceneConfig()
    else:
        config = SceneConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    if resolution is not None:
        config = replace(config, resolution=resolution)
    return config


def _probe_writable(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    probe = out_dir / ".write-probe"
    probe.write_bytes(b"")
    probe.unlink()


def _build_parser() -> _Parser:
    parser = _Parser(prog="vesselxyz", description=__doc__)
    parser.add_argument("--version", action="version", version=f"vesselxyz {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate, render, and write scenes")
    gen.add_argument("--seeds", required=True, help="e.g. 1..20 or 3,5,9")
    gen.add_argument("--config", help="scene config JSON (defaults used otherwise)")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--resolution", type=int, help="override render resolution")
    gen.add_argument("--no-meshes", action="store_true", help="skip OBJ export")

    ren = sub.add_parser("render", help="replay one manifest's artifacts")
    ren.add_argument("--manifest", required=True)
    ren.add_argument("--out", required=True)

    ev = sub.add_parser("eval", help="evaluate predictions against GT manifests")
    ev.add_argument("--gt", required=True, help="directory with manifests + GT artifacts")
    ev.add_argument("--pred", required=True, help="directory with prediction files")
    ev.add_argument("--mode", required=True, choices=MODES)
    ev.add_argument("--dilations", help="comma-separated, e.g. 1,2,4")
    ev.add_argument("--out", help="directory for report.csv / report.txt")

    lo = sub.add_parser("loss", help="compute a loss between two XYZ map files")
    lo.add_argument("--pred", required=True, help="predicted XYZ map (.pfm)")
    lo.add_argument("--gt", required=True, help="ground-truth XYZ map (.pfm)")
    lo.add_argument("--mask", required=True, help="object mask (.pgm)")
    lo.add_argument("--kind", required=True, choices=LOSS_KINDS)
    lo.add_argument("--dilations", help="comma-separated, e.g. 1,2,4")

    cd = sub.add_parser("clean-depth", help="drop masked pixels far from the object center")
    cd.add_argument("--depth", required=True, help="input depth map (.pfm)")
    cd.add_argument("--mask", required=True, help="object mask (.pgm)")
    cd.add_argument("--out", required=True, help="output depth map (.pfm)")
    cd.add_argument("--manifest", help="take camera intrinsics from this manifest")
    cd.add_argument("--fx", type=float)
    cd.add_argument("--fy", type=float)
    cd.add_argument("--cx", type=float)
    cd.add_argument("--cy", type=float)
    cd.add_argument("--max-offset", type=float, default=0.10, help="meters, default 0.10")
    return parser


def _cmd_generate(args) -> int:
    seeds = parse_seeds(args.seeds)
    config = _load_config(args.config, args.resolution)
    out = Path(args.out)
    _probe_writable(out)
    failures = []
    for seed in seeds:
        try:
            emit_scene(seed, config, out, write_meshes=not args.no_meshes)
        except VesselXyzError as e:
            failures.append((seed, str(e)))
    print(f"generated {len(seeds) - len(failures)}/{len(seeds)} scenes in {out}")
    if failures:
        for seed, why in failures:
            print(f"FAILED seed {seed}: {why}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_render(args) -> int:
    manifest = load_manifest(args.manifest)
    out = Path(args.out)
    _probe_writable(out)
    replay_manifest(manifest, out)
    print(f"re-rendered seed {manifest.seed} into {out}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    report = run_eval(args.gt, args.pred, args.mode, parse_dilations(args.dilations))
    print(report.to_text())
    if args.out:
        out = Path(args.out)
        _probe_writable(out)
        (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
        (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    return EXIT_OK


def _cmd_loss(args) -> int:
    pred = read_xyz_pfm(args.pred)
    gt = read_xyz_pfm(args.gt)
    mask = read_pgm(args.mask)
    pairs = build_pair_set(
        SegMask(mask.values & pred.valid & gt.valid), parse_dilations(args.dilations)
    )
    if args.kind == "translation_invariant":
        report = translation_invariant_loss(pred, gt, pairs)
    else:
        report = scale_invariant_loss(pred, gt, pairs)
    k = report.k_used.k if report.k_used else None
    print(f"kind: {args.kind}")
    print(f"value: {report.value!r}")
    print(f"k: {k!r}")
    print(f"control_term_active: {report.control_term_active}")
    print(f"pair_count: {report.pair_count}")
    return EXIT_OK


def _cmd_clean_depth(args) -> int:
    depth = read_depth_pfm(args.depth)
    mask = read_pgm(args.mask)
    if args.manifest:
        camera = load_manifest(args.manifest).camera
    elif None not in (args.fx, args.fy, args.cx, args.cy):
        camera = camera_from_dict(
            {
                "fx": args.fx, "fy": args.fy, "cx": args.cx, "cy": args.cy,
                "width": depth.width, "height": depth.height,
                "rotation": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
                "translation": [0, 0, 0],
            }
        )
    else:
        raise _UsageError("clean-depth needs --manifest or all of --fx/--fy/--cx/--cy")
    cleaned = clean_depth(depth, camera, mask, max_offset=args.max_offset)
    write_pfm(args.out, cleaned)
    removed = int(depth.valid.sum() - cleaned.valid.sum())
    print(f"removed {removed} pixels; wrote {args.out}")
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "render": _cmd_render,
    "eval": _cmd_eval,
    "loss": _cmd_loss,
    "clean-depth": _cmd_clean_depth,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (VesselXyzError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
