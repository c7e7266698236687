"""Command-line frontend for the TSSI toolkit.

Machine-readable results (stats, summaries, diagnostics) go to stdout as
JSON; human diagnostics go to stderr. Exit codes: 0 success, 1 usage
error, 2 data error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import augment as aug
from . import dataset as ds
from . import encode as enc
from . import sequence as seq
from . import topology as topo
from .errors import IoFailure, TssiError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we use 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="tssi", description="Tree-structure skeleton image toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_topology_flags(p, default_variant="standard68"):
        p.add_argument("--topology", type=Path, help="topology data file overriding the built-in table")
        p.add_argument("--variant", choices=topo.VARIANTS, default=default_variant,
                       help="built-in topology variant (default: the manifest's, where one applies)")

    p = sub.add_parser("validate", help="check a topology, manifest, and its keypoint files")
    add_topology_flags(p)
    p.add_argument("--manifest", type=Path, help="manifest to validate along with its keypoint files")

    p = sub.add_parser("stats", help="print length statistics of the training split")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--split", default="train", choices=ds.SPLITS)
    p.add_argument("--write", action="store_true", help="store the stats back into the manifest")

    p = sub.add_parser("encode", help="encode every manifest sample to raw_f32 tensors")
    add_topology_flags(p, default_variant=None)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--height", type=int, help="override the target height H")
    p.add_argument("--channel-policy", choices=enc.CHANNEL_POLICIES, default="zero_z")
    p.add_argument("--augment", nargs="+", choices=("scale", "flip", "speed"), default=[],
                   help="augmentation techniques for training copies")
    p.add_argument("--copies", type=int, default=0, help="augmented copies per training sample")
    p.add_argument("--seed", type=int, default=0, help="seed driving all augmentation randomness")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--strict", action="store_true", help="treat skipped samples as failures")

    p = sub.add_parser("augment", help="apply one augmentation to one sample (debugging aid)")
    add_topology_flags(p)
    p.add_argument("--keypoints", type=Path, required=True)
    p.add_argument("--op", choices=("scale", "flip", "speed"), required=True)
    p.add_argument("--factor", type=float, help="scale factor in [0.5, 1.0]")
    p.add_argument("--target-length", type=int, help="row count for the speed op")
    p.add_argument("--normalization", choices=seq.NORMALIZATION_MODES, default="divide_by_frame")
    p.add_argument("--channel-policy", choices=enc.CHANNEL_POLICIES, default="zero_z")
    p.add_argument("--out", type=Path, required=True, help="output raw_f32 file")

    p = sub.add_parser("render", help="write PNG previews for manifest samples")
    add_topology_flags(p, default_variant=None)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--height", type=int, help="override the target height H")
    p.add_argument("--channel-policy", choices=enc.CHANNEL_POLICIES, default="zero_z")
    p.add_argument("sample_ids", nargs="+", help="samples to render")
    return parser


def _load_graph(args) -> topo.SkeletonGraph:
    if args.topology is not None:
        return topo.load_topology(args.topology)
    return topo.build_default_graph(args.variant)


def _cmd_validate(args) -> int:
    report = {"topology": [], "manifest": [], "keypoints": []}
    graph = _load_graph(args)
    diagnostics = topo.validate_graph(graph)
    report["topology"] = [{"code": d.code, "detail": d.detail} for d in diagnostics]
    for d in diagnostics:
        print(f"topology {d}", file=sys.stderr)

    if args.manifest is not None:
        try:
            manifest = ds.load_manifest(args.manifest)
        except TssiError as exc:
            report["manifest"].append(str(exc))
            print(f"manifest: {exc}", file=sys.stderr)
            manifest = None
        if manifest is not None:
            for item in manifest.items:
                try:
                    ds.read_keypoints(item.keypoints_path)
                except TssiError as exc:
                    report["keypoints"].append({"sample_id": item.sample_id, "error": str(exc)})
                    print(f"keypoints {item.sample_id}: {exc}", file=sys.stderr)
    print(json.dumps(report, indent=2, sort_keys=True))
    clean = not (report["topology"] or report["manifest"] or report["keypoints"])
    return EXIT_OK if clean else EXIT_DATA


def _cmd_stats(args) -> int:
    manifest = ds.load_manifest(args.manifest)
    stats = ds.compute_stats(manifest, split=args.split)
    print(json.dumps(stats.to_dict(), indent=2, sort_keys=True))
    if args.write:
        ds.save_manifest(
            ds.DatasetManifest(
                items=manifest.items,
                label_map=manifest.label_map,
                topology_variant=manifest.topology_variant,
                normalization=manifest.normalization,
                stats=stats,
            ),
            args.manifest,
        )
    return EXIT_OK


def _cmd_encode(args) -> int:
    manifest = ds.load_manifest(args.manifest)
    augmentation = None
    if args.augment:
        augmentation = aug.AugmentationConfig(
            enable_scale="scale" in args.augment,
            enable_flip="flip" in args.augment,
            enable_speed="speed" in args.augment,
            seed=args.seed,
        )
    graph = None
    if args.topology is not None:
        graph = topo.load_topology(args.topology)
    elif args.variant is not None and args.variant != manifest.topology_variant:
        graph = topo.build_default_graph(args.variant)
    options = ds.EncodeOptions(
        height=args.height,
        channel_policy=args.channel_policy,
        augmentation=augmentation,
        copies=args.copies,
        workers=args.workers,
        graph=graph,
    )
    summary = ds.encode_dataset(manifest, args.out, options)
    print(json.dumps(summary.to_dict(), indent=2, sort_keys=True))
    for sid, why in summary.skipped:
        print(f"skipped {sid}: {why}", file=sys.stderr)
    if args.strict and summary.skipped:
        return EXIT_DATA
    return EXIT_OK


def _cmd_augment(args) -> int:
    graph = _load_graph(args)
    order = topo.euler_traversal(graph)
    sequence = ds.read_keypoints(args.keypoints)
    pre = seq.preprocess(sequence, args.normalization)
    if args.op == "scale":
        if args.factor is None:
            raise _UsageError("--factor is required for the scale op")
        pre = aug.scale_skeleton(pre, args.factor)
        image = enc.assemble(pre, order, args.channel_policy)
    elif args.op == "flip":
        pre = aug.flip_skeleton(pre, topo.build_mirror_table(graph))
        image = enc.assemble(pre, order, args.channel_policy)
    else:
        if args.target_length is None:
            raise _UsageError("--target-length is required for the speed op")
        image = enc.assemble(pre, order, args.channel_policy)
        image = aug.speed_resample(image, args.target_length)
    enc.export(image, "raw_f32", args.out)
    print(json.dumps({"out": str(args.out), "height": image.height, "width": image.width}))
    return EXIT_OK


def _cmd_render(args) -> int:
    manifest = ds.load_manifest(args.manifest)
    if args.topology is not None:
        graph = topo.load_topology(args.topology)
    else:
        graph = topo.build_default_graph(args.variant or manifest.topology_variant)
    order = topo.euler_traversal(graph)
    height = args.height
    if height is None:
        stats = manifest.stats or ds.compute_stats(manifest)
        height = stats.height
    by_id = {it.sample_id: it for it in manifest.items}
    args.out.mkdir(parents=True, exist_ok=True)
    written = []
    for sid in args.sample_ids:
        if sid not in by_id:
            raise TssiError(f"sample {sid!r} is not in the manifest")
        sequence = ds.read_keypoints(by_id[sid].keypoints_path)
        pre = seq.preprocess(sequence, manifest.normalization)
        image = enc.fit_height(enc.assemble(pre, order, args.channel_policy), height)
        target = args.out / f"{sid}.png"
        enc.export(image, "png_preview", target)
        written.append(str(target))
    print(json.dumps({"rendered": written}, indent=2))
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "stats": _cmd_stats,
    "encode": _cmd_encode,
    "augment": _cmd_augment,
    "render": _cmd_render,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IoFailure as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TssiError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
