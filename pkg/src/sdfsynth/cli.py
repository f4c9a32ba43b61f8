"""Command-line surface.

Subcommands: gen-seg, gen-cls, preview, validate, list-shapes,
describe-class.  Flags override values from an optional JSON config file,
which in turn overrides the built-in defaults; the fully resolved
configuration is echoed into every dataset manifest.

Exit codes: 0 success, 1 runtime/I-O failure, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .compose import GridSpec, SampleConfig, generate_dataset
from .library import build_default_library, load_library, make_rng, select_subset
from .storage import (
    DatasetSink,
    build_manifest,
    content_checksum,
    export_slices,
    read_sample,
    write_manifest,
)
from .texture import VariantTable, default_variant_table

SUBSET_SELECTORS = {
    "default": "all",
    "ext10": "extrusion:10",
    "rev10": "revolution:10",
    "combined10": "combined:10",
}


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: config file must hold a JSON object")
    return doc


def _resolve(flag_value, file_config: dict, key: str, default):
    if flag_value is not None:
        return flag_value
    return file_config.get(key, default)


def _build_sample_config(args, mode: str) -> tuple[SampleConfig, dict]:
    cfg = _load_config_file(args.config)

    seed = int(_resolve(args.seed, cfg, "seed", 0))
    grid_v = _resolve(args.grid, cfg, "grid", 96 if mode == "segmentation" else 64)
    if isinstance(grid_v, list):
        grid = GridSpec(*[int(v) for v in grid_v])
    else:
        grid = GridSpec(int(grid_v), int(grid_v), int(grid_v))

    if mode == "segmentation":
        objects = _resolve(getattr(args, "objects", None), cfg, "objects", 20)
        if isinstance(objects, list):
            objects = (int(objects[0]), int(objects[1]))
        else:
            objects = int(objects)
        translation = bool(cfg.get("translation", True))
    else:
        objects = 1
        translation = False

    lib_path = _resolve(getattr(args, "library", None), cfg, "library_file", None)
    library = load_library(lib_path) if lib_path else build_default_library()
    subset_name = _resolve(getattr(args, "subset", None), cfg, "subset", "default")
    selector = SUBSET_SELECTORS.get(subset_name, subset_name)
    library = select_subset(library, selector, make_rng(seed))

    if "variant_tables" in cfg:
        variants = VariantTable.from_dict(cfg["variant_tables"])
    else:
        variants = default_variant_table()

    def _toggle(flag, key):
        v = _resolve(flag, cfg, key, "on")
        if v not in ("on", "off"):
            raise ValueError(f"{key} must be on or off, got {v!r}")
        return v == "on"

    sample_config = SampleConfig(
        library=library,
        variants=variants,
        mode=mode,
        objects=objects,
        grid=grid,
        displacement_enabled=_toggle(args.disp, "displacement"),
        mapper_enabled=_toggle(args.map, "mapper"),
        translation_enabled=translation,
        intensity_support=_resolve(getattr(args, "support", None), cfg, "intensity_support", "interior"),
        master_seed=seed,
        scale_range=tuple(cfg.get("scale_range", (0.15, 0.4))),
        shear_range=tuple(cfg.get("shear_range", (-0.25, 0.25))),
        translation_range=tuple(cfg.get("translation_range", (-0.6, 0.6))),
    )
    return sample_config, cfg


def _run_generation(args, config: SampleConfig, count: int, per_class: bool) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sink = DatasetSink(str(out))
    threads = args.threads or 1
    total = count * (len(config.library.recipes) if per_class else 1)

    done = 0
    t0 = time.time()

    def progress(_record):
        nonlocal done
        done += 1
        if done % 25 == 0 or done == total:
            print(f"\r{done}/{total} samples", end="", file=sys.stderr, flush=True)

    try:
        records = generate_dataset(config, count, sink, threads=threads,
                                   per_class=per_class, progress=progress)
    except Exception as exc:
        # salvage whatever finished so the output is at least inspectable
        entries = _collect_existing(out)
        manifest = build_manifest(config, entries, partial=True,
                                  **({"per_class": count} if per_class else {"num_samples": count}))
        write_manifest(out / "manifest.json", manifest)
        print(f"\nerror: generation aborted: {exc}", file=sys.stderr)
        print(f"partial manifest written to {out / 'manifest.json'}", file=sys.stderr)
        return 1

    manifest = build_manifest(config, records,
                              **({"per_class": count} if per_class else {"num_samples": count}))
    write_manifest(out / "manifest.json", manifest)
    dt = time.time() - t0
    print(f"\n{len(records)} samples -> {out} in {dt:.1f}s "
          f"({dt / max(len(records), 1):.2f}s/sample, {threads} workers)", file=sys.stderr)
    return 0


def _collect_existing(out: Path) -> list[dict]:
    entries = []
    for p in sorted(out.glob("sample_*.vol")):
        entries.append({"name": p.name, "checksum": content_checksum(p.read_bytes()),
                        "provenance": p.with_suffix(".json").name})
    return entries


def cmd_gen_seg(args) -> int:
    config, cfg = _build_sample_config(args, "segmentation")
    count = int(_resolve(args.num, cfg, "num", 5000))
    return _run_generation(args, config, count, per_class=False)


def cmd_gen_cls(args) -> int:
    config, cfg = _build_sample_config(args, "classification")
    per_class = int(_resolve(args.per_class, cfg, "per_class", 50))
    return _run_generation(args, config, per_class, per_class=True)


def cmd_preview(args) -> int:
    volume = read_sample(args.input)
    dim = {"z": volume.intensity.shape[0], "y": volume.intensity.shape[1],
           "x": volume.intensity.shape[2]}[args.axis]
    if args.indices:
        indices = args.indices
    else:
        k = args.slices
        indices = [((j + 1) * dim) // (k + 1) for j in range(k)]
    out = Path(args.out)
    written = export_slices(volume, args.axis, indices, out)
    for p in written:
        print(p)
    return 0


def cmd_validate(args) -> int:
    from .report import SUITES, run_suites

    names = list(SUITES) if args.suite == "all" else [args.suite]
    rows = run_suites(names, seed=args.seed, report_dir=args.report)
    failed = 0
    for r in rows:
        status = "PASS" if r["passed"] else "FAIL"
        failed += not r["passed"]
        print(f"[{status}] {r['suite']}: {r['check']} -> {r['value']} (need {r['threshold']})")
    if args.report:
        print(f"report written to {args.report}")
    return 0 if failed == 0 else 1


def cmd_list_shapes(args) -> int:
    lib = build_default_library()
    for r in lib.recipes:
        base = ""
        if r.base2d:
            base = f"{r.base2d['kind']}{r.base2d['n']}"
        detail = " ".join(filter(None, [
            base,
            f"profile={r.profile}" if r.profile else "",
            f"layers={r.layers}" if r.layers else "",
            "solid" if r.solid else "",
        ]))
        print(f"{r.class_id:4d}  {r.construction:15s} {detail}")
    return 0


def cmd_describe_class(args) -> int:
    lib = build_default_library()
    recipe = lib.by_id(args.class_id)  # KeyError -> exit 2 in main
    print(json.dumps(recipe.to_dict(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdfsynth",
        description="Deterministic synthetic labeled 3D volume generator built on signed distance fields.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_gen(p):
        p.add_argument("--out", required=True, help="output dataset directory")
        p.add_argument("--grid", type=int, default=None, help="cubic grid size")
        p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
        p.add_argument("--disp", choices=("on", "off"), default=None, help="displacement textures")
        p.add_argument("--map", choices=("on", "off"), default=None,
                       help="mapper variants (off = uniform inverse-cube)")
        p.add_argument("--threads", type=int, default=None, help="worker processes (default 1)")
        p.add_argument("--config", default=None, help="JSON config file; flags win on conflict")
        p.add_argument("--library", default=None, help="external recipe JSON instead of the built-in 109")

    p = sub.add_parser("gen-seg", help="generate a segmentation dataset")
    add_common_gen(p)
    p.add_argument("--num", type=int, default=None, help="sample count (default 5000)")
    p.add_argument("--objects", type=int, default=None, help="primitives per sample (default 20)")
    p.add_argument("--subset", default=None,
                   help="library subset: default|ext10|rev10|combined10 or name[:count]")
    p.set_defaults(func=cmd_gen_seg)

    p = sub.add_parser("gen-cls", help="generate a balanced classification dataset")
    add_common_gen(p)
    p.add_argument("--per-class", dest="per_class", type=int, default=None,
                   help="samples per class (default 50)")
    p.set_defaults(func=cmd_gen_cls)

    p = sub.add_parser("preview", help="export PNG slices from a sample file")
    p.add_argument("--input", required=True)
    p.add_argument("--axis", choices=("x", "y", "z"), default="z")
    p.add_argument("--slices", type=int, default=3, help="evenly spaced slice count")
    p.add_argument("--indices", type=int, nargs="*", default=None, help="explicit slice indices")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_preview)

    p = sub.add_parser("validate", help="run verification suites")
    p.add_argument("--suite", default="all",
                   choices=("eikonal", "sign", "labels", "determinism", "distribution", "all"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None, help="directory for report.csv and figures")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("list-shapes", help="print the class table")
    p.set_defaults(func=cmd_list_shapes)

    p = sub.add_parser("describe-class", help="print one recipe as JSON")
    p.add_argument("class_id", type=int)
    p.set_defaults(func=cmd_describe_class)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, LookupError) as exc:
        msg = exc.args[0] if exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
