"""Validation suites behind ``sdfsynth validate``, with CSV + figure output.

Each suite returns rows of the form {suite, check, value, threshold, passed};
the report writer serializes them to ``report.csv`` and renders a few
matplotlib figures next to it.  Heavy lifting is delegated to `oracle`.
"""

from __future__ import annotations

import csv
import tempfile
from pathlib import Path

import numpy as np

from . import oracle
from .compose import (
    GridSpec,
    PrimitiveInstance,
    SampleConfig,
    assign_labels,
    render_primitive,
    sample_primitive,
)
from .geometry import (
    Polygon2D,
    ScaleProfile,
    extrude,
    gen_polygon,
    revolve,
    sdf_cone,
    sdf_octahedron,
    sdf_polygon,
    sdf_sphere,
)
from .library import build_default_library, derive_sample_seed, make_rng
from .storage import DatasetSink
from .texture import default_variant_table

EIKONAL_TOL = 1e-2
EIKONAL_MIN_FRACTION = 0.99


def _row(suite: str, check: str, value: float, threshold: str, passed: bool) -> dict:
    return {"suite": suite, "check": check, "value": value,
            "threshold": threshold, "passed": passed}


def reference_fields() -> dict:
    """Named exact-SDF constructions used by the eikonal and distance checks."""
    circle = lambda uv: np.linalg.norm(uv, axis=-1) - 0.25
    hexagon = Polygon2D(np.array([
        [np.cos(a), np.sin(a)] for a in np.linspace(0.3, 0.3 + 2 * np.pi, 6, endpoint=False)
    ]), 0.4, 1.0)
    return {
        "sphere": lambda p: sdf_sphere(p, 0.8),
        "octahedron": lambda p: sdf_octahedron(p, 0.8),
        "cone": lambda p: sdf_cone(p, np.pi / 6, 1.0),
        "torus": revolve(circle, 0.7),
        "extrusion": extrude(lambda uv: sdf_polygon(uv, hexagon), 0.7,
                             ScaleProfile("constant", 0.55)),
    }


def suite_eikonal(seed: int = 0, points: int = 10_000, details: dict | None = None) -> list[dict]:
    rng = make_rng(derive_sample_seed(seed, 101))
    rows = []
    for name, phi in reference_fields().items():
        pts = rng.uniform(-1.4, 1.4, size=(points, 3))
        keep = np.abs(phi(pts)) > 2.0 * oracle.DEFAULT_FD_STEP
        rep = oracle.gradient_report(phi, pts[keep], tol=EIKONAL_TOL)
        rows.append(_row("eikonal", name, rep.fraction_within,
                         f">={EIKONAL_MIN_FRACTION}", rep.fraction_within >= EIKONAL_MIN_FRACTION))
        if details is not None:
            mag = np.linalg.norm(oracle.fd_gradient(phi, pts[keep]), axis=-1)
            details.setdefault("eikonal_deviations", []).append(np.abs(mag - 1.0))
    return rows


def suite_sign(seed: int = 0, polygons: int = 20, points: int = 10_000) -> list[dict]:
    rng = make_rng(derive_sample_seed(seed, 202))
    worst = 1.0
    rows = []
    for i in range(polygons):
        n = 3 + i % 7
        poly = gen_polygon(n, 0.4, 1.0, rng)
        uv = rng.uniform(-1.3, 1.3, size=(points, 2))
        phi = sdf_polygon(uv, poly)
        keep = np.abs(phi) > 1e-6
        inside = np.fromiter((oracle.winding_inside(u, poly) for u in uv[keep]),
                             dtype=bool, count=int(keep.sum()))
        agree = float(np.mean((phi[keep] < 0) == inside))
        worst = min(worst, agree)
    rows.append(_row("sign", f"{polygons} polygons x {points} points", worst, "==1.0", worst == 1.0))
    return rows


def label_fixture(rng: np.random.Generator, grid: GridSpec, count: int,
                  config: SampleConfig) -> list[PrimitiveInstance]:
    """Rendered primitives on a small grid, plus an engineered volume tie."""
    prims = [sample_primitive(config, rng) for _ in range(count)]
    for p in prims:
        render_primitive(grid, p, config.intensity_support)
    # tie case: clone a mask shifted with wraparound — same voxel count,
    # different class — so equal-volume resolution is actually exercised
    donor = max(prims, key=lambda p: p.v)
    if donor.v > 0:
        clone = PrimitiveInstance(
            class_id=donor.class_id % 109 + 1, sdf=donor.sdf,
            canonical_field=donor.canonical_field, transform=donor.transform,
            displacement=donor.displacement, mapper=donor.mapper,
            displacement_variant=None, mapper_variant=None,
            v=donor.v, mask=np.roll(donor.mask, 3, axis=2),
        )
        prims.append(clone)
    return prims


def suite_labels(seed: int = 0, fixtures: int = 10) -> list[dict]:
    lib = build_default_library()
    table = default_variant_table()
    rng = make_rng(derive_sample_seed(seed, 303))
    mismatches = 0
    for i in range(fixtures):
        n = int(rng.integers(16, 33))
        grid = GridSpec(n, n, n)
        config = SampleConfig(library=lib, variants=table, grid=grid,
                              objects=int(rng.integers(2, 8)), master_seed=seed)
        prims = label_fixture(rng, grid, config.objects, config)
        fast = assign_labels(prims, grid)
        slow = oracle.brute_force_labels(prims, grid)
        mismatches += int(np.count_nonzero(fast != slow))
    return [_row("labels", f"{fixtures} fixtures vs brute force", mismatches, "==0", mismatches == 0)]


def suite_determinism(seed: int = 0) -> list[dict]:
    from .compose import generate_dataset

    lib = build_default_library()
    table = default_variant_table()
    config = SampleConfig(library=lib, variants=table, grid=GridSpec(32, 32, 32),
                          objects=5, master_seed=seed)
    sums = []
    for threads in (1, 2):
        with tempfile.TemporaryDirectory() as d:
            records = generate_dataset(config, 3, DatasetSink(d), threads=threads)
            sums.append([r["checksum"] for r in records])
    same = sums[0] == sums[1]
    return [_row("determinism", "3 samples, 1 vs 2 threads", int(same), "identical checksums", same)]


def suite_distribution(seed: int = 0, samples: int = 500, objects: int = 20,
                       details: dict | None = None) -> list[dict]:
    lib = build_default_library()
    table = default_variant_table()
    config = SampleConfig(library=lib, variants=table, objects=objects, master_seed=seed)
    counts = np.zeros(110, dtype=int)
    for i in range(samples):
        rng = make_rng(derive_sample_seed(seed, i))
        for _ in range(objects):
            counts[sample_primitive(config, rng).class_id] += 1
    draws = samples * objects
    expected = draws / len(lib.recipes)
    band = 4.0 * np.sqrt(expected)
    dev = np.abs(counts[1:110] - expected)
    passed = bool(dev.max() <= band)
    if details is not None:
        details["class_counts"] = counts[1:110]
        details["expected"] = expected
        details["band"] = band
    return [_row("distribution", f"{draws} draws over 109 classes",
                 float(dev.max()), f"<= {band:.1f} from E={expected:.1f}", passed)]


SUITES = {
    "eikonal": suite_eikonal,
    "sign": suite_sign,
    "labels": suite_labels,
    "determinism": suite_determinism,
    "distribution": suite_distribution,
}


def run_suites(names: list[str], seed: int = 0, report_dir: str | Path | None = None) -> list[dict]:
    details: dict = {}
    rows: list[dict] = []
    for name in names:
        fn = SUITES[name]
        if name in ("eikonal", "distribution"):
            rows.extend(fn(seed=seed, details=details))
        else:
            rows.extend(fn(seed=seed))
    if report_dir is not None:
        write_report(Path(report_dir), rows, details)
    return rows


def write_report(report_dir: Path, rows: list[dict], details: dict) -> None:
    """CSV of all checks plus figures for the distribution-shaped suites."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    report_dir.mkdir(parents=True, exist_ok=True)
    with open(report_dir / "report.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["suite", "check", "value", "threshold", "passed"])
        writer.writeheader()
        writer.writerows(rows)

    if "eikonal_deviations" in details:
        dev = np.concatenate(details["eikonal_deviations"])
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.hist(np.clip(dev, 1e-12, None), bins=np.logspace(-12, 0, 60))
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.axvline(EIKONAL_TOL, color="crimson", ls="--", label=f"tolerance {EIKONAL_TOL}")
        ax.set_xlabel("| |grad phi| - 1 |")
        ax.set_ylabel("points")
        ax.set_title("Gradient magnitude deviation")
        ax.legend()
        fig.tight_layout()
        fig.savefig(report_dir / "eikonal_deviations.png", dpi=120)
        plt.close(fig)

    if "class_counts" in details:
        counts = details["class_counts"]
        e, band = details["expected"], details["band"]
        fig, ax = plt.subplots(figsize=(10, 4))
        ax.bar(np.arange(1, 110), counts, width=1.0, color="#4878a8")
        ax.axhline(e, color="black", lw=1, label="expected")
        ax.axhline(e + band, color="crimson", ls="--", lw=1, label="+/- 4 sqrt(E)")
        ax.axhline(max(e - band, 0), color="crimson", ls="--", lw=1)
        ax.set_xlabel("class id")
        ax.set_ylabel("draws")
        ax.set_title("Class draw balance")
        ax.legend()
        fig.tight_layout()
        fig.savefig(report_dir / "class_balance.png", dpi=120)
        plt.close(fig)
