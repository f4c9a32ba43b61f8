"""Per-sample composition: draw primitives, rasterize them onto the voxel
grid, merge intensities, assign labels, and drive whole-dataset generation.

Volumes are arrays of shape (D, H, W) indexed [z, y, x]; their C-order bytes
are exactly the x-fastest wire layout.  Every sample is a pure function of
(config, master_seed, sample_index): workers only decide *which* samples they
compute, never what the bytes are.
"""

from __future__ import annotations

import functools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import AffineTransform, to_canonical
from .library import (
    SdfInstance,
    ShapeLibrary,
    ShapeRecipe,
    derive_sample_seed,
    instantiate,
    make_rng,
)
from .texture import (
    IDENTITY_DISPLACEMENT,
    UNIFORM_MAPPER,
    DisplacementSpec,
    MapperSpec,
    VariantTable,
    displacement_bound,
    eval_displacement,
    eval_mapper,
)

MODES = ("segmentation", "classification")
MAX_LABEL = 109

# transform sampling ranges (normalized units)
SCALE_RANGE = (0.15, 0.4)
SHEAR_RANGE = (-0.25, 0.25)
TRANSLATION_RANGE = (-0.6, 0.6)


@dataclass(frozen=True)
class GridSpec:
    """Voxel grid over the normalized cube (-1, 1)^3.

    Voxel (i, j, k) is centered at (2(i+0.5)/W - 1, ...) per axis, so
    centers never touch the domain boundary.
    """

    W: int = 96
    H: int = 96
    D: int = 96

    def __post_init__(self):
        if min(self.W, self.H, self.D) < 8:
            raise ValueError(f"every grid dimension must be >= 8, got {self.W}x{self.H}x{self.D}")

    @property
    def shape(self) -> tuple[int, int, int]:
        """Array shape (D, H, W) for [z, y, x] indexing."""
        return (self.D, self.H, self.W)

    def axis_coords(self, n: int) -> np.ndarray:
        return 2.0 * (np.arange(n) + 0.5) / n - 1.0

    def points(self) -> np.ndarray:
        """Voxel-center world coordinates, shape (D, H, W, 3) with xyz last."""
        return _grid_points(self.W, self.H, self.D)


@functools.lru_cache(maxsize=4)
def _grid_points(w: int, h: int, d: int) -> np.ndarray:
    gx = 2.0 * (np.arange(w) + 0.5) / w - 1.0
    gy = 2.0 * (np.arange(h) + 0.5) / h - 1.0
    gz = 2.0 * (np.arange(d) + 0.5) / d - 1.0
    zz, yy, xx = np.meshgrid(gz, gy, gx, indexing="ij")
    pts = np.stack((xx, yy, zz), axis=-1)
    pts.setflags(write=False)
    return pts


@dataclass
class PrimitiveInstance:
    """One placed object; mask and voxel count are filled in by rendering."""

    class_id: int
    sdf: SdfInstance
    canonical_field: Callable[[np.ndarray], np.ndarray]
    transform: AffineTransform
    displacement: DisplacementSpec
    mapper: MapperSpec
    displacement_variant: int | None
    mapper_variant: int | None
    v: int | None = None
    mask: np.ndarray | None = None


@dataclass
class LabeledVolume:
    """A rendered sample: intensity everywhere, labels per voxel or one id."""

    intensity: np.ndarray  # (D, H, W) float32 in [0, 1]
    labels: np.ndarray | None  # (D, H, W) uint16, segmentation only
    class_id: int | None  # classification only
    mode: str
    sample_index: int = -1
    sample_seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        i = self.intensity
        if i.dtype != np.float32 or i.ndim != 3:
            raise ValueError("intensity must be a 3D float32 array")
        if not np.all(np.isfinite(i)):
            raise ValueError("intensity contains NaN or Inf")
        if i.size and (i.min() < 0.0 or i.max() > 1.0):
            raise ValueError("intensity out of [0, 1]")
        if self.mode == "segmentation":
            a = self.labels
            if a is None or a.dtype != np.uint16 or a.shape != i.shape:
                raise ValueError("segmentation needs a uint16 label volume matching intensity")
            if a.size and a.max() > MAX_LABEL:
                raise ValueError(f"labels exceed {MAX_LABEL}")
        else:
            if self.class_id is None or not 1 <= self.class_id <= MAX_LABEL:
                raise ValueError("classification needs a class id in 1..109")


@dataclass(frozen=True)
class SampleConfig:
    """Everything that determines a dataset, apart from N and the sink."""

    library: ShapeLibrary
    variants: VariantTable
    mode: str = "segmentation"
    objects: int | tuple[int, int] = 20
    grid: GridSpec = GridSpec()
    displacement_enabled: bool = True
    mapper_enabled: bool = True
    translation_enabled: bool = True
    intensity_support: str = "interior"
    master_seed: int = 0
    scale_range: tuple[float, float] = SCALE_RANGE
    shear_range: tuple[float, float] = SHEAR_RANGE
    translation_range: tuple[float, float] = TRANSLATION_RANGE

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.intensity_support not in ("interior", "global"):
            raise ValueError(f"intensity_support must be interior or global, got {self.intensity_support!r}")
        k = self.objects
        if isinstance(k, tuple):
            if len(k) != 2 or k[0] > k[1] or k[0] < 1:
                raise ValueError(f"object count range must be (lo, hi) with 1 <= lo <= hi, got {k}")
        elif k < 1:
            raise ValueError(f"object count must be >= 1, got {k}")
        if self.mode == "classification":
            if self.objects != 1:
                raise ValueError("classification requires exactly 1 object per sample")
            if self.translation_enabled:
                raise ValueError("classification requires translation disabled")

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "objects": list(self.objects) if isinstance(self.objects, tuple) else self.objects,
            "grid": [self.grid.W, self.grid.H, self.grid.D],
            "displacement_enabled": self.displacement_enabled,
            "mapper_enabled": self.mapper_enabled,
            "translation_enabled": self.translation_enabled,
            "intensity_support": self.intensity_support,
            "master_seed": self.master_seed,
            "scale_range": list(self.scale_range),
            "shear_range": list(self.shear_range),
            "translation_range": list(self.translation_range),
            "library_classes": [r.class_id for r in self.library.recipes],
            "variant_tables": self.variants.to_dict(),
        }


def _rotation_from_normals(q: np.ndarray) -> np.ndarray:
    """Uniform SO(3) sample: normalize 4 standard normals into a quaternion."""
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def sample_primitive(config: SampleConfig, rng: np.random.Generator,
                     forced_recipe: ShapeRecipe | None = None) -> PrimitiveInstance:
    """Draw one primitive.

    Draw order (a determinism contract): class id (skipped when a recipe is
    forced), shape parameters, rotation (4 normals), shear (3), scale (3),
    translation (3, skipped when disabled), displacement variant index
    (skipped when disabled), mapper variant index (skipped when disabled).
    """
    lib = config.library
    if forced_recipe is not None:
        recipe = forced_recipe
    else:
        recipe = lib.recipes[int(rng.integers(0, len(lib.recipes)))]
    inst = instantiate(recipe, rng)

    rot = _rotation_from_normals(rng.standard_normal(4))
    shear = np.eye(3)
    shear[0, 1], shear[0, 2], shear[1, 2] = rng.uniform(*config.shear_range, size=3)
    scale = np.diag(rng.uniform(*config.scale_range, size=3))
    if config.translation_enabled:
        t = rng.uniform(*config.translation_range, size=3)
    else:
        t = np.zeros(3)
    transform = AffineTransform(rot, shear @ scale, t)

    if config.displacement_enabled:
        di = int(rng.integers(0, len(config.variants.displacement_variants)))
        disp = config.variants.displacement_variants[di]
    else:
        di, disp = None, IDENTITY_DISPLACEMENT
    if config.mapper_enabled:
        mi = int(rng.integers(0, len(config.variants.mapper_variants)))
        mapper = config.variants.mapper_variants[mi]
    else:
        mi, mapper = None, UNIFORM_MAPPER

    # a centered canonical field keeps the single classification object's
    # centroid on the grid center; linear maps preserve that exactly
    fld = inst.field if config.translation_enabled else inst.centered_field()
    return PrimitiveInstance(
        class_id=recipe.class_id, sdf=inst, canonical_field=fld,
        transform=transform, displacement=disp, mapper=mapper,
        displacement_variant=di, mapper_variant=mi,
    )


def _support_slab(grid: GridSpec, prim: PrimitiveInstance) -> tuple[slice, slice, slice] | None:
    """Voxel slab guaranteed to contain every voxel the primitive can mark.

    Canonical shapes live in the 1.5 ball and the displaced surface moves by
    at most the displacement bound, so world support fits in a ball of radius
    (1.5 + bound) * smax(S) around the translation (rotation is isometric).
    Returns None when no voxel center falls inside the slab.
    """
    radius = (1.5 + displacement_bound(prim.displacement) + 1e-6) \
        * float(np.linalg.norm(prim.transform.shear_scale, 2))
    t = prim.transform.translation
    out = []
    for n, c in ((grid.D, 2), (grid.H, 1), (grid.W, 0)):
        coords = grid.axis_coords(n)
        lo = int(np.searchsorted(coords, t[c] - radius, "left"))
        hi = int(np.searchsorted(coords, t[c] + radius, "right"))
        if lo >= hi:
            return None
        out.append(slice(lo, hi))
    return tuple(out)


def render_primitive(grid: GridSpec, prim: PrimitiveInstance,
                     intensity_support: str = "interior"):
    """Evaluate one primitive over the grid.

    Returns (intensity field, mask, voxel count) and stores mask and count
    on the primitive.  The displaced distance d = phi(x') + delta(x') is
    evaluated in 64-bit; with interior support the mapper output is zeroed
    outside the mask, so evaluation is restricted to the support slab.
    Global support evaluates the full grid (the mapper tail never vanishes).
    """
    pts = grid.points()
    if intensity_support == "interior":
        mask = np.zeros(grid.shape, dtype=bool)
        intensity = np.zeros(grid.shape)
        slab = _support_slab(grid, prim)
        if slab is not None:
            canon = to_canonical(pts[slab], prim.transform)
            d = prim.canonical_field(canon) + eval_displacement(prim.displacement, canon)
            m = d <= 0.0
            mask[slab] = m
            intensity[slab] = np.where(m, eval_mapper(prim.mapper, d), 0.0)
    else:
        canon = to_canonical(pts, prim.transform)
        d = prim.canonical_field(canon) + eval_displacement(prim.displacement, canon)
        mask = d <= 0.0
        intensity = eval_mapper(prim.mapper, d)
    prim.mask = mask
    prim.v = int(np.count_nonzero(mask))
    return intensity, mask, prim.v


def merge_intensities(fields: list[np.ndarray], grid: GridSpec) -> np.ndarray:
    """Voxelwise sum of per-primitive intensities, clipped to [0, 1]."""
    out = np.zeros(grid.shape)
    for f in fields:
        if f.shape != out.shape:
            raise ValueError(f"field shape {f.shape} does not match grid {out.shape}")
        out += f
    return np.clip(out, 0.0, 1.0)


def assign_labels(prims: list[PrimitiveInstance], grid: GridSpec) -> np.ndarray:
    """Paint class ids largest-volume first so the smallest writer wins.

    Volume ties paint the larger original index later, i.e. it wins.
    """
    for p in prims:
        if p.mask is None or p.v is None:
            raise ValueError("primitives must be rendered before labeling")
    labels = np.zeros(grid.shape, dtype=np.uint16)
    order = sorted(range(len(prims)), key=lambda k: (-prims[k].v, k))
    for k in order:
        labels[prims[k].mask] = prims[k].class_id
    return labels


def _draw_count(config: SampleConfig, rng: np.random.Generator) -> int:
    if isinstance(config.objects, tuple):
        lo, hi = config.objects
        return int(rng.integers(lo, hi + 1))
    return int(config.objects)


def generate_sample(config: SampleConfig, sample_index: int,
                    forced_recipe: ShapeRecipe | None = None):
    """Produce one sample and its provenance record.

    Seeds a fresh stream from (master_seed, sample_index), draws the object
    count (if configured as a range), then samples, renders, merges and
    labels.  Returns (LabeledVolume, provenance dict).
    """
    seed = derive_sample_seed(config.master_seed, sample_index)
    rng = make_rng(seed)
    count = _draw_count(config, rng)

    prims = [sample_primitive(config, rng, forced_recipe) for _ in range(count)]
    fields = []
    for prim in prims:
        intensity, _, _ = render_primitive(config.grid, prim, config.intensity_support)
        fields.append(intensity)

    merged = merge_intensities(fields, config.grid).astype(np.float32)
    if config.mode == "segmentation":
        labels = assign_labels(prims, config.grid)
        class_id = None
    else:
        labels = None
        class_id = prims[0].class_id

    volume = LabeledVolume(
        intensity=merged, labels=labels, class_id=class_id,
        mode=config.mode, sample_index=sample_index, sample_seed=seed,
    )
    provenance = {
        "sample_index": sample_index,
        "sample_seed": seed,
        "mode": config.mode,
        "grid": [config.grid.W, config.grid.H, config.grid.D],
        "object_count": count,
        "primitives": [_primitive_record(p) for p in prims],
    }
    return volume, provenance


def _primitive_record(p: PrimitiveInstance) -> dict:
    if p.v:
        idx = np.argwhere(p.mask)  # (n, 3) in (z, y, x) order
        centroid = idx[:, ::-1].mean(axis=0).tolist()  # (x, y, z) voxel units
    else:
        centroid = None
    return {
        "class_id": p.class_id,
        "params": p.sdf.params,
        "rotation": p.transform.rotation.tolist(),
        "shear_scale": p.transform.shear_scale.tolist(),
        "translation": p.transform.translation.tolist(),
        "displacement_variant": p.displacement_variant,
        "mapper_variant": p.mapper_variant,
        "displacement": p.displacement.family,
        "mapper": p.mapper.family,
        "v": p.v,
        "mask_centroid_voxels": centroid,
    }


def _run_one(index: int, forced_class: int | None):
    config = _WORKER_STATE["config"]
    recipe = config.library.by_id(forced_class) if forced_class is not None else None
    volume, provenance = generate_sample(config, index, recipe)
    sink = _WORKER_STATE["sink"]
    return sink(volume, provenance)


_WORKER_STATE: dict = {}


def _init_worker(config: SampleConfig, sink):
    _WORKER_STATE["config"] = config
    _WORKER_STATE["sink"] = sink


def generate_dataset(config: SampleConfig, count: int, sink, threads: int = 1,
                     per_class: bool = False, progress=None) -> list:
    """Generate samples 0..N-1 and feed each through ``sink``.

    ``sink(volume, provenance)`` runs inside the worker and returns a small
    picklable record; records come back in index order.  In per-class mode
    (classification) ``count`` means samples per class and sample i is
    forced to class ``recipes[i // count]``, giving exactly balanced labels.
    ``progress`` (if given) is called with each record as it completes.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if per_class:
        classes = [r.class_id for r in config.library.recipes]
        jobs = [(i, classes[i // count]) for i in range(count * len(classes))]
    else:
        jobs = [(i, None) for i in range(count)]

    records = []

    def consume(iterator):
        for record in iterator:
            records.append(record)
            if progress is not None:
                progress(record)

    if threads <= 1:
        _init_worker(config, sink)
        consume(_run_one(i, c) for i, c in jobs)
    else:
        with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker,
                                 initargs=(config, sink)) as pool:
            consume(pool.map(_run_one, *zip(*jobs), chunksize=8))
    return records
