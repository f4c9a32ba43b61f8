"""The shape-class registry: 109 recipes, per-class instantiation, seeded RNG.

Class identity is structural (construction kind, base shape, scale-profile
kind, hollow layer count); only continuous parameters vary per instance.
The enumeration ships as ``data/library.json`` so class ids stay stable
contracts; ``scripts/gen_data.py`` regenerates it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from .geometry import (
    Polygon2D,
    ScaleProfile,
    StarSpec,
    extrude,
    gen_polygon,
    hollow,
    revolve,
    sdf_cone,
    sdf_octahedron,
    sdf_polygon,
    sdf_sphere,
    sdf_star,
)

CLASS_COUNT = 109

CONSTRUCTIONS = (
    "sphere", "octahedron", "cone",
    "extrude", "revolve", "hollow_extrude", "hollow_revolve",
)

#: Identifier of the pseudo-random stream, pinned into every manifest.
#: Draw sequences are stable for a fixed numpy version, hence the pin.
RNG_ALGORITHM = f"numpy.random.PCG64 (numpy {np.__version__})"

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def make_rng(seed: int) -> np.random.Generator:
    """The package-wide RngStream: a PCG64-backed numpy Generator."""
    return np.random.Generator(np.random.PCG64(seed))


def _splitmix64(z: int) -> int:
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_sample_seed(master_seed: int, sample_index: int) -> int:
    """Per-sample seed: an avalanche mix of master seed and index.

    Composed of bijections on 64-bit words, so for a fixed master seed
    distinct indices can never collide.  This is what makes generation
    order (and thus worker count) irrelevant to the output.
    """
    if sample_index < 0:
        raise ValueError(f"sample index must be >= 0, got {sample_index}")
    return _splitmix64((master_seed & _MASK64) ^ _splitmix64(sample_index & _MASK64))


# ---------------------------------------------------------------------------
# Recipes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShapeRecipe:
    """One shape class: fixed structure plus sampleable parameter ranges."""

    class_id: int
    construction: str
    ranges: dict
    base2d: dict | None = None
    profile: str | None = None
    layers: int | None = None
    solid: bool | None = None

    def __post_init__(self):
        if not 1 <= self.class_id <= CLASS_COUNT:
            raise ValueError(f"class_id must be in 1..{CLASS_COUNT}, got {self.class_id}")
        if self.construction not in CONSTRUCTIONS:
            raise ValueError(f"unknown construction {self.construction!r}")
        needs_base = self.construction not in ("sphere", "octahedron", "cone")
        if needs_base and not self.base2d:
            raise ValueError(f"{self.construction} requires a 2D base shape")
        if self.construction in ("extrude", "hollow_extrude") and self.profile not in (
                "constant", "linear", "smooth"):
            raise ValueError(f"extrusion requires a profile kind, got {self.profile!r}")
        if self.construction.startswith("hollow") and self.layers not in (1, 2):
            raise ValueError(f"hollow constructions use 1 or 2 layers, got {self.layers}")

    def category(self) -> str:
        if self.construction in ("sphere", "octahedron", "cone"):
            return "primitive"
        if self.construction == "extrude":
            return "extrusion"
        return "revolution_hollowing"

    def to_dict(self) -> dict:
        out = {"class_id": self.class_id, "construction": self.construction,
               "ranges": self.ranges}
        for key in ("base2d", "profile", "layers", "solid"):
            v = getattr(self, key)
            if v is not None:
                out[key] = v
        return out


@dataclass(frozen=True)
class SdfInstance:
    """An evaluable canonical field plus the parameters that produced it."""

    recipe: ShapeRecipe
    field: Callable[[np.ndarray], np.ndarray]
    params: dict
    _cache: dict = dc_field(default_factory=dict, repr=False, compare=False)

    def centroid(self) -> np.ndarray:
        """Volumetric centroid of the canonical solid, computed once.

        Numeric (64^3 grid over the canonical 1.5-ball's bounding cube)
        except for the symmetric natives, which are exactly centered.
        """
        if "centroid" not in self._cache:
            if self.recipe.construction in ("sphere", "octahedron"):
                self._cache["centroid"] = np.zeros(3)
            else:
                n = 64
                axis = (np.arange(n) + 0.5) / n * 3.1 - 1.55
                zz, yy, xx = np.meshgrid(axis, axis, axis, indexing="ij")
                pts = np.stack((xx, yy, zz), axis=-1)
                inside = self.field(pts) <= 0.0
                if not inside.any():
                    self._cache["centroid"] = np.zeros(3)
                else:
                    self._cache["centroid"] = np.array([
                        xx[inside].mean(), yy[inside].mean(), zz[inside].mean()])
        return self._cache["centroid"]

    def centered_field(self) -> Callable[[np.ndarray], np.ndarray]:
        """The same field shifted so its volumetric centroid sits at the origin."""
        c = self.centroid()
        base = self.field
        return lambda p: base(p + c)


@dataclass(frozen=True)
class ShapeLibrary:
    """Ordered recipe collection; the default build carries all 109 classes."""

    recipes: tuple[ShapeRecipe, ...]

    def __post_init__(self):
        ids = [r.class_id for r in self.recipes]
        if not ids:
            raise ValueError("library must contain at least one recipe")
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate class ids in library")

    def __len__(self) -> int:
        return len(self.recipes)

    def by_id(self, class_id: int) -> ShapeRecipe:
        for r in self.recipes:
            if r.class_id == class_id:
                return r
        raise KeyError(f"no class {class_id} in library")

    def serialize(self) -> str:
        """Canonical JSON for hashing and lossless round-trips."""
        payload = {"version": 1, "classes": [r.to_dict() for r in self.recipes]}
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()


def _parse_library(data: dict) -> ShapeLibrary:
    recipes = []
    for entry in data["classes"]:
        recipes.append(ShapeRecipe(
            class_id=entry["class_id"],
            construction=entry["construction"],
            ranges=entry["ranges"],
            base2d=entry.get("base2d"),
            profile=entry.get("profile"),
            layers=entry.get("layers"),
            solid=entry.get("solid"),
        ))
    return ShapeLibrary(tuple(recipes))


def build_default_library() -> ShapeLibrary:
    """Load the packaged 109-class enumeration."""
    text = resources.files("sdfsynth").joinpath("data/library.json").read_text()
    lib = _parse_library(json.loads(text))
    ids = sorted(r.class_id for r in lib.recipes)
    if ids != list(range(1, CLASS_COUNT + 1)):
        raise ValueError("packaged library must contain exactly classes 1..109")
    return lib


def load_library(path: str | Path) -> ShapeLibrary:
    """Load an external recipe file (e.g. a reduced comparison library)."""
    return _parse_library(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Instantiation
# ---------------------------------------------------------------------------

def _scaled_2d(f2d: Callable, q: float) -> Callable:
    # exact SDF scaling: q * f(u/q)
    return lambda uv: q * f2d(uv / q)


def instantiate(recipe: ShapeRecipe, rng: np.random.Generator) -> SdfInstance:
    """Sample the recipe's continuous parameters and build its field.

    Draw order is part of the determinism contract: 2D base shape first
    (polygon vertices as angle/radius pairs in vertex order, or star
    concavity then tip radius), then construction parameters in the order
    listed below, then hollow thicknesses (sorted descending after drawing).
    """
    rg = recipe.ranges
    params: dict = {}
    f2d = None

    if recipe.base2d is not None:
        b = recipe.base2d
        if b["kind"] == "polygon":
            poly = gen_polygon(b["n"], b["r_min"], b["r_max"], rng)
            params["vertices"] = poly.vertices.tolist()
            f2d = lambda uv, _p=poly: sdf_polygon(uv, _p)
        elif b["kind"] == "star":
            w = rng.uniform(*b["w"])
            r_tip = rng.uniform(*b["r"])
            params["concavity"] = w
            params["tip_radius"] = r_tip
            star = StarSpec(b["n"], w, r_tip)
            f2d = lambda uv, _s=star: sdf_star(uv, _s)
        else:
            raise ValueError(f"unknown 2D base kind {b['kind']!r}")

    con = recipe.construction
    if con == "sphere":
        params["r"] = rng.uniform(*rg["r"])
        fld = lambda p, _r=params["r"]: sdf_sphere(p, _r)
    elif con == "octahedron":
        params["s"] = rng.uniform(*rg["s"])
        fld = lambda p, _s=params["s"]: sdf_octahedron(p, _s)
    elif con == "cone":
        params["theta"] = rng.uniform(*rg["theta"])
        params["h"] = rng.uniform(*rg["h"])
        fld = lambda p, _t=params["theta"], _h=params["h"]: sdf_cone(p, _t, _h)
    elif con in ("extrude", "hollow_extrude"):
        # order: h, c, a (taper, profiles that use it), t_j
        params["h"] = rng.uniform(*rg["h"])
        params["c"] = rng.uniform(*rg["c"])
        a = 0.0
        if "a" in rg:
            a = rng.uniform(*rg["a"])
            params["a"] = a
        profile = ScaleProfile(recipe.profile, params["c"], a)
        fld = extrude(f2d, params["h"], profile)
        if con == "hollow_extrude":
            ts = sorted((rng.uniform(*rg["t"]) for _ in range(recipe.layers)), reverse=True)
            params["thicknesses"] = ts
            fld = hollow(fld, ts)
    elif con in ("revolve", "hollow_revolve"):
        # order: R (unless solid), q, t_j
        r_major = 0.0
        if not recipe.solid:
            r_major = rng.uniform(*rg["R"])
            params["R"] = r_major
        params["q"] = rng.uniform(*rg["q"])
        fld = revolve(_scaled_2d(f2d, params["q"]), r_major)
        if con == "hollow_revolve":
            ts = sorted((rng.uniform(*rg["t"]) for _ in range(recipe.layers)), reverse=True)
            params["thicknesses"] = ts
            fld = hollow(fld, ts)
    else:
        raise ValueError(f"unknown construction {con!r}")

    return SdfInstance(recipe=recipe, field=fld, params=params)


# ---------------------------------------------------------------------------
# Subset selection
# ---------------------------------------------------------------------------

def select_subset(lib: ShapeLibrary, selector: str, rng: np.random.Generator) -> ShapeLibrary:
    """Reduce the library for ablation runs.

    Selectors: ``all``; ``extrusion[:N]`` and ``revolution[:N]`` draw N
    classes from one construction category; ``combined[:N]`` splits N
    between the two; ``random[:N]`` draws from the whole library.  N
    defaults to 10.  Selected recipes keep their original class ids and
    library order.
    """
    name, _, count_s = selector.partition(":")
    if name == "all":
        return lib
    count = int(count_s) if count_s else 10
    if count < 1:
        raise ValueError(f"subset count must be >= 1, got {count}")

    def pick(pool: list[ShapeRecipe], n: int) -> list[ShapeRecipe]:
        if n > len(pool):
            raise ValueError(f"subset asks for {n} classes but the category has {len(pool)}")
        idx = rng.choice(len(pool), size=n, replace=False)
        return [pool[i] for i in sorted(idx)]

    ext = [r for r in lib.recipes if r.category() == "extrusion"]
    rev = [r for r in lib.recipes if r.category() == "revolution_hollowing"]
    if name == "extrusion":
        chosen = pick(ext, count)
    elif name == "revolution":
        chosen = pick(rev, count)
    elif name == "combined":
        chosen = pick(ext, count // 2) + pick(rev, count - count // 2)
    elif name == "random":
        chosen = pick(list(lib.recipes), count)
    else:
        raise ValueError(f"unknown subset selector {selector!r}")
    chosen.sort(key=lambda r: r.class_id)
    return ShapeLibrary(tuple(chosen))
