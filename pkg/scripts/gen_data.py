#!/usr/bin/env python3
"""Regenerate the packaged data files.

Writes src/sdfsynth/data/default_variants.json (the 10 displacement and
10 mapper variants) and src/sdfsynth/data/library.json (the 109-class shape
enumeration).  The committed JSON files are the stable contract — class ids
and variant indices must never change meaning — so run this only when
deliberately revising the defaults, and bump the library version field if
ids are reassigned.
"""

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "src" / "sdfsynth" / "data"

# fixed unit directions for the sinusoid frequency vectors
_RAW_DIRS = ((1.0, 0.7, 0.3), (-0.4, 1.0, 0.6), (0.8, -0.5, 1.0), (0.2, 0.9, -0.7))
DIRECTIONS = [tuple(np.asarray(d) / np.linalg.norm(d)) for d in _RAW_DIRS]
PHASES = (0.0, 2.1, 4.2, 1.3)
TERM_DECAY = (0.5, 0.25, 0.125, 0.0625)


def sinusoid_terms(f: float, terms: int) -> dict:
    """Term lists with k_j = f * 2^(j-1) * u_j and fixed phases."""
    return {
        "term_amplitudes": list(TERM_DECAY[:terms]),
        "freq_vectors": [
            [c * f * 2.0 ** j for c in DIRECTIONS[j]] for j in range(terms)
        ],
        "phases": list(PHASES[:terms]),
    }


def displacement_variants() -> list:
    perlin_low = sinusoid_terms(2.0, 4)
    perlin_high = sinusoid_terms(5.0, 4)
    return [
        {"family": "pseudo_perlin", "amplitude": 0.06, **perlin_low},
        {"family": "pseudo_perlin", "amplitude": 0.03, **perlin_high},
        {"family": "turbulence", "amplitude": 0.05, **sinusoid_terms(4.0, 4)},
        {"family": "ridge", "amplitude": 0.06, **perlin_low},
        {"family": "ridge", "amplitude": 0.03, **perlin_high},
        {"family": "sharpmax", "amplitude": 0.03, "frequency": 6.0},
        {"family": "twisted_axis", "amplitude": 0.03, "frequency": 6.0, "twist_rate": 3.0, "axis": "z"},
        {"family": "sawtooth", "amplitude": 0.04, "frequency": 3.0, "axis": "x"},
        {"family": "sawtooth", "amplitude": 0.02, "frequency": 8.0, "axis": "y"},
        {"family": "turbulence", "amplitude": 0.03, **sinusoid_terms(8.0, 3)},
    ]


def mapper_variants() -> list:
    return [
        {"family": "inverse_cube", "alpha": 0.1 ** 3, "epsilon": 0.1},
        {"family": "inverse_cube", "alpha": 0.05 ** 3, "epsilon": 0.05},
        {"family": "exponential", "alpha": 1.0, "beta": 5.0},
        {"family": "exponential", "alpha": 1.0, "beta": 15.0},
        {"family": "linear", "alpha": 1.0, "beta": 2.0},
        {"family": "floor", "alpha": 1.0, "width": 0.05, "step": 0.2},
        {"family": "modular", "width": 0.04, "modulus": 4},
        {"family": "sinusoidal", "alpha": 1.0, "wavelength": 0.1},
        {"family": "sinusoidal", "alpha": 1.0, "wavelength": 0.05},
        {"family": "linear", "alpha": 1.0, "beta": 5.0},
    ]


# -- shape library ----------------------------------------------------------

PI = np.pi

BASE_SHAPES = (
    [{"kind": "polygon", "n": n, "r_min": 0.4, "r_max": 1.0} for n in range(3, 10)]
    + [{"kind": "star", "n": n, "w": [0.3, 0.8], "r": [0.6, 1.0]} for n in range(5, 9)]
)

# Parameter ranges are chosen so every instance, hollow expansion included,
# stays inside the canonical 1.5-ball.
CONSTRUCTIONS = [
    {"construction": "extrude", "profile": "constant",
     "ranges": {"h": [0.4, 1.0], "c": [0.45, 0.65]}},
    {"construction": "extrude", "profile": "linear",
     "ranges": {"h": [0.4, 1.0], "c": [0.45, 0.65], "a": [-0.6, 0.6]}},
    {"construction": "extrude", "profile": "smooth",
     "ranges": {"h": [0.4, 1.0], "c": [0.4, 0.6], "a": [-0.6, 0.6]}},
    {"construction": "revolve", "solid": False,
     "ranges": {"R": [0.4, 0.8], "q": [0.3, 0.45]}},
    {"construction": "revolve", "solid": True,
     "ranges": {"q": [0.6, 1.0]}},
    {"construction": "hollow_extrude", "profile": "constant", "layers": 1,
     "ranges": {"h": [0.4, 0.8], "c": [0.4, 0.55], "t": [0.05, 0.15]}},
    {"construction": "hollow_extrude", "profile": "linear", "layers": 2,
     "ranges": {"h": [0.4, 0.8], "c": [0.4, 0.55], "a": [-0.4, 0.4], "t": [0.05, 0.15]}},
    {"construction": "hollow_revolve", "solid": False, "layers": 1,
     "ranges": {"R": [0.3, 0.6], "q": [0.3, 0.45], "t": [0.05, 0.15]}},
    {"construction": "hollow_revolve", "solid": False, "layers": 2,
     "ranges": {"R": [0.3, 0.6], "q": [0.3, 0.45], "t": [0.05, 0.15]}},
    {"construction": "hollow_revolve", "solid": True, "layers": 1,
     "ranges": {"q": [0.5, 0.8], "t": [0.05, 0.15]}},
]

NATIVE = [
    {"class_id": 1, "construction": "sphere", "ranges": {"r": [0.5, 1.0]}},
    {"class_id": 2, "construction": "octahedron", "ranges": {"s": [0.5, 1.0]}},
    {"class_id": 3, "construction": "cone", "ranges": {"theta": [PI / 12, PI / 4], "h": [0.8, 1.4]}},
]

DERIVED_COUNT = 106


def library_classes() -> list:
    classes = [dict(c) for c in NATIVE]
    cid = 4
    # shape-major enumeration, trimmed to 106: the final base shape loses
    # its last constructions
    for shape in BASE_SHAPES:
        for con in CONSTRUCTIONS:
            if cid > 3 + DERIVED_COUNT:
                break
            entry = {"class_id": cid, "base2d": shape}
            entry.update(json.loads(json.dumps(con)))
            classes.append(entry)
            cid += 1
    return classes


def label_palette() -> list:
    """110 RGB rows: background black, then golden-angle hue cycling with
    three brightness tiers so adjacent class ids get distinct colors."""
    import colorsys

    rows = [[0, 0, 0]]
    for i in range(1, 110):
        hue = (i * 0.6180339887498949) % 1.0
        sat = (0.55, 0.75, 0.95)[i % 3]
        val = (0.95, 0.7, 0.85)[i % 3]
        rgb = colorsys.hsv_to_rgb(hue, sat, val)
        rows.append([int(round(c * 255)) for c in rgb])
    return rows


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    variants = {
        "displacement_variants": displacement_variants(),
        "mapper_variants": mapper_variants(),
    }
    (OUT / "default_variants.json").write_text(json.dumps(variants, indent=1) + "\n")

    library = {"version": 1, "classes": library_classes()}
    (OUT / "library.json").write_text(json.dumps(library, indent=1) + "\n")

    (OUT / "palette.json").write_text(json.dumps({"palette": label_palette()}) + "\n")
    print(f"wrote {OUT / 'default_variants.json'}")
    print(f"wrote {OUT / 'library.json'} ({len(library['classes'])} classes)")
    print(f"wrote {OUT / 'palette.json'}")


if __name__ == "__main__":
    main()
