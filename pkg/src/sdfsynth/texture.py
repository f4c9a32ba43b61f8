"""Displacement families (geometric surface texture) and mapper families
(signed distance to voxel intensity), plus the variant tables that pick
concrete parameterizations.

Displacements are evaluated in canonical coordinates and added to the signed
distance before masking; mappers turn the displaced distance into intensity.
Specs are frozen data, evaluation is pure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from importlib import resources

import numpy as np

DISPLACEMENT_FAMILIES = (
    "identity", "pseudo_perlin", "sharpmax", "twisted_axis",
    "sawtooth", "ridge", "turbulence",
)
MAPPER_FAMILIES = (
    "inverse_cube", "exponential", "linear", "floor", "modular", "sinusoidal",
)

_AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class DisplacementSpec:
    """One displacement variant. Only the fields the family uses are set."""

    family: str
    amplitude: float = 0.0
    frequency: float | None = None
    # sinusoid terms for pseudo_perlin / ridge / turbulence
    term_amplitudes: tuple[float, ...] | None = None
    freq_vectors: tuple[tuple[float, float, float], ...] | None = None
    phases: tuple[float, ...] | None = None
    twist_rate: float | None = None
    axis: str | None = None

    def __post_init__(self):
        if self.family not in DISPLACEMENT_FAMILIES:
            raise ValueError(f"unknown displacement family {self.family!r}")
        if self.family == "identity":
            return
        if not (np.isfinite(self.amplitude) and self.amplitude > 0.0):
            raise ValueError(f"amplitude must be positive and finite, got {self.amplitude}")
        if self.family in ("pseudo_perlin", "ridge", "turbulence"):
            a, k, b = self.term_amplitudes, self.freq_vectors, self.phases
            if a is None or k is None or b is None:
                raise ValueError(f"{self.family} needs term amplitudes, frequency vectors and phases")
            object.__setattr__(self, "term_amplitudes", tuple(float(v) for v in a))
            object.__setattr__(self, "freq_vectors", tuple(tuple(float(c) for c in v) for v in k))
            object.__setattr__(self, "phases", tuple(float(v) for v in b))
            if not len(self.term_amplitudes) == len(self.freq_vectors) == len(self.phases) >= 1:
                raise ValueError("term lists must have equal length >= 1")
            if any(len(v) != 3 for v in self.freq_vectors):
                raise ValueError("frequency vectors must be 3D")
            if any(v <= 0 or not np.isfinite(v) for v in self.term_amplitudes):
                raise ValueError("term amplitudes must be positive and finite")
            if not np.all(np.isfinite(np.asarray(self.freq_vectors))) or not np.all(np.isfinite(self.phases)):
                raise ValueError("frequency vectors and phases must be finite")
        if self.family in ("sharpmax", "twisted_axis", "sawtooth"):
            if self.frequency is None or self.frequency <= 0 or not np.isfinite(self.frequency):
                raise ValueError(f"{self.family} needs a positive finite frequency")
        if self.family == "twisted_axis":
            if self.twist_rate is None or not np.isfinite(self.twist_rate):
                raise ValueError("twisted_axis needs a finite twist rate")
        if self.family in ("twisted_axis", "sawtooth"):
            if self.axis not in _AXES:
                raise ValueError(f"axis must be one of x/y/z, got {self.axis!r}")


def eval_displacement(spec: DisplacementSpec, x: np.ndarray) -> np.ndarray:
    """Evaluate the displacement at canonical points of shape (..., 3)."""
    x = np.asarray(x, dtype=float)
    if spec.family == "identity":
        return np.zeros(x.shape[:-1])
    a_amp = spec.amplitude

    if spec.family in ("pseudo_perlin", "ridge", "turbulence"):
        k = np.asarray(spec.freq_vectors)  # (J, 3)
        a = np.asarray(spec.term_amplitudes)  # (J,)
        b = np.asarray(spec.phases)
        args = 2.0 * np.pi * (x @ k.T) + b  # (..., J)
        if spec.family == "pseudo_perlin":
            return a_amp * (np.sin(args) @ a)
        if spec.family == "turbulence":
            return a_amp * (np.abs(np.sin(args)) @ a)
        # ridge inverts the normalized smooth noise
        return a_amp * (1.0 - np.abs(np.sin(args) @ a))

    f = spec.frequency
    if spec.family == "sharpmax":
        return a_amp * np.max(np.abs(np.sin(2.0 * np.pi * f * x)), axis=-1)

    if spec.family == "twisted_axis":
        # stripes on the axis after the twist driver, rotated in the
        # complementary plane: driver z twists x-stripes, cyclically
        drv = _AXES[spec.axis]
        stripe = (drv + 1) % 3
        partner = (drv + 2) % 3
        ang = spec.twist_rate * x[..., drv]
        rotated = x[..., stripe] * np.cos(ang) - x[..., partner] * np.sin(ang)
        return a_amp * np.abs(np.sin(2.0 * np.pi * f * rotated))

    # sawtooth: saw(t) = 2 frac(t) - 1
    t = f * x[..., _AXES[spec.axis]]
    return a_amp * (2.0 * (t - np.floor(t)) - 1.0)


def displacement_bound(spec: DisplacementSpec) -> float:
    """Upper bound on |displacement| over all points (used for culling)."""
    if spec.family == "identity":
        return 0.0
    if spec.family in ("pseudo_perlin", "turbulence", "ridge"):
        s = float(np.sum(np.abs(spec.term_amplitudes)))
        return spec.amplitude * max(1.0, s)
    return spec.amplitude


@dataclass(frozen=True)
class MapperSpec:
    """One mapper variant g(d). Only the fields the family uses are set."""

    family: str
    alpha: float | None = None
    beta: float | None = None
    epsilon: float | None = None
    width: float | None = None
    step: float | None = None
    modulus: int | None = None
    wavelength: float | None = None

    def __post_init__(self):
        if self.family not in MAPPER_FAMILIES:
            raise ValueError(f"unknown mapper family {self.family!r}")
        need = {
            "inverse_cube": ("alpha", "epsilon"),
            "exponential": ("alpha", "beta"),
            "linear": ("alpha", "beta"),
            "floor": ("alpha", "width", "step"),
            "modular": ("width", "modulus"),
            "sinusoidal": ("alpha", "wavelength"),
        }[self.family]
        for name in need:
            v = getattr(self, name)
            if v is None:
                raise ValueError(f"{self.family} needs {name}")
            if name == "modulus":
                if not isinstance(v, int) or v < 1:
                    raise ValueError(f"modulus must be an integer >= 1, got {v!r}")
            elif not (np.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {v}")


def eval_mapper(spec: MapperSpec, d: np.ndarray) -> np.ndarray:
    """Map signed distances to intensities; depth means max(-d, 0)."""
    d = np.asarray(d, dtype=float)
    if spec.family == "inverse_cube":
        return spec.alpha / (np.abs(d) + spec.epsilon) ** 3
    depth = np.maximum(-d, 0.0)
    if spec.family == "exponential":
        return spec.alpha * np.exp(-spec.beta * depth)
    if spec.family == "linear":
        return np.maximum(0.0, spec.alpha - spec.beta * depth)
    if spec.family == "floor":
        return spec.alpha - spec.step * np.floor(depth / spec.width)
    if spec.family == "modular":
        # raw band index would exceed [0,1]; rescale by 1/(m-1) so the
        # brightest band peaks at 1
        bands = np.floor(depth / spec.width) % spec.modulus
        return bands / max(spec.modulus - 1, 1)
    # sinusoidal, shifted into [0, alpha]: raw sin would go negative and
    # clip away the periodic pattern
    return 0.5 * (1.0 + np.sin(2.0 * np.pi * depth / spec.wavelength)) * spec.alpha


IDENTITY_DISPLACEMENT = DisplacementSpec(family="identity")

#: Applied to every primitive when the mapper table is disabled.
UNIFORM_MAPPER = MapperSpec(family="inverse_cube", alpha=1e-3, epsilon=0.1)


@dataclass(frozen=True)
class VariantTable:
    """Ordered displacement and mapper variants; indices are stable contracts."""

    displacement_variants: tuple[DisplacementSpec, ...]
    mapper_variants: tuple[MapperSpec, ...]

    def __post_init__(self):
        if not self.displacement_variants or not self.mapper_variants:
            raise ValueError("variant tables must be non-empty")

    def to_dict(self) -> dict:
        def strip(d):
            return {k: v for k, v in d.items() if v is not None and not (k == "amplitude" and v == 0.0)}
        return {
            "displacement_variants": [strip(asdict(s)) for s in self.displacement_variants],
            "mapper_variants": [strip(asdict(s)) for s in self.mapper_variants],
        }

    @staticmethod
    def from_dict(data: dict) -> "VariantTable":
        disp = []
        for entry in data["displacement_variants"]:
            entry = dict(entry)
            for key in ("term_amplitudes", "phases"):
                if key in entry:
                    entry[key] = tuple(entry[key])
            if "freq_vectors" in entry:
                entry["freq_vectors"] = tuple(tuple(v) for v in entry["freq_vectors"])
            disp.append(DisplacementSpec(**entry))
        mappers = [MapperSpec(**entry) for entry in data["mapper_variants"]]
        return VariantTable(tuple(disp), tuple(mappers))


def default_variant_table() -> VariantTable:
    """The 10 + 10 default variants, loaded from the packaged data file."""
    text = resources.files("sdfsynth").joinpath("data/default_variants.json").read_text()
    return VariantTable.from_dict(json.loads(text))
