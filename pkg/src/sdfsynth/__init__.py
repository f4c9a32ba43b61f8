"""Deterministic synthetic 3D volume generator built on signed distance fields.

The package renders labeled intensity volumes from a library of procedural
shape classes: signed distance primitives placed by affine transforms,
displaced for surface detail, and mapped to interior intensity profiles.
Given the same seed and configuration the output bytes are identical across
runs and worker counts.
"""

__version__ = "0.1.0"

from .compose import GridSpec, SampleConfig, generate_dataset, generate_sample
from .geometry import AffineTransform
from .library import build_default_library, derive_sample_seed
from .storage import read_sample, write_sample

__all__ = [
    "AffineTransform",
    "GridSpec",
    "SampleConfig",
    "build_default_library",
    "derive_sample_seed",
    "generate_dataset",
    "generate_sample",
    "read_sample",
    "write_sample",
    "__version__",
]
