"""Dataset container format, manifest, provenance, and PNG slice export.

Wire format (all integers little-endian, regardless of host):

    bytes 0-3    magic ``FDIF``
    bytes 4-7    format version, u32
    byte  8      mode flag: 0 = segmentation, 1 = classification
    byte  9      intensity dtype code: 0 = f32 little-endian
    byte  10     label dtype code: 0 = u16 little-endian
    byte  11     reserved, zero
    bytes 12-23  W, H, D as u32
    then         W*H*D intensity values, x-fastest (index = x + W*(y + H*z))
    then         W*H*D u16 labels (segmentation) or one u16 class id

Checksums are the first 8 bytes of SHA-256, hex — cheap to recompute in any
language the reader side might use.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .compose import LabeledVolume, SampleConfig
from .texture import VariantTable

MAGIC = b"FDIF"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIBBBBIII")  # 24 bytes
_MODE_FLAGS = {"segmentation": 0, "classification": 1}
_MODE_NAMES = {v: k for k, v in _MODE_FLAGS.items()}

CHECKSUM_ALGORITHM = "sha256/64"


def content_checksum(data: bytes) -> str:
    """64-bit content checksum: first 8 bytes of SHA-256, as 16 hex chars."""
    return hashlib.sha256(data).hexdigest()[:16]


def expected_file_size(mode: str, w: int, h: int, d: int) -> int:
    n = w * h * d
    label_bytes = 2 if mode == "classification" else 2 * n
    return _HEADER.size + 4 * n + label_bytes


def write_sample(volume: LabeledVolume, path: str | Path) -> str:
    """Serialize one sample; returns its content checksum."""
    g = volume.intensity.shape  # (D, H, W)
    w, h, d = g[2], g[1], g[0]
    if max(w, h, d) >= 2 ** 32:
        raise ValueError("grid dimension overflows the u32 header field")
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, _MODE_FLAGS[volume.mode], 0, 0, 0, w, h, d)
    intensity = np.ascontiguousarray(volume.intensity, dtype="<f4").tobytes()
    if volume.mode == "segmentation":
        labels = np.ascontiguousarray(volume.labels, dtype="<u2").tobytes()
    else:
        labels = struct.pack("<H", volume.class_id)
    data = header + intensity + labels
    Path(path).write_bytes(data)
    return content_checksum(data)


def read_sample(path: str | Path) -> LabeledVolume:
    """Exact inverse of write_sample, with layout validation."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: file too short for the {_HEADER.size}-byte header "
                         f"({_HEADER.size - len(data)} bytes missing)")
    magic, version, mode_flag, int_code, lab_code, reserved, w, h, d = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    if mode_flag not in _MODE_NAMES:
        raise ValueError(f"{path}: unknown mode flag {mode_flag}")
    if int_code != 0 or lab_code != 0:
        raise ValueError(f"{path}: unknown dtype codes ({int_code}, {lab_code})")
    mode = _MODE_NAMES[mode_flag]

    expected = expected_file_size(mode, w, h, d)
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes for {w}x{h}x{d} {mode}, "
                         f"got {len(data)} ({expected - len(data)} missing)")

    n = w * h * d
    off = _HEADER.size
    intensity = np.frombuffer(data, dtype="<f4", count=n, offset=off).reshape(d, h, w).copy()
    off += 4 * n
    if mode == "segmentation":
        labels = np.frombuffer(data, dtype="<u2", count=n, offset=off).reshape(d, h, w).copy()
        class_id = None
    else:
        labels = None
        class_id = struct.unpack_from("<H", data, off)[0]
    return LabeledVolume(intensity=intensity, labels=labels, class_id=class_id, mode=mode)


# ---------------------------------------------------------------------------
# Dataset sink and manifest
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetSink:
    """Writes one sample container + provenance JSON; picklable for workers."""

    out_dir: str

    def __call__(self, volume: LabeledVolume, provenance: dict) -> dict:
        out = Path(self.out_dir)
        stem = f"sample_{volume.sample_index:06d}"
        checksum = write_sample(volume, out / f"{stem}.vol")
        (out / f"{stem}.json").write_text(json.dumps(provenance, indent=1))
        record = {"name": f"{stem}.vol", "checksum": checksum, "provenance": f"{stem}.json"}
        if volume.mode == "classification":
            record["class_id"] = volume.class_id
        return record


def variant_table_hash(variants: VariantTable) -> str:
    canon = json.dumps(variants.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def build_manifest(config: SampleConfig, entries: list[dict], *,
                   num_samples: int | None = None, per_class: int | None = None,
                   partial: bool = False) -> dict:
    from .library import RNG_ALGORITHM

    doc = {
        "format_version": FORMAT_VERSION,
        "mode": config.mode,
        "master_seed": config.master_seed,
        "grid": [config.grid.W, config.grid.H, config.grid.D],
        "library_hash": config.library.content_hash(),
        "variant_table_hash": variant_table_hash(config.variants),
        "rng_algorithm": RNG_ALGORITHM,
        "generator_version": __version__,
        "checksum_algorithm": CHECKSUM_ALGORITHM,
        "config": config.to_json_dict(),
        "files": entries,
    }
    if num_samples is not None:
        doc["num_samples"] = num_samples
    if per_class is not None:
        doc["per_class"] = per_class
        doc["num_samples"] = per_class * len(config.library.recipes)
    if partial:
        doc["partial"] = True
    return doc


def write_manifest(path: str | Path, manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=1) + "\n")


def read_manifest(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def verify_checksums(dataset_dir: str | Path) -> list[str]:
    """Names of manifest entries whose file bytes no longer match."""
    root = Path(dataset_dir)
    manifest = read_manifest(root / "manifest.json")
    bad = []
    for entry in manifest["files"]:
        p = root / entry["name"]
        if not p.exists() or content_checksum(p.read_bytes()) != entry["checksum"]:
            bad.append(entry["name"])
    return bad


# ---------------------------------------------------------------------------
# PNG slice export
# ---------------------------------------------------------------------------

def _load_palette() -> list[int]:
    data = json.loads(resources.files("sdfsynth").joinpath("data/palette.json").read_text())
    flat = [c for row in data["palette"] for c in row]
    flat += [0] * (768 - len(flat))
    return flat

_PALETTE: list[int] | None = None


def export_slices(volume: LabeledVolume, axis: str, indices, out_dir: str | Path) -> list[Path]:
    """Write 8-bit grayscale intensity PNGs and palette label PNGs.

    The label palette ships as package data (label 0 black) so colors are
    identical across runs and machines.
    """
    global _PALETTE
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    arr_axis = {"z": 0, "y": 1, "x": 2}[axis]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    size = volume.intensity.shape[arr_axis]

    written: list[Path] = []
    for idx in indices:
        idx = int(idx)
        if not 0 <= idx < size:
            raise IndexError(f"slice {idx} out of range for axis {axis} of size {size}")
        sel = [slice(None)] * 3
        sel[arr_axis] = idx
        sel = tuple(sel)

        gray = np.round(volume.intensity[sel] * 255.0).astype(np.uint8)
        p = out / f"intensity_{axis}{idx:03d}.png"
        Image.fromarray(gray, mode="L").save(p)
        written.append(p)

        if volume.mode == "segmentation":
            if _PALETTE is None:
                _PALETTE = _load_palette()
            lab = volume.labels[sel].astype(np.uint8)  # labels <= 109 fit
            img = Image.fromarray(lab, mode="P")
            img.putpalette(_PALETTE)
            p = out / f"labels_{axis}{idx:03d}.png"
            img.save(p)
            written.append(p)
    return written
