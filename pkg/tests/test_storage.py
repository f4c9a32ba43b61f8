"""Binary sample container, manifest, checksums, PNG slice export."""

import json
import struct
from importlib import resources

import numpy as np
import numpy.testing as npt
import pytest
from PIL import Image

from sdfsynth.compose import GridSpec, LabeledVolume, SampleConfig
from sdfsynth.storage import (
    CHECKSUM_ALGORITHM,
    DatasetSink,
    build_manifest,
    content_checksum,
    expected_file_size,
    export_slices,
    read_manifest,
    read_sample,
    verify_checksums,
    write_manifest,
    write_sample,
)


def seg_volume(rng, n=16) -> LabeledVolume:
    intensity = rng.uniform(0.0, 1.0, size=(n, n, n)).astype(np.float32)
    labels = rng.integers(0, 110, size=(n, n, n), endpoint=False).astype(np.uint16)
    return LabeledVolume(intensity, labels, None, "segmentation", sample_index=3)


def cls_volume(rng, n=16) -> LabeledVolume:
    intensity = rng.uniform(0.0, 1.0, size=(n, n, n)).astype(np.float32)
    return LabeledVolume(intensity, None, 57, "classification", sample_index=0)


# ---------------------------------------------------------------------------
# container layout
# ---------------------------------------------------------------------------

def test_expected_file_sizes_for_reference_grids():
    assert expected_file_size("segmentation", 96, 96, 96) == 5_308_440
    assert expected_file_size("classification", 64, 64, 64) == 1_048_602


def test_write_read_write_is_bitwise_stable(rng, tmp_path):
    for make in (seg_volume, cls_volume):
        v = make(rng)
        p1, p2 = tmp_path / "a.vol", tmp_path / "b.vol"
        write_sample(v, p1)
        write_sample(read_sample(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()


def test_file_size_on_disk_matches_formula(rng, tmp_path):
    v = seg_volume(rng)
    write_sample(v, tmp_path / "s.vol")
    assert (tmp_path / "s.vol").stat().st_size == expected_file_size("segmentation", 16, 16, 16)
    write_sample(cls_volume(rng), tmp_path / "c.vol")
    assert (tmp_path / "c.vol").stat().st_size == expected_file_size("classification", 16, 16, 16)


def test_round_trip_preserves_every_field(rng, tmp_path):
    v = seg_volume(rng)
    write_sample(v, tmp_path / "s.vol")
    back = read_sample(tmp_path / "s.vol")
    npt.assert_array_equal(back.intensity, v.intensity)
    npt.assert_array_equal(back.labels, v.labels)
    assert back.mode == "segmentation" and back.class_id is None

    c = cls_volume(rng)
    write_sample(c, tmp_path / "c.vol")
    back = read_sample(tmp_path / "c.vol")
    assert back.class_id == 57 and back.labels is None


def test_truncated_file_reports_missing_byte_count(rng, tmp_path):
    p = tmp_path / "s.vol"
    write_sample(seg_volume(rng), p)
    data = p.read_bytes()
    p.write_bytes(data[:-10])
    with pytest.raises(ValueError, match="10 missing"):
        read_sample(p)
    p.write_bytes(data[:12])  # not even a full header
    with pytest.raises(ValueError, match="12 bytes missing"):
        read_sample(p)


@pytest.mark.parametrize("offset,value,message", [
    (0, ord("X"), "bad magic"),
    (4, 9, "unsupported format version"),
    (8, 7, "unknown mode flag"),
    (9, 1, "unknown dtype codes"),
    (10, 1, "unknown dtype codes"),
])
def test_header_validation(rng, tmp_path, offset, value, message):
    p = tmp_path / "s.vol"
    write_sample(seg_volume(rng), p)
    data = bytearray(p.read_bytes())
    data[offset] = value
    p.write_bytes(bytes(data))
    with pytest.raises(ValueError, match=message):
        read_sample(p)


def test_checksum_matches_file_bytes(rng, tmp_path):
    p = tmp_path / "s.vol"
    checksum = write_sample(seg_volume(rng), p)
    assert checksum == content_checksum(p.read_bytes())
    assert len(checksum) == 16 and int(checksum, 16) >= 0
    assert CHECKSUM_ALGORITHM == "sha256/64"


# ---------------------------------------------------------------------------
# sink, manifest, verification
# ---------------------------------------------------------------------------

def _small_dataset(library, variants, rng, out):
    sink = DatasetSink(str(out))
    cfg = SampleConfig(library=library, variants=variants, grid=GridSpec(16, 16, 16))
    entries = []
    for i in range(3):
        v = seg_volume(rng)
        v = LabeledVolume(v.intensity, v.labels, None, "segmentation", sample_index=i)
        entries.append(sink(v, {"sample_index": i}))
    write_manifest(out / "manifest.json", build_manifest(cfg, entries, num_samples=3))
    return entries


def test_sink_writes_container_and_provenance(library, variants, rng, tmp_path):
    entries = _small_dataset(library, variants, rng, tmp_path)
    assert [e["name"] for e in entries] == [f"sample_{i:06d}.vol" for i in range(3)]
    for e in entries:
        assert (tmp_path / e["name"]).exists()
        prov = json.loads((tmp_path / e["provenance"]).read_text())
        assert "sample_index" in prov
        assert e["checksum"] == content_checksum((tmp_path / e["name"]).read_bytes())


def test_classification_sink_records_class_id(rng, tmp_path):
    record = DatasetSink(str(tmp_path))(cls_volume(rng), {})
    assert record["class_id"] == 57


def test_manifest_carries_reproduction_fields(library, variants, rng, tmp_path):
    _small_dataset(library, variants, rng, tmp_path)
    m = read_manifest(tmp_path / "manifest.json")
    for key in ("format_version", "mode", "master_seed", "grid", "library_hash",
                "variant_table_hash", "rng_algorithm", "generator_version",
                "checksum_algorithm", "config", "files", "num_samples"):
        assert key in m, key
    assert m["num_samples"] == 3 and len(m["files"]) == 3
    assert m["checksum_algorithm"] == "sha256/64"
    assert len(m["library_hash"]) == 64


def test_per_class_manifest_counts_total_samples(library, variants):
    cfg = SampleConfig(library=library, variants=variants, mode="classification",
                       objects=1, translation_enabled=False)
    m = build_manifest(cfg, [], per_class=2)
    assert m["per_class"] == 2 and m["num_samples"] == 218


def test_verify_checksums_flags_single_byte_corruption(library, variants, rng, tmp_path):
    _small_dataset(library, variants, rng, tmp_path)
    assert verify_checksums(tmp_path) == []
    target = tmp_path / "sample_000001.vol"
    data = bytearray(target.read_bytes())
    data[len(data) // 2] ^= 0x01
    target.write_bytes(bytes(data))
    assert verify_checksums(tmp_path) == ["sample_000001.vol"]


def test_verify_checksums_flags_missing_file(library, variants, rng, tmp_path):
    _small_dataset(library, variants, rng, tmp_path)
    (tmp_path / "sample_000002.vol").unlink()
    assert verify_checksums(tmp_path) == ["sample_000002.vol"]


# ---------------------------------------------------------------------------
# slice export
# ---------------------------------------------------------------------------

def _concentric_volume() -> LabeledVolume:
    n = 16
    intensity = np.zeros((n, n, n), dtype=np.float32)
    labels = np.zeros((n, n, n), dtype=np.uint16)
    zz, yy, xx = np.mgrid[:n, :n, :n] - (n - 1) / 2.0
    r = np.sqrt(xx ** 2 + yy ** 2 + zz ** 2)
    labels[r < 6.5] = 4
    labels[r < 3.0] = 9
    intensity[r < 6.5] = 0.5
    return LabeledVolume(intensity, labels, None, "segmentation")


def test_zero_volume_exports_black_intensity_png(tmp_path):
    v = LabeledVolume(np.zeros((8, 8, 8), np.float32), np.zeros((8, 8, 8), np.uint16),
                      None, "segmentation")
    paths = export_slices(v, "z", [4], tmp_path)
    assert [p.name for p in paths] == ["intensity_z004.png", "labels_z004.png"]
    img = np.asarray(Image.open(paths[0]))
    assert img.shape == (8, 8) and not img.any()


def test_label_colors_come_from_the_shipped_palette(tmp_path):
    v = _concentric_volume()
    paths = export_slices(v, "z", [8], tmp_path / "a")
    rgb = np.asarray(Image.open(paths[1]).convert("RGB"))
    palette = json.loads(resources.files("sdfsynth")
                         .joinpath("data/palette.json").read_text())["palette"]
    npt.assert_array_equal(rgb[8, 8], palette[9])   # inner ball
    npt.assert_array_equal(rgb[8, 13], palette[4])  # outer shell
    npt.assert_array_equal(rgb[0, 0], [0, 0, 0])    # background stays black

    again = export_slices(v, "z", [8], tmp_path / "b")
    assert paths[1].read_bytes() == again[1].read_bytes()


def test_classification_export_has_no_label_images(rng, tmp_path):
    paths = export_slices(cls_volume(rng), "y", [2, 5], tmp_path)
    assert [p.name for p in paths] == ["intensity_y002.png", "intensity_y005.png"]


def test_export_slice_axis_and_range_validation(rng, tmp_path):
    v = seg_volume(rng)
    with pytest.raises(ValueError):
        export_slices(v, "w", [0], tmp_path)
    with pytest.raises(IndexError):
        export_slices(v, "x", [16], tmp_path)


def test_slices_cut_along_the_requested_axis(tmp_path):
    intensity = np.zeros((8, 10, 12), dtype=np.float32)  # (D, H, W)
    intensity[:, :, 7] = 1.0  # plane of constant x
    v = LabeledVolume(intensity, np.zeros((8, 10, 12), np.uint16), None, "segmentation")
    x_slice = np.asarray(Image.open(export_slices(v, "x", [7], tmp_path / "x")[0]))
    assert x_slice.shape == (8, 10) and np.all(x_slice == 255)
    z_slice = np.asarray(Image.open(export_slices(v, "z", [0], tmp_path / "z")[0]))
    assert z_slice.shape == (10, 12)
    assert np.all(z_slice[:, 7] == 255) and not z_slice[:, :7].any()


def test_header_mode_distinguishes_file_kinds(rng, tmp_path):
    p = tmp_path / "c.vol"
    write_sample(cls_volume(rng), p)
    mode_flag = p.read_bytes()[8]
    assert mode_flag == 1
    assert struct.unpack_from("<H", p.read_bytes(), 24 + 4 * 16 ** 3)[0] == 57
