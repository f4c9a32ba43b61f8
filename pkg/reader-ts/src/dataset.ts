/**
 * Dataset-level access: parse manifest.json once, then load samples lazily
 * one file at a time. Handles are plain read-only descriptions, so sharing
 * one across concurrent readers is safe.
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";

import { contentChecksum } from "./checksum.js";
import { FORMAT_VERSION, Mode, SampleVolume, parseSample } from "./container.js";

export interface ManifestFileEntry {
  readonly name: string;
  readonly checksum: string;
  readonly provenance: string;
  /** classification manifests only */
  readonly classId: number | null;
}

export interface Manifest {
  readonly formatVersion: number;
  readonly mode: Mode;
  readonly masterSeed: number;
  readonly grid: readonly [number, number, number];
  readonly libraryHash: string;
  readonly checksumAlgorithm: string;
  readonly files: readonly ManifestFileEntry[];
  readonly numSamples: number;
}

export interface DatasetHandle {
  readonly directory: string;
  readonly manifest: Manifest;
  readonly mode: Mode;
  readonly numSamples: number;
}

export interface GetSampleOptions {
  /** re-hash the file and compare against the manifest before parsing */
  readonly verifyChecksum?: boolean;
}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function expectString(raw: Record<string, unknown>, key: string): string {
  const value = raw[key];
  if (typeof value !== "string") {
    throw new Error(`manifest field ${JSON.stringify(key)} must be a string`);
  }
  return value;
}

function expectInteger(raw: Record<string, unknown>, key: string): number {
  const value = raw[key];
  if (typeof value !== "number" || !Number.isInteger(value)) {
    throw new Error(`manifest field ${JSON.stringify(key)} must be an integer`);
  }
  return value;
}

function coerceGrid(value: unknown): [number, number, number] {
  if (!Array.isArray(value) || value.length !== 3 ||
      !value.every((d) => typeof d === "number" && Number.isInteger(d) && d > 0)) {
    throw new Error('manifest field "grid" must be three positive integers');
  }
  return [value[0], value[1], value[2]];
}

function coerceFileEntry(value: unknown, index: number): ManifestFileEntry {
  if (!isRecord(value)) {
    throw new Error(`manifest files[${index}] must be an object`);
  }
  const classId = value["class_id"];
  if (classId !== undefined && (typeof classId !== "number" || !Number.isInteger(classId))) {
    throw new Error(`manifest files[${index}].class_id must be an integer`);
  }
  return {
    name: expectString(value, "name"),
    checksum: expectString(value, "checksum"),
    provenance: expectString(value, "provenance"),
    classId: classId === undefined ? null : (classId as number),
  };
}

function coerceManifest(raw: unknown): Manifest {
  if (!isRecord(raw)) {
    throw new Error("manifest must be a JSON object");
  }
  const formatVersion = expectInteger(raw, "format_version");
  if (formatVersion !== FORMAT_VERSION) {
    throw new Error(`unsupported manifest format_version ${formatVersion}`);
  }
  const mode = expectString(raw, "mode");
  if (mode !== "segmentation" && mode !== "classification") {
    throw new Error(`unknown manifest mode ${JSON.stringify(mode)}`);
  }
  const filesRaw = raw["files"];
  if (!Array.isArray(filesRaw)) {
    throw new Error('manifest field "files" must be an array');
  }
  const files = filesRaw.map(coerceFileEntry);
  const numSamples = expectInteger(raw, "num_samples");
  if (numSamples !== files.length) {
    throw new Error(`manifest num_samples is ${numSamples} but files lists ${files.length}`);
  }
  return {
    formatVersion,
    mode,
    masterSeed: expectInteger(raw, "master_seed"),
    grid: coerceGrid(raw["grid"]),
    libraryHash: expectString(raw, "library_hash"),
    checksumAlgorithm: expectString(raw, "checksum_algorithm"),
    files,
    numSamples,
  };
}

export function openDataset(directory: string): DatasetHandle {
  const manifestPath = join(directory, "manifest.json");
  let text: string;
  try {
    text = readFileSync(manifestPath, "utf8");
  } catch {
    throw new Error(`no manifest.json in ${directory}`);
  }
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (cause) {
    throw new Error(`manifest.json is not valid JSON: ${(cause as Error).message}`);
  }
  const manifest = coerceManifest(raw);
  return { directory, manifest, mode: manifest.mode, numSamples: manifest.numSamples };
}

export function getSample(
  handle: DatasetHandle,
  index: number,
  options: GetSampleOptions = {},
): SampleVolume {
  const { manifest } = handle;
  if (!Number.isInteger(index) || index < 0 || index >= manifest.numSamples) {
    throw new RangeError(
      `sample index ${index} out of range for ${manifest.numSamples} samples`,
    );
  }
  const entry = manifest.files[index]!;
  const data = readFileSync(join(handle.directory, entry.name));
  if (options.verifyChecksum) {
    const actual = contentChecksum(data);
    if (actual !== entry.checksum) {
      throw new Error(
        `checksum mismatch for ${entry.name}: manifest says ${entry.checksum}, file hashes to ${actual}`,
      );
    }
  }
  const volume = parseSample(data);
  const [w, h, d] = manifest.grid;
  if (volume.width !== w || volume.height !== h || volume.depth !== d) {
    throw new Error(
      `${entry.name} is ${volume.width}x${volume.height}x${volume.depth} ` +
      `but the manifest grid is ${w}x${h}x${d}`,
    );
  }
  if (volume.mode !== manifest.mode) {
    throw new Error(`${entry.name} is ${volume.mode} but the manifest mode is ${manifest.mode}`);
  }
  if (volume.mode === "classification" && entry.classId !== null &&
      volume.classId !== entry.classId) {
    throw new Error(
      `${entry.name} stores class ${volume.classId} but the manifest says ${entry.classId}`,
    );
  }
  return volume;
}
