/**
 * Binary sample container: a 24-byte little-endian header followed by the
 * intensity payload and either a label volume (segmentation) or a single
 * class id (classification).
 *
 * Header layout (offsets in bytes):
 *   0  magic "FDIF"
 *   4  u32 format version
 *   8  u8  mode flag (0 = segmentation, 1 = classification)
 *   9  u8  intensity dtype code (0 = float32)
 *  10  u8  label dtype code (0 = uint16)
 *  11  u8  reserved
 *  12  u32 width, 16 u32 height, 20 u32 depth
 *
 * Arrays are C-order (depth, height, width), x fastest: the voxel (x, y, z)
 * lives at flat index x + width * (y + height * z).
 */

import { BinaryReader } from "./binary.js";

export const MAGIC = "FDIF";
export const FORMAT_VERSION = 1;
export const HEADER_SIZE = 24;
export const MAX_LABEL = 109;

export type Mode = "segmentation" | "classification";

const MODE_BY_FLAG: Record<number, Mode> = { 0: "segmentation", 1: "classification" };
const FLAG_BY_MODE: Record<Mode, number> = { segmentation: 0, classification: 1 };

export interface SampleVolume {
  readonly mode: Mode;
  readonly width: number;
  readonly height: number;
  readonly depth: number;
  /** length width*height*depth, x fastest */
  readonly intensity: Float32Array;
  /** segmentation only, same layout as intensity */
  readonly labels: Uint16Array | null;
  /** classification only */
  readonly classId: number | null;
}

export function expectedFileSize(mode: Mode, width: number, height: number, depth: number): number {
  const n = width * height * depth;
  return HEADER_SIZE + 4 * n + (mode === "classification" ? 2 : 2 * n);
}

/** Flat index of voxel (x, y, z) in the payload arrays. */
export function voxelIndex(width: number, height: number, x: number, y: number, z: number): number {
  return x + width * (y + height * z);
}

const HOST_LITTLE_ENDIAN = new Uint8Array(new Uint32Array([1]).buffer)[0] === 1;

function swapInPlace(bytes: Uint8Array, wordSize: number): void {
  for (let i = 0; i < bytes.length; i += wordSize) {
    for (let a = 0, b = wordSize - 1; a < b; a++, b--) {
      const tmp = bytes[i + a]!;
      bytes[i + a] = bytes[i + b]!;
      bytes[i + b] = tmp;
    }
  }
}

function float32ArrayLE(bytes: Uint8Array): Float32Array {
  const copy = new Uint8Array(bytes.byteLength); // owned, offset 0, aligned
  copy.set(bytes);
  if (!HOST_LITTLE_ENDIAN) swapInPlace(copy, 4);
  return new Float32Array(copy.buffer, 0, copy.byteLength / 4);
}

function uint16ArrayLE(bytes: Uint8Array): Uint16Array {
  const copy = new Uint8Array(bytes.byteLength);
  copy.set(bytes);
  if (!HOST_LITTLE_ENDIAN) swapInPlace(copy, 2);
  return new Uint16Array(copy.buffer, 0, copy.byteLength / 2);
}

function leBytesOf(array: Float32Array | Uint16Array): Uint8Array {
  const bytes = new Uint8Array(array.buffer, array.byteOffset, array.byteLength).slice();
  if (!HOST_LITTLE_ENDIAN) swapInPlace(bytes, array.BYTES_PER_ELEMENT);
  return bytes;
}

export function parseSample(data: Uint8Array): SampleVolume {
  if (data.byteLength < HEADER_SIZE) {
    throw new Error(
      `file too short for the ${HEADER_SIZE}-byte header ` +
      `(${HEADER_SIZE - data.byteLength} bytes missing)`,
    );
  }
  const reader = new BinaryReader(data);
  const magic = reader.readAscii(4);
  if (magic !== MAGIC) {
    throw new Error(`bad magic ${JSON.stringify(magic)}, expected ${JSON.stringify(MAGIC)}`);
  }
  const version = reader.readUint32LE();
  if (version !== FORMAT_VERSION) {
    throw new Error(`unsupported format version ${version}`);
  }
  const modeFlag = reader.readUint8();
  const mode = MODE_BY_FLAG[modeFlag];
  if (mode === undefined) {
    throw new Error(`unknown mode flag ${modeFlag}`);
  }
  const intensityCode = reader.readUint8();
  const labelCode = reader.readUint8();
  reader.readUint8(); // reserved
  if (intensityCode !== 0 || labelCode !== 0) {
    throw new Error(`unknown dtype codes (${intensityCode}, ${labelCode})`);
  }
  const width = reader.readUint32LE();
  const height = reader.readUint32LE();
  const depth = reader.readUint32LE();

  const expected = expectedFileSize(mode, width, height, depth);
  if (data.byteLength !== expected) {
    throw new Error(
      `expected ${expected} bytes for ${width}x${height}x${depth} ${mode}, ` +
      `got ${data.byteLength} (${expected - data.byteLength} missing)`,
    );
  }

  const n = width * height * depth;
  const intensity = float32ArrayLE(reader.readBytes(4 * n));
  if (mode === "segmentation") {
    const labels = uint16ArrayLE(reader.readBytes(2 * n));
    return { mode, width, height, depth, intensity, labels, classId: null };
  }
  const classId = reader.readUint16LE();
  return { mode, width, height, depth, intensity, labels: null, classId };
}

/** Exact inverse of parseSample; parse then serialize reproduces the file bytes. */
export function serializeSample(volume: SampleVolume): Uint8Array {
  const { mode, width, height, depth } = volume;
  const out = new Uint8Array(expectedFileSize(mode, width, height, depth));
  const view = new DataView(out.buffer);
  out.set(new TextEncoder().encode(MAGIC), 0);
  view.setUint32(4, FORMAT_VERSION, true);
  view.setUint8(8, FLAG_BY_MODE[mode]);
  view.setUint32(12, width, true);
  view.setUint32(16, height, true);
  view.setUint32(20, depth, true);

  out.set(leBytesOf(volume.intensity), HEADER_SIZE);
  const labelOffset = HEADER_SIZE + 4 * volume.intensity.length;
  if (mode === "segmentation") {
    if (volume.labels === null) throw new Error("segmentation volume without labels");
    out.set(leBytesOf(volume.labels), labelOffset);
  } else {
    if (volume.classId === null) throw new Error("classification volume without a class id");
    view.setUint16(labelOffset, volume.classId, true);
  }
  return out;
}
