export { BinaryReader } from "./binary.js";
export { CHECKSUM_ALGORITHM, contentChecksum } from "./checksum.js";
export {
  FORMAT_VERSION,
  HEADER_SIZE,
  MAGIC,
  MAX_LABEL,
  Mode,
  SampleVolume,
  expectedFileSize,
  parseSample,
  serializeSample,
  voxelIndex,
} from "./container.js";
export {
  DatasetHandle,
  GetSampleOptions,
  Manifest,
  ManifestFileEntry,
  getSample,
  openDataset,
} from "./dataset.js";
export { echoFile } from "./echo.js";
