import { createHash } from "node:crypto";

export const CHECKSUM_ALGORITHM = "sha256/64";

/** First 64 bits of sha256 over the raw file bytes, as 16 hex characters. */
export function contentChecksum(data: Uint8Array): string {
  return createHash("sha256").update(data).digest("hex").slice(0, 16);
}
