/**
 * Parse a sample container and write it back out. The output must be
 * byte-identical to the input; pairing this with a writer in another
 * language checks that both sides agree on the format.
 *
 * Usage: node dist/echo.js <input.vol> <output.vol>
 */

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { parseSample, serializeSample } from "./container.js";

export function echoFile(src: string, dst: string): void {
  const volume = parseSample(readFileSync(src));
  writeFileSync(dst, serializeSample(volume));
}

if (process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href) {
  const [src, dst] = process.argv.slice(2);
  if (src === undefined || dst === undefined) {
    console.error("usage: echo <input.vol> <output.vol>");
    process.exit(2);
  }
  echoFile(src, dst);
}
