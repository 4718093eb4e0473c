#!/usr/bin/env node
/**
 * embed-export <manifest.json>
 *
 * Exit codes match the consumer's convention: 0 success, 1 usage,
 * 2 data or model errors.
 */

import * as path from "node:path";

import { formatSummary, runExport } from "./export.js";
import { loadManifest } from "./manifest.js";

export function main(argv: string[]): number {
  if (argv.length !== 1 || argv[0] === "--help" || argv[0] === "-h") {
    const stream = argv[0] === "--help" || argv[0] === "-h" ? console.log : console.error;
    stream("usage: embed-export <manifest.json>");
    return argv.length === 1 ? 0 : 1;
  }
  try {
    const manifestPath = argv[0];
    const manifest = loadManifest(manifestPath);
    const summary = runExport(manifest, path.dirname(path.resolve(manifestPath)));
    console.log(formatSummary(summary));
    return 0;
  } catch (err) {
    console.error(`embed-export: error: ${(err as Error).message}`);
    return 2;
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("cli.ts")) {
  process.exit(main(process.argv.slice(2)));
}
