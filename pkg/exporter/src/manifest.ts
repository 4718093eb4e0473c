/**
 * Export manifests: a JSON file naming the records to read, which
 * fields to embed with which model, and where each store goes.
 *
 * ```json
 * {
 *   "records": "records.jsonl",
 *   "batchSize": 256,
 *   "fields": [
 *     { "kind": "titles",  "model": "builtin/word-hash@1:768", "output": "titles.wemb" },
 *     { "kind": "sources", "model": "builtin/word-hash@1:768", "output": "titles.wemb" },
 *     { "kind": "names",   "model": "builtin/char-hash@1",     "output": "names.wemb" }
 *   ]
 * }
 * ```
 *
 * Fields sharing an output path are merged into one store and must use
 * the same model.
 */

import * as fs from "node:fs";

export class ManifestError extends Error {}

export type FieldKind = "titles" | "sources" | "names";

export interface FieldSpec {
  kind: FieldKind;
  model: string;
  output: string;
}

export interface ExportManifest {
  records: string;
  batchSize: number;
  fields: FieldSpec[];
}

const KINDS: FieldKind[] = ["titles", "sources", "names"];

export function parseManifest(text: string, label = "manifest"): ExportManifest {
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch (err) {
    throw new ManifestError(`${label}: not valid JSON (${(err as Error).message})`);
  }
  const obj = parsed as Record<string, unknown>;
  if (typeof obj.records !== "string" || !obj.records) {
    throw new ManifestError(`${label}: "records" must be a non-empty path`);
  }
  const batchSize = obj.batchSize === undefined ? 256 : obj.batchSize;
  if (!Number.isInteger(batchSize) || (batchSize as number) < 1) {
    throw new ManifestError(`${label}: "batchSize" must be a positive integer`);
  }
  if (!Array.isArray(obj.fields) || obj.fields.length === 0) {
    throw new ManifestError(`${label}: "fields" must be a non-empty array`);
  }
  const fields: FieldSpec[] = [];
  const modelPerOutput = new Map<string, string>();
  const seenKinds = new Set<string>();
  for (const [index, entry] of obj.fields.entries()) {
    const f = entry as Record<string, unknown>;
    if (!KINDS.includes(f.kind as FieldKind)) {
      throw new ManifestError(
        `${label}: fields[${index}].kind must be one of ${KINDS.join(", ")}`,
      );
    }
    if (typeof f.model !== "string" || !f.model) {
      throw new ManifestError(`${label}: fields[${index}].model missing`);
    }
    if (typeof f.output !== "string" || !f.output) {
      throw new ManifestError(`${label}: fields[${index}].output missing`);
    }
    if (seenKinds.has(f.kind as string)) {
      throw new ManifestError(`${label}: duplicate field kind ${JSON.stringify(f.kind)}`);
    }
    seenKinds.add(f.kind as string);
    const prior = modelPerOutput.get(f.output);
    if (prior !== undefined && prior !== f.model) {
      throw new ManifestError(
        `${label}: output ${JSON.stringify(f.output)} mixes models ${prior} and ${f.model}`,
      );
    }
    modelPerOutput.set(f.output, f.model);
    fields.push({ kind: f.kind as FieldKind, model: f.model, output: f.output });
  }
  return { records: obj.records, batchSize: batchSize as number, fields };
}

export function loadManifest(filePath: string): ExportManifest {
  return parseManifest(fs.readFileSync(filePath, "utf-8"), filePath);
}
