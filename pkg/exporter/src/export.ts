/** The export run itself: records in, one store file per output path. */

import * as path from "node:path";

import { ExportManifest, FieldSpec } from "./manifest.js";
import { EmbedModel, resolveModel } from "./models.js";
import { BibRecord, nameForms, normalizeKey, readRecords } from "./records.js";
import { VectorStore, createStore, putVector, writeStore } from "./store.js";

export interface FieldSummary {
  kind: string;
  model: string;
  output: string;
  /** Raw strings encountered, before any normalization. */
  occurrences: number;
  /** Entries contributed to the store. */
  keys: number;
  /** Normalized keys reached by more than one distinct raw spelling. */
  collisions: number;
}

export interface ExportSummary {
  records: number;
  fields: FieldSummary[];
  outputs: string[];
}

function fieldTexts(kind: FieldSpec["kind"], records: BibRecord[]): string[] {
  switch (kind) {
    case "titles":
      return records.map((r) => r.title);
    case "sources":
      return records.map((r) => r.source);
    case "names":
      return records.flatMap((r) => r.authors.flatMap(nameForms));
  }
}

export function runExport(manifest: ExportManifest, baseDir = "."): ExportSummary {
  const records = readRecords(path.resolve(baseDir, manifest.records));

  const models = new Map<string, EmbedModel>();
  for (const field of manifest.fields) {
    if (!models.has(field.model)) models.set(field.model, resolveModel(field.model));
  }

  // outputs can be shared between fields; collect per-store key sets first
  const stores = new Map<string, VectorStore>();
  const summaries: FieldSummary[] = [];
  for (const field of manifest.fields) {
    const model = models.get(field.model)!;
    const outputPath = path.resolve(baseDir, field.output);
    let store = stores.get(outputPath);
    if (!store) {
      store = createStore(model.dim);
      stores.set(outputPath, store);
    }

    const rawByKey = new Map<string, Set<string>>();
    let occurrences = 0;
    for (const text of fieldTexts(field.kind, records)) {
      const key = normalizeKey(text);
      if (!key) continue;
      occurrences++;
      let raws = rawByKey.get(key);
      if (!raws) rawByKey.set(key, (raws = new Set()));
      raws.add(text);
    }

    // embed the normalized key, not the raw spelling: colliding raws then
    // agree on the vector and deduplication is lossless
    const newKeys = [...rawByKey.keys()].filter((k) => !store!.entries.has(k));
    for (let start = 0; start < newKeys.length; start += manifest.batchSize) {
      const batch = newKeys.slice(start, start + manifest.batchSize);
      const vectors = model.embed(batch);
      batch.forEach((key, i) => putVector(store!, key, vectors[i]));
    }

    let collisions = 0;
    for (const raws of rawByKey.values()) if (raws.size > 1) collisions++;
    summaries.push({
      kind: field.kind,
      model: model.id,
      output: field.output,
      occurrences,
      keys: rawByKey.size,
      collisions,
    });
  }

  for (const [outputPath, store] of stores) writeStore(outputPath, store);
  return {
    records: records.length,
    fields: summaries,
    outputs: [...stores.keys()],
  };
}

export function formatSummary(summary: ExportSummary): string {
  const lines = [`records\t${summary.records}`];
  for (const f of summary.fields) {
    lines.push(
      `field\t${f.kind}\tmodel=${f.model}\toccurrences=${f.occurrences}` +
        `\tkeys=${f.keys}\tcollisions=${f.collisions}\toutput=${f.output}`,
    );
  }
  return lines.join("\n");
}
