/** Canonical bibliographic records, one JSON object per line. */

import * as fs from "node:fs";

export class RecordFormatError extends Error {}

export interface BibRecord {
  id: string;
  title: string;
  source: string;
  year: number | null;
  authors: string[];
}

export function readRecords(filePath: string): BibRecord[] {
  const text = fs.readFileSync(filePath, "utf-8");
  const records: BibRecord[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch {
      throw new RecordFormatError(`${filePath}:${i + 1}: not valid JSON`);
    }
    const obj = parsed as Record<string, unknown>;
    if (
      typeof obj.id !== "string" ||
      typeof obj.title !== "string" ||
      typeof obj.source !== "string" ||
      !Array.isArray(obj.authors) ||
      obj.authors.some((a) => typeof a !== "string") ||
      obj.authors.length === 0
    ) {
      throw new RecordFormatError(`${filePath}:${i + 1}: malformed record`);
    }
    records.push({
      id: obj.id,
      title: obj.title,
      source: obj.source,
      year: typeof obj.year === "number" ? obj.year : null,
      authors: obj.authors as string[],
    });
  }
  return records;
}

/** Whitespace-collapsed store key, matching the consumer's lookup normalization. */
export function normalizeKey(text: string): string {
  return text.split(/\s+/u).filter(Boolean).join(" ");
}

const SUFFIX = /^\d{4}$/;

/**
 * The name forms a complete character-level store must cover for one
 * author string: the display name (any 4-digit homonym suffix dropped),
 * its first-initial + last-name variate, and the bare first name token.
 */
export function nameForms(raw: string): string[] {
  const tokens = normalizeKey(raw).split(" ");
  if (tokens.length === 0 || tokens[0] === "") return [];
  if (tokens.length > 1 && SUFFIX.test(tokens[tokens.length - 1])) tokens.pop();
  const display = tokens.join(" ");
  if (tokens.length === 1) return [display];
  const first = tokens[0];
  const last = tokens[tokens.length - 1];
  const initial = [...[...first][0].toUpperCase()][0];
  return [display, `${initial} ${last}`, first];
}
