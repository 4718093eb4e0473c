/**
 * Binary vector store files.
 *
 * Layout (all little-endian): 4-byte magic "WEMB", u16 version, u32
 * dimension, u64 entry count, then per entry a u32 key length, the
 * UTF-8 key bytes, and dimension float32 values. Keys are written in
 * sorted order so the same content always produces the same bytes.
 */

import { randomBytes } from "node:crypto";
import * as fs from "node:fs";
import * as path from "node:path";

const MAGIC = Buffer.from("WEMB", "ascii");
const VERSION = 1;
const HEADER_BYTES = 18;
const MAX_KEY_BYTES = 1 << 20;

export class StoreFormatError extends Error {}

export interface VectorStore {
  dim: number;
  entries: Map<string, Float32Array>;
}

export function createStore(dim: number): VectorStore {
  if (!Number.isInteger(dim) || dim < 1) {
    throw new StoreFormatError(`store dimension must be a positive integer, got ${dim}`);
  }
  return { dim, entries: new Map() };
}

/** Insert one vector, quantizing to float32. Width mismatches throw. */
export function putVector(store: VectorStore, key: string, values: ArrayLike<number>): void {
  if (values.length !== store.dim) {
    throw new StoreFormatError(
      `vector for ${JSON.stringify(key)} has length ${values.length}, expected ${store.dim}`,
    );
  }
  store.entries.set(key, Float32Array.from(values));
}

// Match the reference writer's sort, which orders keys by Unicode code
// point; the default JS string sort compares UTF-16 units and disagrees
// beyond the basic plane.
function codePointCompare(a: string, b: string): number {
  const ia = a[Symbol.iterator]();
  const ib = b[Symbol.iterator]();
  for (;;) {
    const na = ia.next();
    const nb = ib.next();
    if (na.done || nb.done) return (na.done ? 0 : 1) - (nb.done ? 0 : 1);
    const ca = na.value.codePointAt(0)!;
    const cb = nb.value.codePointAt(0)!;
    if (ca !== cb) return ca - cb;
  }
}

export function encodeStore(store: VectorStore): Buffer {
  const keys = [...store.entries.keys()].sort(codePointCompare);
  const parts: Buffer[] = [];
  const header = Buffer.alloc(HEADER_BYTES);
  MAGIC.copy(header, 0);
  header.writeUInt16LE(VERSION, 4);
  header.writeUInt32LE(store.dim, 6);
  header.writeBigUInt64LE(BigInt(keys.length), 10);
  parts.push(header);
  for (const key of keys) {
    const encoded = Buffer.from(key, "utf-8");
    if (encoded.length > MAX_KEY_BYTES) {
      throw new StoreFormatError(`key exceeds ${MAX_KEY_BYTES} bytes`);
    }
    const lenBuf = Buffer.alloc(4);
    lenBuf.writeUInt32LE(encoded.length, 0);
    const vec = store.entries.get(key)!;
    const vecBuf = Buffer.alloc(4 * store.dim);
    const view = new DataView(vecBuf.buffer, vecBuf.byteOffset);
    for (let i = 0; i < store.dim; i++) view.setFloat32(4 * i, vec[i], true);
    parts.push(lenBuf, encoded, vecBuf);
  }
  return Buffer.concat(parts);
}

export function decodeStore(data: Buffer, label = "store"): VectorStore {
  if (data.length < HEADER_BYTES || !data.subarray(0, 4).equals(MAGIC)) {
    throw new StoreFormatError(`${label}: not an embedding store file`);
  }
  const version = data.readUInt16LE(4);
  if (version !== VERSION) {
    throw new StoreFormatError(`${label}: unsupported store version ${version}`);
  }
  const dim = data.readUInt32LE(6);
  if (dim < 1) throw new StoreFormatError(`${label}: invalid dimension ${dim}`);
  const count = data.readBigUInt64LE(10);
  const store = createStore(dim);
  const vecBytes = 4 * dim;
  let offset = HEADER_BYTES;
  for (let i = 0n; i < count; i++) {
    if (offset + 4 > data.length) {
      throw new StoreFormatError(`${label}: truncated at entry ${i}`);
    }
    const keyLen = data.readUInt32LE(offset);
    offset += 4;
    if (keyLen > MAX_KEY_BYTES) {
      throw new StoreFormatError(`${label}: unreasonable key length ${keyLen}`);
    }
    if (offset + keyLen + vecBytes > data.length) {
      throw new StoreFormatError(`${label}: truncated at entry ${i}`);
    }
    const key = data.subarray(offset, offset + keyLen).toString("utf-8");
    offset += keyLen;
    const vec = new Float32Array(dim);
    const view = new DataView(data.buffer, data.byteOffset + offset, vecBytes);
    for (let j = 0; j < dim; j++) vec[j] = view.getFloat32(4 * j, true);
    offset += vecBytes;
    store.entries.set(key, vec);
  }
  if (offset !== data.length) {
    throw new StoreFormatError(`${label}: trailing bytes after ${count} entries`);
  }
  return store;
}

/** Write via a sibling temp file + rename, so readers never see a partial store. */
export function writeStore(filePath: string, store: VectorStore): void {
  const dir = path.dirname(filePath);
  fs.mkdirSync(dir, { recursive: true });
  const tmp = path.join(dir, `.${path.basename(filePath)}.${randomBytes(6).toString("hex")}`);
  fs.writeFileSync(tmp, encodeStore(store));
  fs.renameSync(tmp, filePath);
}

export function readStore(filePath: string): VectorStore {
  return decodeStore(fs.readFileSync(filePath), filePath);
}
