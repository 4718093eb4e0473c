/**
 * Embedding model registry.
 *
 * Everything here is deterministic: the same model id and input text
 * always produce identical float32 vectors, so re-exports are
 * reproducible bit for bit. Transformer checkpoints are referenced by
 * id in manifests but need a model cache to resolve; in an offline
 * environment they fail with a clear load error instead of downloading.
 */

import { createHash } from "node:crypto";

export class ModelLoadError extends Error {}

export interface EmbedModel {
  /** Identifier recorded in manifests and summaries, e.g. "builtin/char-hash@1". */
  id: string;
  dim: number;
  provenance: "charlevel" | "contextual";
  /** Batch interface; one output vector per input text, same order. */
  embed(texts: string[]): Float32Array[];
}

function bucketHash(text: string): { bucket: bigint; sign: number } {
  const digest = createHash("sha256").update(text, "utf-8").digest();
  const value = digest.readBigUInt64LE(0);
  return { bucket: value >> 1n, sign: value & 1n ? 1 : -1 };
}

function l2Normalize(vec: Float64Array): void {
  let sumSquares = 0;
  for (const v of vec) sumSquares += v * v;
  const norm = Math.sqrt(sumSquares);
  if (norm > 0) for (let i = 0; i < vec.length; i++) vec[i] /= norm;
}

function quantize(vec: Float64Array): Float32Array {
  return Float32Array.from(vec, Math.fround);
}

/**
 * Character 2/3-gram hashing for name strings. Boundary sentinels mean
 * even single-character names produce grams, so non-empty input always
 * embeds to a unit vector.
 */
function charHashModel(dim: number): EmbedModel {
  return {
    id: `builtin/char-hash@1`,
    dim,
    provenance: "charlevel",
    embed(texts) {
      return texts.map((text) => {
        const key = text.split(/\s+/u).filter(Boolean).join(" ").toLowerCase();
        const vec = new Float64Array(dim);
        if (!key) return quantize(vec);
        const padded = `\x02${key}\x03`;
        const chars = [...padded];
        for (const size of [2, 3]) {
          for (let start = 0; start + size <= chars.length; start++) {
            const gram = chars.slice(start, start + size).join("");
            const { bucket, sign } = bucketHash(gram);
            vec[Number(bucket % BigInt(dim))] += sign;
          }
        }
        l2Normalize(vec);
        return quantize(vec);
      });
    },
  };
}

/**
 * Bag-of-words hashing for sentence-level text: every word owns a fixed
 * signed bucket pattern, a text embeds as the normalized sum. Stands in
 * for a transformer encoder where none can be loaded; the store format
 * and key handling are identical either way.
 */
function wordHashModel(dim: number): EmbedModel {
  return {
    id: `builtin/word-hash@1`,
    dim,
    provenance: "contextual",
    embed(texts) {
      return texts.map((text) => {
        const vec = new Float64Array(dim);
        const words = text.toLowerCase().split(/\s+/u).filter(Boolean);
        for (const word of words) {
          // three buckets per word so short texts still spread mass
          for (let salt = 0; salt < 3; salt++) {
            const { bucket, sign } = bucketHash(`${salt}\x00${word}`);
            vec[Number(bucket % BigInt(dim))] += sign;
          }
        }
        l2Normalize(vec);
        return quantize(vec);
      });
    },
  };
}

const BUILTIN_DIMS: Record<string, number> = {
  "builtin/char-hash@1": 200,
  "builtin/word-hash@1": 768,
};

/**
 * Resolve a model id to a loaded model. Builtin ids accept an optional
 * ":dim" override ("builtin/word-hash@1:64"); anything else is assumed
 * to be a pretrained checkpoint reference and fails here when no model
 * cache is reachable.
 */
export function resolveModel(spec: string): EmbedModel {
  const [id, dimPart] = spec.split(":", 2);
  const defaultDim = BUILTIN_DIMS[id];
  if (defaultDim === undefined) {
    throw new ModelLoadError(
      `cannot load model ${JSON.stringify(spec)}: ` +
        `pretrained checkpoints are not resolvable in this environment ` +
        `(builtin models: ${Object.keys(BUILTIN_DIMS).join(", ")})`,
    );
  }
  let dim = defaultDim;
  if (dimPart !== undefined) {
    dim = Number(dimPart);
    if (!Number.isInteger(dim) || dim < 1) {
      throw new ModelLoadError(`bad dimension override in ${JSON.stringify(spec)}`);
    }
  }
  return id === "builtin/char-hash@1" ? charHashModel(dim) : wordHashModel(dim);
}
