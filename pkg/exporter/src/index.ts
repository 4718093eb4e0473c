export {
  StoreFormatError,
  VectorStore,
  createStore,
  decodeStore,
  encodeStore,
  putVector,
  readStore,
  writeStore,
} from "./store.js";
export { EmbedModel, ModelLoadError, resolveModel } from "./models.js";
export {
  BibRecord,
  RecordFormatError,
  nameForms,
  normalizeKey,
  readRecords,
} from "./records.js";
export {
  ExportManifest,
  FieldKind,
  FieldSpec,
  ManifestError,
  loadManifest,
  parseManifest,
} from "./manifest.js";
export { ExportSummary, FieldSummary, formatSummary, runExport } from "./export.js";
