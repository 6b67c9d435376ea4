// Session documents: the import/export unit shared with the service.

import type { LabelState } from "./labels.js";
import type { ModelKind, SessionDoc } from "./types.js";

const MODEL_KINDS: ModelKind[] = ["dbranch", "dbranch_ens", "dtree", "rforest", "knn"];

export function buildSessionDoc(
  labels: LabelState,
  modelKind: ModelKind,
  nRandomNegatives: number,
  seed: number,
  fingerprint: string,
): string {
  const doc: SessionDoc = {
    version: 1,
    dataset_fingerprint: fingerprint,
    positives: [...labels.positives].sort((a, b) => a - b),
    negatives: [...labels.negatives].sort((a, b) => a - b),
    model_kind: modelKind,
    n_random_negatives: nRandomNegatives,
    seed: seed,
  };
  return JSON.stringify(doc, null, 2) + "\n";
}

function idArray(value: unknown, name: string): number[] {
  if (!Array.isArray(value)) throw new Error(`session field '${name}' must be an array`);
  for (const v of value) {
    if (!Number.isInteger(v) || (v as number) < 0) {
      throw new Error(`session field '${name}' must contain non-negative integers`);
    }
  }
  return value as number[];
}

export function parseSessionDoc(text: string): SessionDoc {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new Error("session file is not valid JSON");
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new Error("session file must hold a JSON object");
  }
  const doc = raw as Record<string, unknown>;
  const modelKind = (doc.model_kind ?? doc.model) as ModelKind;
  if (!MODEL_KINDS.includes(modelKind)) {
    throw new Error(`unknown model kind '${String(modelKind)}'`);
  }
  const positives = idArray(doc.positives, "positives");
  const negatives = idArray(doc.negatives ?? [], "negatives");
  const overlap = positives.filter((id) => negatives.includes(id));
  if (positives.length === 0) throw new Error("session has no positive labels");
  if (overlap.length > 0) throw new Error(`ids labeled both ways: ${overlap.slice(0, 5)}`);
  const nRandom = doc.n_random_negatives ?? 0;
  const seed = doc.seed ?? 0;
  if (!Number.isInteger(nRandom) || (nRandom as number) < 0) {
    throw new Error("n_random_negatives must be a non-negative integer");
  }
  if (!Number.isInteger(seed)) throw new Error("seed must be an integer");
  return {
    version: Number.isInteger(doc.version) ? (doc.version as number) : 1,
    dataset_fingerprint:
      typeof doc.dataset_fingerprint === "string" ? doc.dataset_fingerprint : "0x0",
    positives,
    negatives,
    model_kind: modelKind,
    n_random_negatives: nRandom as number,
    seed: seed as number,
  };
}
