import { readFileSync } from "node:fs";

import type { LabeledDataset } from "./types.js";

/**
 * Parse a labeled dataset CSV with header `label,f0,f1,...`.
 * Malformed rows are reported by 1-based line number.
 */
export function loadDatasetCsv(path: string): LabeledDataset {
  const text = readFileSync(path, "utf-8");
  const lines = text.split(/\r?\n/).filter((line, i) => line.trim().length > 0 || i === 0);
  if (lines.length === 0 || lines[0].trim().length === 0) {
    throw new Error(`${path}: empty dataset file`);
  }
  const header = lines[0].split(",");
  if (header[0].trim() !== "label" || header.length < 2) {
    throw new Error(`${path}: line 1: expected header 'label,f0,...', got '${lines[0]}'`);
  }
  const dim = header.length - 1;

  const features: number[][] = [];
  const labels: number[] = [];
  for (let i = 1; i < lines.length; i++) {
    const lineNo = i + 1;
    const fields = lines[i].split(",");
    if (fields.length !== dim + 1) {
      throw new Error(`${path}: line ${lineNo}: expected ${dim + 1} fields, got ${fields.length}`);
    }
    const label = Number(fields[0]);
    if (!Number.isInteger(label) || label < 0) {
      throw new Error(`${path}: line ${lineNo}: label '${fields[0]}' is not a non-negative integer`);
    }
    const row = fields.slice(1).map(Number);
    if (row.some((v) => !Number.isFinite(v))) {
      throw new Error(`${path}: line ${lineNo}: non-numeric feature value`);
    }
    labels.push(label);
    features.push(row);
  }
  if (features.length === 0) {
    throw new Error(`${path}: empty dataset file`);
  }
  return { features, labels };
}
