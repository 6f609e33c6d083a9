import { createHash } from "node:crypto";
import { writeFileSync } from "node:fs";

import type { ExportManifest, PredictionRow } from "./types.js";

/** Row sums may be off by at most this much before a record is rejected. */
export const SUM_TOLERANCE = 1e-6;

/**
 * Validate one record and return it with probabilities renormalized.
 * `recordIndex` is 1-based; in the file the record sits on line recordIndex + 1.
 */
export function normalizeRecord(row: PredictionRow, numClasses: number, recordIndex: number): PredictionRow {
  const where = `record ${recordIndex} (line ${recordIndex + 1})`;
  if (!Number.isInteger(row.label) || row.label < 0 || row.label >= numClasses) {
    throw new Error(`${where}: label ${row.label} out of range for ${numClasses} classes`);
  }
  if (row.probs.length !== numClasses) {
    throw new Error(`${where}: expected ${numClasses} probabilities, got ${row.probs.length}`);
  }
  if (row.probs.some((p) => !Number.isFinite(p) || p < 0 || p > 1)) {
    throw new Error(
      `${where}: entries outside [0, 1]; model outputs are not probabilities - ` +
        "apply a softmax before exporting",
    );
  }
  const sum = row.probs.reduce((a, b) => a + b, 0);
  if (Math.abs(sum - 1.0) > SUM_TOLERANCE) {
    throw new Error(
      `${where}: probabilities sum to ${sum}; model outputs are not probabilities - ` +
        "apply a softmax before exporting",
    );
  }
  const probs = sum === 1.0 ? row.probs.slice() : row.probs.map((p) => p / sum);
  return { label: row.label, probs };
}

/** Serialize header plus records to interchange text (one JSON object per line). */
export function serializeInterchange(rows: PredictionRow[], numClasses: number, producer: string): string {
  const lines: string[] = [JSON.stringify({ num_classes: numClasses, producer })];
  rows.forEach((row, i) => {
    const clean = normalizeRecord(row, numClasses, i + 1);
    lines.push(JSON.stringify({ label: clean.label, probs: clean.probs }));
  });
  return lines.join("\n") + "\n";
}

/** Write the interchange file and return its manifest. */
export function writeInterchange(
  path: string,
  rows: PredictionRow[],
  numClasses: number,
  producer: string,
): ExportManifest {
  const text = serializeInterchange(rows, numClasses, producer);
  writeFileSync(path, text);
  return {
    producer,
    numClasses,
    recordCount: rows.length,
    checksum: createHash("sha256").update(text).digest("hex"),
  };
}

/** Parse interchange text back into rows; used to round-trip-check emitted files. */
export function parseInterchange(text: string): { numClasses: number; producer: string; rows: PredictionRow[] } {
  const lines = text.split(/\r?\n/).filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new Error("line 1: missing header object");
  }
  const header = JSON.parse(lines[0]);
  if (typeof header?.num_classes !== "number" || typeof header?.producer !== "string") {
    throw new Error("line 1: header must carry num_classes and producer");
  }
  const rows: PredictionRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const obj = JSON.parse(lines[i]);
    if (typeof obj?.label !== "number" || !Array.isArray(obj?.probs)) {
      throw new Error(`line ${i + 1}: expected an object with label and probs`);
    }
    rows.push({ label: obj.label, probs: obj.probs });
  }
  return { numClasses: header.num_classes, producer: header.producer, rows };
}
