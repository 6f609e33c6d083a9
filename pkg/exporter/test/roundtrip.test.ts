import { spawnSync } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { exportPredictions } from "../src/export.js";
import { StubSoftmaxModel } from "../src/model.js";

// Cross-component contract: files this package emits must load through the
// auditing toolkit's own reader with no value drift. The reader side runs
// in python, spawned here.

const LOADER_SCRIPT = `
import json, sys
from memaudit.data import load_predictions
preds = load_predictions(sys.argv[1])
print(json.dumps({
    "num_classes": preds.num_classes,
    "labels": preds.labels.tolist(),
    "probs": preds.probs.tolist(),
}))
`;

function pythonLoad(path: string): { num_classes: number; labels: number[]; probs: number[][] } {
  const result = spawnSync("python3", ["-c", LOADER_SCRIPT, path], { encoding: "utf-8" });
  if (result.status !== 0) {
    throw new Error(`python loader failed: ${result.stderr}`);
  }
  return JSON.parse(result.stdout);
}

describe("round-trip through the auditing toolkit's loader", () => {
  it("1000 stub-model records reload with max probability error <= 1e-12", () => {
    const workdir = mkdtempSync(join(tmpdir(), "exporter-roundtrip-"));
    const n = 1000;
    const dim = 6;
    const classes = 4;

    const csv = ["label," + Array.from({ length: dim }, (_, i) => `f${i}`).join(",")];
    const features: number[][] = [];
    const labels: number[] = [];
    for (let i = 0; i < n; i++) {
      const row = Array.from({ length: dim }, (_, j) => Math.sin(i * 13 + j * 5) * 3);
      features.push(row);
      labels.push(i % classes);
      csv.push(`${i % classes},${row.map((v) => v.toString()).join(",")}`);
    }
    const dataPath = join(workdir, "data.csv");
    writeFileSync(dataPath, csv.join("\n") + "\n");

    const model = new StubSoftmaxModel(dim, classes, 3);
    const outPath = join(workdir, "preds.jsonl");
    const manifest = exportPredictions(model, dataPath, outPath, "roundtrip-test");
    expect(manifest.recordCount).toBe(n);

    const loaded = pythonLoad(outPath);
    expect(loaded.num_classes).toBe(classes);
    expect(loaded.labels).toEqual(labels);

    const expected = model.predict(features);
    let worst = 0;
    for (let i = 0; i < n; i++) {
      for (let c = 0; c < classes; c++) {
        worst = Math.max(worst, Math.abs(loaded.probs[i][c] - expected[i][c]));
      }
    }
    expect(worst).toBeLessThanOrEqual(1e-12);
  });

  it("files that fail validation are rejected by the loader with line numbers", () => {
    const workdir = mkdtempSync(join(tmpdir(), "exporter-reject-"));
    const badSum = join(workdir, "bad_sum.jsonl");
    writeFileSync(
      badSum,
      '{"num_classes": 2, "producer": "x"}\n' +
        '{"label": 0, "probs": [0.5, 0.5]}\n' +
        '{"label": 0, "probs": [0.6, 0.5]}\n',
    );
    expect(() => pythonLoad(badSum)).toThrowError(/line 3/);

    const badLabel = join(workdir, "bad_label.jsonl");
    writeFileSync(
      badLabel,
      '{"num_classes": 2, "producer": "x"}\n' + '{"label": 2, "probs": [0.5, 0.5]}\n',
    );
    expect(() => pythonLoad(badLabel)).toThrowError(/line 2/);
  });
});
