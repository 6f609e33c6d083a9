import { createHash } from "node:crypto";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { loadDatasetCsv } from "../src/dataset.js";
import { exportPredictions } from "../src/export.js";
import { StubSoftmaxModel, softmax } from "../src/model.js";
import { normalizeRecord, parseInterchange, serializeInterchange, writeInterchange } from "../src/writer.js";

const workdir = mkdtempSync(join(tmpdir(), "exporter-test-"));

function datasetCsv(n: number, dim: number, classes: number): string {
  const lines = ["label," + Array.from({ length: dim }, (_, i) => `f${i}`).join(",")];
  for (let i = 0; i < n; i++) {
    const row = Array.from({ length: dim }, (_, j) => (Math.sin(i * 17 + j * 3) * 2).toFixed(6));
    lines.push(`${i % classes},${row.join(",")}`);
  }
  return lines.join("\n") + "\n";
}

describe("format contract", () => {
  it("emits header plus one line per record", () => {
    const path = join(workdir, "d100.csv");
    writeFileSync(path, datasetCsv(100, 4, 3));
    const out = join(workdir, "p100.jsonl");
    const manifest = exportPredictions(new StubSoftmaxModel(4, 3, 7), path, out);
    const lines = readFileSync(out, "utf-8").trimEnd().split("\n");
    expect(lines.length).toBe(101);
    expect(manifest.recordCount).toBe(lines.length - 1);
    expect(JSON.parse(lines[0])).toEqual({ num_classes: 3, producer: "memaudit-exporter-stub" });
  });

  it("checksum in the manifest matches the emitted bytes", () => {
    const path = join(workdir, "d10.csv");
    writeFileSync(path, datasetCsv(10, 3, 2));
    const out = join(workdir, "p10.jsonl");
    const manifest = exportPredictions(new StubSoftmaxModel(3, 2, 1), path, out);
    const digest = createHash("sha256").update(readFileSync(out)).digest("hex");
    expect(manifest.checksum).toBe(digest);
  });

  it("re-export is byte-identical", () => {
    const path = join(workdir, "ddet.csv");
    writeFileSync(path, datasetCsv(25, 4, 3));
    const outA = join(workdir, "pa.jsonl");
    const outB = join(workdir, "pb.jsonl");
    exportPredictions(new StubSoftmaxModel(4, 3, 9), path, outA);
    exportPredictions(new StubSoftmaxModel(4, 3, 9), path, outB);
    expect(readFileSync(outA, "utf-8")).toBe(readFileSync(outB, "utf-8"));
  });

  it("parses back exactly what it wrote", () => {
    const rows = [
      { label: 0, probs: [0.25, 0.75] },
      { label: 1, probs: [1 / 3, 2 / 3] },
    ];
    const text = serializeInterchange(rows, 2, "unit");
    const parsed = parseInterchange(text);
    expect(parsed.numClasses).toBe(2);
    expect(parsed.rows[1].probs[0]).toBe(1 / 3);
  });
});

describe("validation", () => {
  it("rejects row sums off by more than 1e-6, naming the record", () => {
    const rows = [
      { label: 0, probs: [0.5, 0.5] },
      { label: 0, probs: [0.5005, 0.5005] }, // off by 1e-3
    ];
    expect(() => serializeInterchange(rows, 2, "unit")).toThrowError(/record 2 \(line 3\).*softmax/);
  });

  it("renormalizes sums within 1e-6", () => {
    const off = 4e-7;
    const clean = normalizeRecord({ label: 1, probs: [0.5 + off, 0.5 + off] }, 2, 1);
    const total = clean.probs.reduce((a, b) => a + b, 0);
    expect(Math.abs(total - 1.0)).toBeLessThan(1e-15);
  });

  it("rejects labels at or above the class count, naming the record", () => {
    expect(() => normalizeRecord({ label: 2, probs: [0.5, 0.5] }, 2, 5)).toThrowError(/record 5/);
  });

  it("rejects negative entries with softmax guidance", () => {
    expect(() => normalizeRecord({ label: 0, probs: [1.2, -0.2] }, 2, 1)).toThrowError(/softmax/);
  });

  it("rejects dataset labels beyond the model classes with the csv line number", () => {
    const path = join(workdir, "dbad.csv");
    writeFileSync(path, "label,f0,f1\n0,0.1,0.2\n5,0.3,0.4\n");
    const out = join(workdir, "pbad.jsonl");
    expect(() => exportPredictions(new StubSoftmaxModel(2, 3, 0), path, out)).toThrowError(/line 3/);
  });

  it("reports malformed csv rows by line number", () => {
    const path = join(workdir, "dshort.csv");
    writeFileSync(path, "label,f0,f1\n0,0.1,0.2\n1,0.3\n");
    expect(() => loadDatasetCsv(path)).toThrowError(/line 3/);
  });
});

describe("stub model", () => {
  it("is deterministic under its seed", () => {
    const a = new StubSoftmaxModel(4, 3, 42).predict([[0.1, -0.2, 0.3, 0.4]]);
    const b = new StubSoftmaxModel(4, 3, 42).predict([[0.1, -0.2, 0.3, 0.4]]);
    expect(a).toEqual(b);
  });

  it("produces probability rows", () => {
    const probs = new StubSoftmaxModel(3, 4, 5).predict([[1, 2, 3], [0, 0, 0]]);
    for (const row of probs) {
      const total = row.reduce((x, y) => x + y, 0);
      expect(Math.abs(total - 1.0)).toBeLessThan(1e-12);
      expect(Math.min(...row)).toBeGreaterThan(0);
    }
  });

  it("softmax is shift-invariant", () => {
    const a = softmax([1, 2, 3]);
    const b = softmax([101, 102, 103]);
    a.forEach((v, i) => expect(Math.abs(v - b[i])).toBeLessThan(1e-12));
  });
});
