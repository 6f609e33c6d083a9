import type { ModelHandle } from "./types.js";

/** Deterministic 32-bit PRNG (mulberry32); enough for stub weights. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function softmax(logits: number[]): number[] {
  const peak = Math.max(...logits);
  const exps = logits.map((v) => Math.exp(v - peak));
  const total = exps.reduce((a, b) => a + b, 0);
  return exps.map((v) => v / total);
}

/**
 * Stand-in for an externally trained classifier: a seeded random linear
 * layer followed by a softmax. Deterministic under (seed, dims), so
 * exports are reproducible byte for byte.
 */
export class StubSoftmaxModel implements ModelHandle {
  readonly numClasses: number;
  private readonly weights: number[][];
  private readonly bias: number[];

  constructor(inputDim: number, numClasses: number, seed = 0) {
    if (inputDim < 1 || numClasses < 2) {
      throw new Error("stub model needs inputDim >= 1 and numClasses >= 2");
    }
    this.numClasses = numClasses;
    const next = mulberry32(seed);
    this.weights = Array.from({ length: inputDim }, () =>
      Array.from({ length: numClasses }, () => 2.0 * next() - 1.0),
    );
    this.bias = Array.from({ length: numClasses }, () => 2.0 * next() - 1.0);
  }

  predict(features: number[][]): number[][] {
    return features.map((row) => {
      if (row.length !== this.weights.length) {
        throw new Error(`feature dim ${row.length} does not match model input dim ${this.weights.length}`);
      }
      const logits = this.bias.slice();
      for (let i = 0; i < row.length; i++) {
        const w = this.weights[i];
        for (let c = 0; c < this.numClasses; c++) {
          logits[c] += row[i] * w[c];
        }
      }
      return softmax(logits);
    });
  }
}
