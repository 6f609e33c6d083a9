/** One emitted record: softmax probabilities plus the true label. */
export interface PredictionRow {
  label: number;
  probs: number[];
}

/** Summary of an emitted interchange file. */
export interface ExportManifest {
  producer: string;
  numClasses: number;
  /** Emitted lines minus the header line. */
  recordCount: number;
  /** sha256 hex digest of the emitted file bytes. */
  checksum: string;
}

/**
 * The only thing the exporter needs from a trained model. Adapters for
 * real frameworks (an ONNX session, a tfjs GraphModel, a remote API)
 * implement this and hand it to exportPredictions.
 */
export interface ModelHandle {
  readonly numClasses: number;
  /** Batch of feature vectors in, one probability vector per row out. */
  predict(features: number[][]): number[][];
}

export interface LabeledDataset {
  features: number[][];
  labels: number[];
}
