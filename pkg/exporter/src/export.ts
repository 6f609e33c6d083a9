import { loadDatasetCsv } from "./dataset.js";
import type { ExportManifest, ModelHandle, PredictionRow } from "./types.js";
import { writeInterchange } from "./writer.js";

export const DEFAULT_PRODUCER = "memaudit-exporter-stub";

/**
 * Run a model over a labeled dataset file and write the prediction
 * interchange file. The exporter computes nothing audit-related: it only
 * carries black-box outputs across the process boundary.
 */
export function exportPredictions(
  model: ModelHandle,
  datasetPath: string,
  outPath: string,
  producer: string = DEFAULT_PRODUCER,
): ExportManifest {
  const data = loadDatasetCsv(datasetPath);
  data.labels.forEach((label, i) => {
    if (label >= model.numClasses) {
      // dataset line number: header is line 1, row i sits on line i + 2
      throw new Error(
        `${datasetPath}: line ${i + 2}: label ${label} out of range for ${model.numClasses} classes`,
      );
    }
  });
  const probs = model.predict(data.features);
  const rows: PredictionRow[] = probs.map((p, i) => ({ label: data.labels[i], probs: p }));
  return writeInterchange(outPath, rows, model.numClasses, producer);
}
