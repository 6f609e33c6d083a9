import { loadDatasetCsv } from "./dataset.js";
import { exportPredictions } from "./export.js";
import { StubSoftmaxModel } from "./model.js";

/**
 * Demo CLI: exports predictions of the seeded stub model.
 *
 *   node dist/cli.js --data d.csv --out preds.jsonl [--classes 3] [--seed 0]
 *
 * Real models are exported programmatically: implement ModelHandle and
 * call exportPredictions.
 */
function parseArgs(argv: string[]): Map<string, string> {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed arguments near '${argv[i]}'`);
    }
    args.set(argv[i].slice(2), argv[i + 1]);
  }
  return args;
}

function main(): number {
  let args: Map<string, string>;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  const data = args.get("data");
  const out = args.get("out");
  if (!data || !out) {
    console.error("usage: cli --data <dataset.csv> --out <preds.jsonl> [--classes N] [--seed N]");
    return 2;
  }
  try {
    const dataset = loadDatasetCsv(data);
    const classes = args.has("classes")
      ? Number(args.get("classes"))
      : Math.max(...dataset.labels) + 1;
    const seed = Number(args.get("seed") ?? "0");
    const model = new StubSoftmaxModel(dataset.features[0].length, classes, seed);
    const manifest = exportPredictions(model, data, out);
    console.log(JSON.stringify(manifest));
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

process.exit(main());
