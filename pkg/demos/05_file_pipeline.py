"""The file-based pipeline: datasets, checkpoints, prediction records.

Every boundary object round-trips through a file, so audits can run
against models trained elsewhere: anything that can emit the prediction
JSON-lines format can be audited. The same flow is available as CLI
subcommands (train / predict / audit / baseline / experiment).
"""

import json
import tempfile
from pathlib import Path

from memaudit import (
    MlpConfig,
    load_checkpoint,
    load_dataset,
    load_predictions,
    predict_dataset,
    save_checkpoint,
    save_dataset_csv,
    save_predictions,
    synth_generate,
    train_mlp,
)

workdir = Path(tempfile.mkdtemp(prefix="memaudit_demo_"))
print(f"working in {workdir}\n")

# --- dataset CSV: header 'label,f0,f1,...', exact float round-trip -----------
data = synth_generate(classes=3, per_class=50, dim=4, separation=4.0, seed=0)
csv_path = workdir / "data.csv"
save_dataset_csv(data, csv_path)
reloaded = load_dataset(csv_path)
print(f"dataset csv: {len(reloaded)} rows, {reloaded.dim} features, "
      f"exact round-trip: {(reloaded.features == data.features).all()}")
print("first line:", csv_path.read_text().splitlines()[0])

# --- model checkpoint: bit-exact, deterministic bytes -------------------------
model = train_mlp(MlpConfig(input_dim=4, num_classes=3, hidden_sizes=(16,), epochs=10, seed=1), data)
ckpt_path = workdir / "model.ckpt"
save_checkpoint(model, ckpt_path)
restored = load_checkpoint(ckpt_path)
same = all((a == b).all() for a, b in zip(model.weights, restored.weights))
print(f"\ncheckpoint: {ckpt_path.stat().st_size} bytes, bit-exact weights after reload: {same}")

# --- prediction records: the black-box audit boundary --------------------------
preds_path = workdir / "preds.jsonl"
save_predictions(predict_dataset(model, data), preds_path, producer="demo-mlp")
lines = preds_path.read_text().splitlines()
print(f"\nprediction file: {len(lines)} lines (header + one record per sample)")
print("header: ", lines[0])
print("record: ", json.dumps(json.loads(lines[1]))[:76], "...")
reloaded_preds = load_predictions(preds_path)
print(f"reload gives {len(reloaded_preds)} records over {reloaded_preds.num_classes} classes")

print(f"""
equivalent CLI flow:
  memaudit train   --data {csv_path.name} --out model.ckpt --seed 1
  memaudit predict --model model.ckpt --data query.csv --out preds.jsonl
  memaudit audit   --target-preds preds.jsonl --calibration cal.csv --out-dir audit/
""")
