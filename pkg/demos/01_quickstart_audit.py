"""Quickstart: decide whether a model memorized a query set.

Builds a small synthetic classification world, trains a target model on
part of it, then audits three query sets against a calibration set:
one the target was trained on, one held out from the same distribution,
and one from a shifted distribution.
"""

import numpy as np

from memaudit import (
    CorruptionSpec,
    MlpConfig,
    TestKind,
    corrupt_calibration,
    ema_score,
    infer_thresholds,
    make_trainer,
    predict_dataset,
    sample_rows,
    shift_class_means,
    split_folds,
    synth_generate,
    train_mlp,
)

# --- a synthetic world: 10 Gaussian classes in 20 dimensions ---------------
pool = synth_generate(classes=10, per_class=400, dim=20, separation=3.0, seed=7)
perm = np.random.default_rng(1).permutation(len(pool))
train = pool.take(perm[:1000])
calibration = pool.take(perm[1000:1500])
heldout = pool.take(perm[1500:2000])
folds = split_folds(train, 5, seed=2)

# --- the model under audit --------------------------------------------------
config = MlpConfig(input_dim=20, num_classes=10, epochs=150, seed=3)
target = train_mlp(config, train)
print(f"target model trained, final loss {target.train_loss_history[-1]:.4f}")

# --- thresholds come from the calibration set only ---------------------------
# corrupt it a little (k=80: keep 80%, degrade the rest) to show the audit
# does not need pristine calibration data
calibration = corrupt_calibration(calibration, CorruptionSpec(k=80, seed=4))
thresholds = infer_thresholds(make_trainer(config), calibration, fraction=0.5, seed=5)
print("learned thresholds:")
for kind, tau in thresholds.thresholds.items():
    print(f"  {kind.value:18s} tau={tau:+.4f}  (balanced accuracy "
          f"{thresholds.balanced_accuracies[kind]:.3f})")

# --- audit three query sets ---------------------------------------------------
shifted = shift_class_means(
    synth_generate(classes=10, per_class=20, dim=20, separation=3.0, seed=8), 1.5, seed=9)
queries = {
    "training fold (member)": folds[0],
    "held-out same distribution": sample_rows(heldout, 200, seed=10),
    "shifted distribution": shifted,
}
print("\naudit results (score is a p-value; <= alpha means removed):")
for name, query in queries.items():
    report = ema_score(predict_dataset(target, query), thresholds, TestKind.T_TEST, alpha=0.1)
    print(f"  {name:28s} score={report.rho_ema:6.3f}  member_fraction={report.member_fraction:.3f}"
          f"  -> {report.verdict.value}")
