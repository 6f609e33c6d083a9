"""memaudit: black-box auditing of dataset memorization and removal.

Given only a model's probability outputs on a query set plus a
calibration set from the same domain, the toolkit decides whether the
query data is memorized by the model or has been removed, by thresholding
per-sample membership metrics and aggregating the bits with a two-sample
test. The previous-generation KS-distance-ratio check is included as a
baseline, and a deterministic MLP trainer plus synthetic data generators
make the whole pipeline reproducible at desk scale.
"""

from .aggregation import (
    DEFAULT_ALPHA,
    AuditReport,
    TestKind,
    Verdict,
    as_membership_vector,
    ema_score,
    infer_membership,
    ks_statistic_vs_ones,
    ks_test_vs_ones,
    t_test_vs_ones,
)
from .baseline import (
    DegenerateCalibrationError,
    DistributionSource,
    OutputDistribution,
    ProjectionMode,
    ks_distance,
    project_outputs,
    rho_ks,
)
from .core import (
    MetricKind,
    PredictionRecord,
    PredictionSet,
    compute_metric,
    metric_confidence,
    metric_correctness,
    metric_negative_entropy,
    validate_probability_vector,
)
from .data import (
    CorruptionMode,
    CorruptionSpec,
    DataFormatError,
    LabeledDataset,
    corrupt_calibration,
    load_dataset,
    load_predictions,
    sample_rows,
    save_dataset_csv,
    save_predictions,
    shift_class_means,
    split_folds,
    synth_generate,
)
from .experiment import CellResult, ExperimentConfig, run_experiment, write_experiment_csvs
from .mlp import (
    DimensionMismatchError,
    MlpConfig,
    TrainedModel,
    TrainingDivergedError,
    load_checkpoint,
    make_trainer,
    predict_dataset,
    predict_proba,
    save_checkpoint,
    train_mlp,
)
from .thresholds import (
    CalibrationSplit,
    ThresholdSet,
    balanced_accuracy,
    best_threshold,
    infer_thresholds,
    split_calibration,
)

__version__ = "0.1.0"
