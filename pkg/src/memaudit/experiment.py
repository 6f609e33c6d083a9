"""Desk-scale experiment grids: methods x calibration quality x query sets.

Builds one synthetic world (training pool, calibration set, held-out and
distribution-shifted query pools), trains the target model, then sweeps
the calibration-quality parameter k and every query family, producing a
table-shaped CSV per method/variant plus one long-format CSV with every
cell. Ground truth membership is known to the harness, so each cell also
carries a false-positive/false-negative flag:

- FP: a query set that is in the training data is read as removed;
- FN: a query set that is not in the training data is read as memorized.

Cells that fail (for instance the degenerate zero-denominator case of
the KS-ratio baseline) are recorded as errors and the run continues.
"""

from __future__ import annotations

import csv
import math
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .aggregation import TestKind, Verdict, ema_score
from .baseline import DegenerateCalibrationError, DistributionSource, ProjectionMode, project_outputs, rho_ks
from .core import MetricKind, PredictionSet, compute_metric
from .data import (
    CorruptionMode,
    CorruptionSpec,
    LabeledDataset,
    corrupt_calibration,
    sample_rows,
    shift_class_means,
    split_folds,
    synth_generate,
)
from .mlp import MlpConfig, make_trainer, predict_dataset, train_mlp
from .thresholds import infer_thresholds

QUERY_FAMILIES = ("folds", "heldout", "shifted")


@dataclass(frozen=True)
class ExperimentConfig:
    output_dir: Path
    seed: int = 7
    k_values: tuple[int, ...] = (100, 90, 80, 70, 60, 50)
    query_specs: tuple[str, ...] = QUERY_FAMILIES
    test_kinds: tuple[TestKind, ...] = (TestKind.T_TEST,)
    alpha: float = 0.1
    query_sizes: tuple[int, ...] = ()
    methods: tuple[str, ...] = ("ema", "baseline")
    projection_modes: tuple[ProjectionMode, ...] = (
        ProjectionMode.ALL_PROBS,
        ProjectionMode.MAX_PROB,
        ProjectionMode.TRUE_CLASS,
    )
    classes: int = 10
    dim: int = 20
    separation: float = 3.0
    train_size: int = 2000
    cal_size: int = 1000
    folds: int = 5
    corruption_mode: CorruptionMode = CorruptionMode.NOISE_AND_ROTATE
    noise_sigma: float = 0.5
    split_fraction: float = 0.5
    hidden_sizes: tuple[int, ...] = (256, 256)
    learning_rate: float = 0.05
    epochs: int = 150
    lr_decay: float = 1e-4
    batch_size: int = 64
    shift_magnitude: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        if not self.k_values:
            raise ValueError("k_values must be non-empty")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.train_size % self.folds != 0:
            raise ValueError("train_size must divide evenly into folds")
        unknown = set(self.query_specs) - set(QUERY_FAMILIES)
        if unknown:
            raise ValueError(f"unknown query families: {sorted(unknown)}")
        unknown_methods = set(self.methods) - {"ema", "baseline"}
        if unknown_methods:
            raise ValueError(f"unknown methods: {sorted(unknown_methods)}")
        if any(s < 1 or s > self.train_size for s in self.query_sizes):
            raise ValueError("every query size must lie in [1, train_size]")

    @property
    def fold_size(self) -> int:
        return self.train_size // self.folds

    def mlp_template(self, seed: int) -> MlpConfig:
        return MlpConfig(
            input_dim=self.dim,
            num_classes=self.classes,
            hidden_sizes=self.hidden_sizes,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            lr_decay=self.lr_decay,
            batch_size=self.batch_size,
            seed=seed,
        )


@dataclass(frozen=True)
class CellResult:
    """One grid cell: a (method, variant, k, query) evaluation."""

    method: str          # "ema" | "baseline"
    variant: str         # test kind for ema, projection mode for baseline
    group: str           # "base" or "q<size>" for the query-size ablation
    k: int
    query: str
    query_size: int
    expected_member: bool
    value: float | None
    verdict: str | None          # memorized | removed for successful cells
    member_fraction: float | None
    flag: str                    # "", "FP", "FN"
    error: str | None


def _flag(expected_member: bool, verdict: str | None) -> str:
    if verdict is None:
        return ""
    if expected_member and verdict == Verdict.REMOVED.value:
        return "FP"
    if not expected_member and verdict == Verdict.MEMORIZED.value:
        return "FN"
    return ""


def _subsample_seed(base_seed: int, tag: str) -> int:
    return base_seed + zlib.crc32(tag.encode("utf-8"))


@dataclass
class ExperimentWorld:
    """All data and models the grid shares: built once per run."""

    config: ExperimentConfig
    train: LabeledDataset
    calibration: LabeledDataset
    heldout_pool: LabeledDataset
    shifted_pool: LabeledDataset
    fold_list: list[LabeledDataset]
    target: object
    query_models: dict = field(default_factory=dict)

    @classmethod
    def build(cls, config: ExperimentConfig) -> "ExperimentWorld":
        max_nonmember = max([config.fold_size, *config.query_sizes])
        pool_needed = config.train_size + config.cal_size + max_nonmember
        per_class = math.ceil(pool_needed / config.classes)
        pool = synth_generate(config.classes, per_class, config.dim, config.separation, seed=config.seed)
        perm = np.random.default_rng(config.seed + 1).permutation(len(pool))
        train = pool.take(perm[:config.train_size])
        calibration = pool.take(perm[config.train_size:config.train_size + config.cal_size])
        heldout_pool = pool.take(
            perm[config.train_size + config.cal_size:config.train_size + config.cal_size + max_nonmember]
        )
        shifted_raw = synth_generate(
            config.classes, math.ceil(max_nonmember / config.classes), config.dim, config.separation,
            seed=config.seed + 3,
        )
        magnitude = config.shift_magnitude if config.shift_magnitude is not None else 0.5 * config.separation
        shifted_pool = shift_class_means(shifted_raw, magnitude, seed=config.seed + 4)
        fold_list = split_folds(train, config.folds, seed=config.seed + 2)
        target = train_mlp(config.mlp_template(seed=config.seed + 5), train)
        return cls(config, train, calibration, heldout_pool, shifted_pool, fold_list, target)

    def base_queries(self) -> list[tuple[str, LabeledDataset, bool]]:
        config = self.config
        queries: list[tuple[str, LabeledDataset, bool]] = []
        if "folds" in config.query_specs:
            for i, fold in enumerate(self.fold_list, start=1):
                queries.append((f"F{i}", fold, True))
        if "heldout" in config.query_specs:
            queries.append(("H", sample_rows(self.heldout_pool, config.fold_size, _subsample_seed(config.seed, "H:base")), False))
        if "shifted" in config.query_specs:
            queries.append(("S", sample_rows(self.shifted_pool, config.fold_size, _subsample_seed(config.seed, "S:base")), False))
        return queries

    def sized_queries(self, size: int) -> list[tuple[str, LabeledDataset, bool]]:
        """Query-size ablation: member columns are fresh draws from the training set."""
        config = self.config
        queries: list[tuple[str, LabeledDataset, bool]] = []
        if "folds" in config.query_specs:
            for i in range(1, config.folds + 1):
                seed = _subsample_seed(config.seed, f"F{i}:{size}")
                queries.append((f"F{i}", sample_rows(self.train, size, seed), True))
        if "heldout" in config.query_specs:
            queries.append(("H", sample_rows(self.heldout_pool, size, _subsample_seed(config.seed, f"H:{size}")), False))
        if "shifted" in config.query_specs:
            queries.append(("S", sample_rows(self.shifted_pool, size, _subsample_seed(config.seed, f"S:{size}")), False))
        return queries

    def query_model(self, name: str, query: LabeledDataset, index: int):
        if name not in self.query_models:
            self.query_models[name] = train_mlp(
                self.config.mlp_template(seed=self.config.seed + 400 + index), query
            )
        return self.query_models[name]


def run_experiment(config: ExperimentConfig) -> list[CellResult]:
    """Execute the full grid and return every cell in deterministic order."""
    world = ExperimentWorld.build(config)
    cells: list[CellResult] = []
    base_queries = world.base_queries()
    trainer = make_trainer(config.mlp_template(seed=config.seed + 6))

    target_preds = {name: predict_dataset(world.target, q) for name, q, _ in base_queries}

    for j, k in enumerate(config.k_values):
        cal_k = corrupt_calibration(
            world.calibration,
            CorruptionSpec(k=k, noise_sigma=config.noise_sigma, seed=config.seed + 100 + j, mode=config.corruption_mode),
        )

        if "ema" in config.methods:
            thresholds = infer_thresholds(trainer, cal_k, config.split_fraction, seed=config.seed + 200 + j)
            for kind in config.test_kinds:
                for name, query, member in base_queries:
                    report = ema_score(target_preds[name], thresholds, kind, config.alpha)
                    cells.append(CellResult(
                        method="ema", variant=kind.value, group="base", k=k, query=name,
                        query_size=len(query), expected_member=member, value=report.rho_ema,
                        verdict=report.verdict.value, member_fraction=report.member_fraction,
                        flag=_flag(member, report.verdict.value), error=None,
                    ))
                for size in config.query_sizes:
                    for name, query, member in world.sized_queries(size):
                        report = ema_score(predict_dataset(world.target, query), thresholds, kind, config.alpha)
                        cells.append(CellResult(
                            method="ema", variant=kind.value, group=f"q{size}", k=k, query=name,
                            query_size=size, expected_member=member, value=report.rho_ema,
                            verdict=report.verdict.value, member_fraction=report.member_fraction,
                            flag=_flag(member, report.verdict.value), error=None,
                        ))

        if "baseline" in config.methods:
            cal_model = train_mlp(config.mlp_template(seed=config.seed + 300 + j), cal_k)
            for index, (name, query, member) in enumerate(base_queries):
                query_model = world.query_model(name, query, index)
                preds = {
                    DistributionSource.TARGET_ON_QUERY: target_preds[name],
                    DistributionSource.CALIBRATION_ON_QUERY: predict_dataset(cal_model, query),
                    DistributionSource.QUERY_ON_QUERY: predict_dataset(query_model, query),
                }
                for mode in config.projection_modes:
                    projected = {src: project_outputs(p, mode, src) for src, p in preds.items()}
                    try:
                        ratio = rho_ks(
                            projected[DistributionSource.TARGET_ON_QUERY],
                            projected[DistributionSource.CALIBRATION_ON_QUERY],
                            projected[DistributionSource.QUERY_ON_QUERY],
                        )
                    except DegenerateCalibrationError as exc:
                        cells.append(CellResult(
                            method="baseline", variant=mode.value, group="base", k=k, query=name,
                            query_size=len(query), expected_member=member, value=None,
                            verdict=None, member_fraction=None, flag="", error=str(exc),
                        ))
                        continue
                    verdict = Verdict.REMOVED.value if ratio >= 1.0 else Verdict.MEMORIZED.value
                    cells.append(CellResult(
                        method="baseline", variant=mode.value, group="base", k=k, query=name,
                        query_size=len(query), expected_member=member, value=ratio,
                        verdict=verdict, member_fraction=None, flag=_flag(member, verdict), error=None,
                    ))
    return cells


# ---------------------------------------------------------------------------
# CSV emission

def write_experiment_csvs(cells: list[CellResult], out_dir) -> list[Path]:
    """One long-format CSV plus a table-shaped CSV (values and flags) per grid."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    long_path = out_dir / "results_long.csv"
    with open(long_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["method", "variant", "group", "k", "query", "query_size",
                         "expected_member", "value", "member_fraction", "verdict", "flag", "error"])
        for c in cells:
            writer.writerow([
                c.method, c.variant, c.group, c.k, c.query, c.query_size,
                int(c.expected_member),
                "" if c.value is None else repr(c.value),
                "" if c.member_fraction is None else repr(c.member_fraction),
                c.verdict or "", c.flag, c.error or "",
            ])
    written.append(long_path)

    grids: dict[tuple[str, str, str], list[CellResult]] = {}
    for c in cells:
        grids.setdefault((c.method, c.variant, c.group), []).append(c)

    for (method, variant, group), grid_cells in grids.items():
        suffix = "" if group == "base" else f"_{group}"
        stem = f"{method}_{variant}{suffix}"
        queries = list(dict.fromkeys(c.query for c in grid_cells))
        ks = list(dict.fromkeys(c.k for c in grid_cells))
        by_key = {(c.k, c.query): c for c in grid_cells}
        for kind, path in (("values", out_dir / f"{stem}.csv"), ("flags", out_dir / f"{stem}_flags.csv")):
            with open(path, "w", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(["k", *queries])
                for k in ks:
                    row: list[str] = [str(k)]
                    for q in queries:
                        cell = by_key[(k, q)]
                        if kind == "values":
                            row.append("ERROR" if cell.value is None else f"{cell.value:.2f}")
                        else:
                            row.append("ERROR" if cell.error else cell.flag)
                    writer.writerow(row)
            written.append(path)
    return written


def write_metric_histograms(preds: PredictionSet, path, bins: int = 20) -> Path:
    """Binned per-metric score distributions of a query set, as CSV."""
    path = Path(path)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["metric", "bin_lo", "bin_hi", "count"])
        for kind in MetricKind:
            scores = compute_metric(kind, preds)
            lo, hi = float(scores.min()), float(scores.max())
            if lo == hi:
                writer.writerow([kind.value, repr(lo), repr(hi), scores.size])
                continue
            counts, edges = np.histogram(scores, bins=bins, range=(lo, hi))
            for i, count in enumerate(counts):
                writer.writerow([kind.value, repr(float(edges[i])), repr(float(edges[i + 1])), int(count)])
    return path
