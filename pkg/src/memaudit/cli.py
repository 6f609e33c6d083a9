"""Command-line surface: train, predict, audit, baseline, experiment.

Every path is deterministic under --seed: rerunning a command with the
same flags reproduces output files byte for byte. The audit subcommand
consumes the target model only through a prediction file, never through
its weights, so audits stay black-box.

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 model mismatch,
5 degenerate statistic.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .aggregation import TestKind, ema_score
from .baseline import DegenerateCalibrationError, DistributionSource, ProjectionMode, project_outputs, rho_ks
from .core import MetricKind
from .data import (
    CorruptionMode,
    DataFormatError,
    load_dataset,
    load_predictions,
    save_predictions,
)
from .experiment import ExperimentConfig, run_experiment, write_experiment_csvs, write_metric_histograms
from .mlp import (
    DimensionMismatchError,
    MlpConfig,
    TrainingDivergedError,
    load_checkpoint,
    make_trainer,
    predict_dataset,
    save_checkpoint,
    train_accuracy,
    train_mlp,
)
from .thresholds import infer_thresholds

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_MODEL = 4
EXIT_DEGENERATE = 5

PRODUCER = "memaudit-mlp"


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common_flags(parser: argparse.ArgumentParser, out_dir_required: bool = False) -> None:
    parser.add_argument("--seed", type=int, default=0, help="master seed; identical seeds reproduce outputs exactly")
    parser.add_argument("--format", choices=("json", "text"), default="text", help="stdout rendering")
    parser.add_argument("--out-dir", type=Path, required=out_dir_required, help="directory for emitted files")


def _trainer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--hidden", type=_int_list, default=(256, 256), help="hidden layer sizes, e.g. 256,256")
    parser.add_argument("--lr", type=float, default=0.05)
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--lr-decay", type=float, default=1e-4)
    parser.add_argument("--batch-size", type=int, default=64)


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _mlp_config(args, input_dim: int, num_classes: int) -> MlpConfig:
    return MlpConfig(
        input_dim=input_dim,
        num_classes=num_classes,
        hidden_sizes=args.hidden,
        learning_rate=args.lr,
        epochs=args.epochs,
        lr_decay=args.lr_decay,
        batch_size=args.batch_size,
        seed=args.seed,
    )


# ---------------------------------------------------------------------------
# Subcommands

def cmd_train(args) -> int:
    data = load_dataset(args.data, num_classes=args.classes)
    model = train_mlp(_mlp_config(args, data.dim, data.num_classes), data)
    save_checkpoint(model, args.out)
    accuracy = train_accuracy(model, data)
    _emit(args, {"checkpoint": str(args.out), "train_accuracy": accuracy,
                 "final_loss": model.train_loss_history[-1]},
          [f"checkpoint written to {args.out}",
           f"final train accuracy: {accuracy:.4f}"])
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_checkpoint(args.model)
    data = load_dataset(args.data, num_classes=model.config.num_classes)
    preds = predict_dataset(model, data)
    save_predictions(preds, args.out, producer=PRODUCER)
    _emit(args, {"predictions": str(args.out), "records": len(preds), "num_classes": preds.num_classes},
          [f"wrote {len(preds)} prediction records to {args.out}"])
    return EXIT_OK


def cmd_audit(args) -> int:
    query_preds = load_predictions(args.target_preds)
    calibration = load_dataset(args.calibration, num_classes=query_preds.num_classes)
    trainer = make_trainer(_mlp_config(args, calibration.dim, calibration.num_classes))
    thresholds = infer_thresholds(trainer, calibration, args.split_fraction, seed=args.seed)
    report = ema_score(query_preds, thresholds, TestKind(args.test), args.alpha)

    payload = report.to_dict()
    payload["thresholds"] = {kind.value: thresholds.thresholds[kind] for kind in MetricKind}
    payload["threshold_balanced_accuracies"] = {
        kind.value: thresholds.balanced_accuracies[kind] for kind in MetricKind
    }

    args.out_dir.mkdir(parents=True, exist_ok=True)
    report_path = args.out_dir / "report.json"
    report_path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    hist_path = write_metric_histograms(query_preds, args.out_dir / "metric_histograms.csv")

    tau = payload["thresholds"]
    _emit(args, payload, [
        f"audit score (p-value): {report.rho_ema:.4f}  [{report.test_kind.value}-test, alpha={report.alpha}]",
        f"verdict: {report.verdict.value}",
        f"member fraction: {report.member_fraction:.4f} of {report.query_size} query samples",
        "thresholds: " + ", ".join(f"{name}={value:.6g}" for name, value in tau.items()),
        f"report: {report_path}",
        f"metric histograms: {hist_path}",
    ])
    return EXIT_OK


def cmd_baseline(args) -> int:
    target_preds = load_predictions(args.target_preds)
    query = load_dataset(args.query, num_classes=target_preds.num_classes)
    if len(query) != len(target_preds):
        raise DataFormatError(
            f"target predictions cover {len(target_preds)} records but query set has {len(query)}"
        )
    calibration = load_dataset(args.calibration, num_classes=target_preds.num_classes)

    cal_model = train_mlp(_mlp_config(args, calibration.dim, calibration.num_classes), calibration)
    query_model = train_mlp(_mlp_config(args, query.dim, query.num_classes), query)
    cal_preds = predict_dataset(cal_model, query)
    query_preds = predict_dataset(query_model, query)

    results = {}
    for mode in ProjectionMode:
        ratio = rho_ks(
            project_outputs(target_preds, mode, DistributionSource.TARGET_ON_QUERY),
            project_outputs(cal_preds, mode, DistributionSource.CALIBRATION_ON_QUERY),
            project_outputs(query_preds, mode, DistributionSource.QUERY_ON_QUERY),
        )
        results[mode.value] = {"rho_ks": ratio, "reading": "removed" if ratio >= 1.0 else "memorized"}

    if args.out_dir is not None:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        (args.out_dir / "baseline.json").write_text(json.dumps(results, sort_keys=True, indent=2) + "\n")
    _emit(args, results, [
        f"{mode}: rho_ks={entry['rho_ks']:.4f} -> {entry['reading']}"
        for mode, entry in results.items()
    ])
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = ExperimentConfig(
        output_dir=args.out_dir,
        seed=args.seed,
        k_values=args.k,
        test_kinds=tuple(TestKind(t) for t in dict.fromkeys(args.tests.split(","))),
        alpha=args.alpha,
        query_sizes=args.query_sizes,
        methods=tuple(dict.fromkeys(args.methods.split(","))),
        classes=args.classes,
        dim=args.dim,
        separation=args.separation,
        train_size=args.train_size,
        cal_size=args.cal_size,
        folds=args.folds,
        corruption_mode=CorruptionMode(args.corruption),
        noise_sigma=args.noise_sigma,
        split_fraction=args.split_fraction,
        hidden_sizes=args.hidden,
        learning_rate=args.lr,
        epochs=args.epochs,
        lr_decay=args.lr_decay,
        batch_size=args.batch_size,
    )
    cells = run_experiment(config)
    written = write_experiment_csvs(cells, config.output_dir)
    flags = {"FP": sum(c.flag == "FP" for c in cells), "FN": sum(c.flag == "FN" for c in cells),
             "errors": sum(c.error is not None for c in cells)}
    _emit(args, {"cells": len(cells), "files": [str(p) for p in written], **flags},
          [f"{len(cells)} cells evaluated ({flags['FP']} FP, {flags['FN']} FN, {flags['errors']} error cells)",
           *[f"wrote {p}" for p in written]])
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memaudit",
                                     description="Black-box auditing of dataset memorization and removal.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train an MLP and write a checkpoint")
    p_train.add_argument("--data", type=Path, required=True)
    p_train.add_argument("--classes", type=int, default=None, help="class count; inferred from labels when omitted")
    p_train.add_argument("--out", type=Path, required=True)
    _trainer_flags(p_train)
    _common_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_predict = sub.add_parser("predict", help="run a checkpoint over a dataset, write prediction records")
    p_predict.add_argument("--model", type=Path, required=True)
    p_predict.add_argument("--data", type=Path, required=True)
    p_predict.add_argument("--out", type=Path, required=True)
    _common_flags(p_predict)
    p_predict.set_defaults(func=cmd_predict)

    p_audit = sub.add_parser("audit", help="audit a query prediction file against a calibration set")
    p_audit.add_argument("--target-preds", type=Path, required=True)
    p_audit.add_argument("--calibration", type=Path, required=True)
    p_audit.add_argument("--test", choices=[t.value for t in TestKind], default=TestKind.T_TEST.value)
    p_audit.add_argument("--alpha", type=float, default=0.1)
    p_audit.add_argument("--split-fraction", type=float, default=0.5)
    _trainer_flags(p_audit)
    _common_flags(p_audit, out_dir_required=True)
    p_audit.set_defaults(func=cmd_audit)

    p_baseline = sub.add_parser("baseline", help="KS-ratio baseline over every projection mode")
    p_baseline.add_argument("--target-preds", type=Path, required=True)
    p_baseline.add_argument("--calibration", type=Path, required=True)
    p_baseline.add_argument("--query", type=Path, required=True)
    _trainer_flags(p_baseline)
    _common_flags(p_baseline)
    p_baseline.set_defaults(func=cmd_baseline)

    p_exp = sub.add_parser("experiment", help="run the methods x k x query-set grid, emit table CSVs")
    p_exp.add_argument("--k", type=_int_list, default=(100, 90, 80, 70, 60, 50))
    p_exp.add_argument("--tests", default="t", help="comma list from {t,ks}")
    p_exp.add_argument("--methods", default="ema,baseline", help="comma list from {ema,baseline}")
    p_exp.add_argument("--alpha", type=float, default=0.1)
    p_exp.add_argument("--query-sizes", type=_int_list, default=())
    p_exp.add_argument("--classes", type=int, default=10)
    p_exp.add_argument("--dim", type=int, default=20)
    p_exp.add_argument("--separation", type=float, default=3.0)
    p_exp.add_argument("--train-size", type=int, default=2000)
    p_exp.add_argument("--cal-size", type=int, default=1000)
    p_exp.add_argument("--folds", type=int, default=5)
    p_exp.add_argument("--corruption", choices=[m.value for m in CorruptionMode],
                       default=CorruptionMode.NOISE_AND_ROTATE.value)
    p_exp.add_argument("--noise-sigma", type=float, default=0.5)
    p_exp.add_argument("--split-fraction", type=float, default=0.5)
    _trainer_flags(p_exp)
    p_exp.set_defaults(epochs=150)
    _common_flags(p_exp, out_dir_required=True)
    p_exp.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateCalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DataFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DimensionMismatchError, TrainingDivergedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
