"""Command-line harness: build, retrain, predict, eval, stream, entropy, cost.

Every command is deterministic given its flags: a fixed ``--seed``
reproduces output files byte for byte. Results are emitted as small CSVs
(``--out`` file or stdout) whose first column is a name and whose
remaining columns are numeric, so they round-trip through the library's
own CSV loader. Exit codes: 0 success, 1 data/model error, 2 usage error.

Flag precedence is flags > config file > built-in defaults; ``--config``
names a flat ``key=value`` file using flag names without the leading
dashes (e.g. ``test-ratio=0.2``).
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace

import numpy as np

from .baseline import build_cart, cart_ensemble
from .clustering import NoiseConfig
from .costmodel import eval_cost, retrain_cost_breakdown
from .data import (
    Dataset,
    align_classes,
    apply_norm,
    bootstrap_sample,
    concat_datasets,
    fold_indices,
    load_csv,
    normalize,
)
from .errors import ClusterForestError, ConfigError, EmptyInputError
from .forest import (
    Forest,
    ForestConfig,
    build_forest,
    build_tree,
    retrain_forest,
)
from .inference import (
    class_scores,
    evaluate,
    predict,
    tune_threshold,
    weighted_entropy_by_depth,
)
from .model_io import load_model, save_model
from .rng import Rng, derive_seed
from .synthetic import drifting_stream
from .weights import (
    eta_stats,
    eta_weights,
    pearson_stats,
    pearson_weights,
    state_max_rel_error,
    uniform_weights,
)

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt_value(v) -> str:
    if isinstance(v, float):
        return repr(float(v))  # shortest exact round-trip
    return str(v)


def _write_rows(out_path, header, rows):
    rows = [[_fmt_value(v) for v in row] for row in rows]
    if out_path is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)


def write_dataset_csv(ds: Dataset, path, label_column: str = "label") -> None:
    """Write a dataset in the loader's own format (header + label column)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(ds.feature_names) + [label_column])
        for i in range(ds.n):
            row = [_fmt_value(float(v)) for v in ds.X[i]]
            if ds.is_classification:
                row.append(ds.classes[int(ds.y[i])])
            else:
                row.append(_fmt_value(float(ds.y[i])))
            writer.writerow(row)


def _summary_rows(per_fold: dict[str, list[float]]):
    """Median and std rows (fold -1 / -2) after the per-fold rows."""
    rows = []
    for metric in sorted(per_fold):
        values = per_fold[metric]
        for f, v in enumerate(values):
            rows.append([metric, f, v])
    for metric in sorted(per_fold):
        values = np.asarray(per_fold[metric], dtype=np.float64)
        rows.append([f"{metric}_median", -1, float(np.median(values))])
        rows.append([f"{metric}_std", -1, float(values.std())])
    return rows


# ---------------------------------------------------------------------------
# flag plumbing
# ---------------------------------------------------------------------------


def _add_data_flags(p, required=True):
    p.add_argument("--data", required=required, help="CSV file (header row, comma separated)")
    p.add_argument("--task", choices=["classification", "regression"], default="classification")
    p.add_argument("--label-column", default="label")
    p.add_argument(
        "--categorical",
        default="",
        help="comma-separated feature columns to one-hot encode",
    )


def _add_forest_flags(p):
    p.add_argument("--weights", choices=["pearson", "eta"], default="eta")
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--draw-size", type=int, default=None)
    p.add_argument("--min-leaf", type=int, default=1)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--noise-eps1", type=float, default=0.0)
    p.add_argument("--noise-delta", type=float, default=0.0)
    p.add_argument("--noise-tie", type=float, default=0.0)
    p.add_argument("--noise-eps4", type=float, default=0.0)
    p.add_argument("--noise-seed", type=int, default=0)


def _noise_from_args(args) -> NoiseConfig:
    return NoiseConfig(
        eps1=args.noise_eps1,
        delta_fail=args.noise_delta,
        delta_tie=args.noise_tie,
        eps4=args.noise_eps4,
        seed=args.noise_seed,
    )


def _config_from_args(args) -> ForestConfig:
    return ForestConfig(
        n_trees=args.trees,
        k=args.k,
        max_depth=args.depth,
        weight_method=args.weights,
        draw_size=args.draw_size,
        noise=_noise_from_args(args),
        seed=args.seed,
        min_leaf=args.min_leaf,
        max_iter=args.max_iter,
        tol=args.tol,
    )


def _load_dataset(args) -> Dataset:
    categorical = tuple(c for c in args.categorical.split(",") if c)
    ds = load_csv(args.data, args.label_column, args.task, categorical)
    if categorical:
        from .data import one_hot_encode

        ds = one_hot_encode(ds, categorical)
    return ds


def _parse_threshold(text):
    if text == "auto":
        return "auto"
    try:
        t = float(text)
    except ValueError:
        raise ConfigError(f"--threshold must be a number in [0,1] or 'auto', got {text!r}")
    if not 0.0 <= t <= 1.0:
        raise ConfigError("--threshold must lie in [0, 1]")
    return t


def _fold_model_path(model_out: str, fold: int, n_folds: int) -> str:
    if n_folds == 1:
        return model_out
    stem, dot, suffix = model_out.rpartition(".")
    if not dot:
        return f"{model_out}.fold{fold}"
    return f"{stem}.fold{fold}.{suffix}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_build(args) -> int:
    ds = _load_dataset(args)
    config = _config_from_args(args)
    threshold = _parse_threshold(args.threshold)
    per_fold: dict[str, list[float]] = {}
    for f, (train_idx, test_idx) in enumerate(
        fold_indices(ds.n, args.test_ratio, args.folds, args.seed)
    ):
        train_raw = ds.subset(train_idx)
        train, params = normalize(train_raw)
        test = apply_norm(ds.subset(test_idx), params)
        forest = build_forest(train, config, norm=params)

        if ds.is_classification:
            t = threshold
            if threshold == "auto":
                scores_train = class_scores(forest, train.X, args.aggregation)[:, 1]
                t, _ = tune_threshold(scores_train, train.y)
            train_metrics = evaluate(forest, train, args.aggregation, t)
            test_metrics = evaluate(forest, test, args.aggregation, t)
            per_fold.setdefault("threshold", []).append(float(t))
        else:
            train_metrics = evaluate(forest, train)
            test_metrics = evaluate(forest, test)
        for k, v in train_metrics.items():
            per_fold.setdefault(f"train_{k}", []).append(v)
        for k, v in test_metrics.items():
            per_fold.setdefault(f"test_{k}", []).append(v)

        if args.model_out:
            path = _fold_model_path(args.model_out, f, args.folds)
            save_model(forest, path)
            write_dataset_csv(train_raw, path + ".train.csv", args.label_column)
    _write_rows(args.out, ["metric", "fold", "value"], _summary_rows(per_fold))
    return EXIT_OK


def _load_for_model(args, model, path) -> Dataset:
    """Load a CSV in the schema the model was trained on (pre-normalization)."""
    task = model.task
    ds = load_csv(path, args.label_column, task)
    if ds.feature_names != model.feature_names:
        raise ConfigError(
            f"{path}: columns do not match the model "
            f"(expected {list(model.feature_names)})"
        )
    if model.task == "classification":
        ds = align_classes(ds, model.classes)
    return ds


def cmd_retrain(args) -> int:
    model = load_model(args.model_in)
    if not isinstance(model, Forest):
        raise ConfigError("only centroid-variant models can be retrained")
    ds_old = _load_for_model(args, model, args.data)
    try:
        ds_new = _load_for_model(args, model, args.new_data)
    except EmptyInputError:
        ds_new = None  # header-only batch file: an empty batch
    if model.sample_sets and ds_old.n <= int(max(s.indices.max() for s in model.sample_sets)):
        raise ConfigError("--data has fewer rows than the model's stored sample indices")

    norm = model.norm
    ds_old_n = apply_norm(ds_old, norm) if norm is not None else ds_old
    ds_new_n = None
    if ds_new is not None:
        ds_new_n = apply_norm(ds_new, norm) if norm is not None else ds_new

    rows = []
    test = None
    if args.test_data:
        test = _load_for_model(args, model, args.test_data)
        test = apply_norm(test, norm) if norm is not None else test
        for k, v in evaluate(model, test, args.aggregation).items():
            rows.append([f"pre_{k}", -1, v])

    retrained = retrain_forest(model, ds_old_n, ds_new_n, seed=args.seed)

    if test is not None:
        for k, v in evaluate(retrained, test, args.aggregation).items():
            rows.append([f"post_{k}", -1, v])

    if args.verify:
        ds_all = ds_old_n if ds_new_n is None else concat_datasets(ds_old_n, ds_new_n)
        worst = 0.0
        for sample, state in zip(retrained.sample_sets, retrained.weight_states):
            X = ds_all.X[sample.indices]
            Y = ds_all.y[sample.indices]
            if retrained.config.weight_method == "pearson":
                fresh = pearson_stats(X, np.asarray(Y, dtype=np.float64))
            else:
                fresh = eta_stats(X, Y, len(retrained.classes))
            worst = max(worst, state_max_rel_error(state, fresh))
        rows.append(["verify_max_rel_err", -1, worst])
        if worst >= 1e-9:
            _write_rows(args.out, ["metric", "fold", "value"], rows)
            print(f"verification failed: max relative deviation {worst:g}", file=sys.stderr)
            return EXIT_DATA

    if args.model_out:
        save_model(retrained, args.model_out)
        ds_all_raw = ds_old if ds_new is None else concat_datasets(ds_old, ds_new)
        write_dataset_csv(ds_all_raw, args.model_out + ".train.csv", args.label_column)
    _write_rows(args.out, ["metric", "fold", "value"], rows)
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model_in)
    threshold = _parse_threshold(args.threshold)
    with open(args.data, "r", encoding="utf-8", newline="") as fh:
        header = [h.strip() for h in fh.readline().rstrip("\n").split(",")]
    has_labels = args.label_column in header
    ds = _load_for_model(args, model, args.data) if has_labels else _load_features_only(args, model)
    X = apply_norm(ds, model.norm).X if model.norm is not None else ds.X

    rows = []
    if model.task == "classification":
        probs = class_scores(model, X, args.aggregation)
        t = threshold
        if threshold == "auto":
            if not has_labels:
                raise ConfigError("--threshold auto needs a label column to tune on")
            val_idx = fold_indices(ds.n, 0.3, 1, args.seed)[0][1]
            t, _ = tune_threshold(probs[val_idx, 1], ds.y[val_idx])
        if model.n_classes == 2:
            pred = np.where(probs[:, 1] >= t, 1, 0)
        else:
            pred = probs.argmax(axis=1)
        header = ["pred"] + ["row"] + [f"prob_{c}" for c in model.classes]
        for i in range(len(X)):
            rows.append([model.classes[int(pred[i])], i] + [float(p) for p in probs[i]])
    else:
        preds = predict(model, X)
        header = ["row", "pred"]
        rows = [[i, float(p)] for i, p in enumerate(np.atleast_1d(preds))]
    _write_rows(args.out, header, rows)
    return EXIT_OK


def _load_features_only(args, model) -> Dataset:
    """Unlabelled input: all columns must be the model's feature columns."""
    ds = load_csv(args.data, label_column=None)
    if ds.feature_names != model.feature_names:
        raise ConfigError(f"{args.data}: columns do not match the model")
    return ds


def cmd_eval(args) -> int:
    model = load_model(args.model_in)
    ds = _load_for_model(args, model, args.data)
    ds_n = apply_norm(ds, model.norm) if model.norm is not None else ds
    threshold = _parse_threshold(args.threshold)
    rows = []
    if model.task == "classification" and threshold == "auto":
        train_idx, val_idx = fold_indices(ds_n.n, 0.3, 1, args.seed)[0]
        val, rest = ds_n.subset(val_idx), ds_n.subset(train_idx)
        scores = class_scores(model, val.X, args.aggregation)[:, 1]
        t, _ = tune_threshold(scores, val.y)
        metrics = evaluate(model, rest, args.aggregation, t)
        rows.append(["threshold", -1, float(t)])
    else:
        t = 0.5 if threshold == "auto" else threshold
        metrics = evaluate(model, ds_n, args.aggregation, t)
        if model.task == "classification":
            rows.append(["threshold", -1, float(t)])
    for k, v in sorted(metrics.items()):
        rows.append([k, -1, v])
    _write_rows(args.out, ["metric", "fold", "value"], rows)
    return EXIT_OK


def _stream_schedule(args) -> list[int]:
    if args.schedule:
        with open(args.schedule, "r", encoding="utf-8") as fh:
            sizes = [int(line.strip()) for line in fh if line.strip()]
    elif args.batches:
        sizes = [int(b) for b in args.batches.split(",") if b]
    else:
        sizes = [args.batch_size] * args.n_batches
    if any(s < 1 for s in sizes):
        raise ConfigError("batch sizes must be positive")
    return sizes


def cmd_stream(args) -> int:
    batch_sizes = _stream_schedule(args)
    config = _config_from_args(args)
    real = args.data is not None
    if real:
        ds_full = _load_dataset(args)
        if not ds_full.is_classification or ds_full.n_classes != 2:
            raise ConfigError("stream experiment needs a binary classification dataset")
        test_size = args.test_size or max(50, args.initial // 4)
        need = args.initial + sum(batch_sizes) + test_size
        if need > ds_full.n:
            raise ConfigError(f"schedule needs {need} rows, dataset has {ds_full.n}")
    else:
        test_size = args.test_size or 600

    # results[(samples_used, method)] -> list of AUCs over replications
    results: dict[tuple[int, str], list[float]] = {}

    for r in range(args.replications):
        rep_seed = derive_seed(args.seed, "replication", r)
        if real:
            rng_perm = Rng(derive_seed(rep_seed, "stream-order"))
            perm = rng_perm.permutation(ds_full.n)
            test_raw = ds_full.subset(perm[:test_size])
            pos = test_size
            initial_raw = ds_full.subset(perm[pos : pos + args.initial])
            pos += args.initial
            batches_raw = []
            for b in batch_sizes:
                batches_raw.append(ds_full.subset(perm[pos : pos + b]))
                pos += b
        else:
            initial_raw, batches_raw, test_raw = drifting_stream(
                args.initial, batch_sizes, test_size, rep_seed
            )

        accum_raw, params = normalize(initial_raw)
        test = apply_norm(test_raw, params)
        batches = [apply_norm(b, params) for b in batches_raw]

        cfg = replace(config, seed=rep_seed)
        forest = build_forest(accum_raw, cfg, norm=params)
        used = accum_raw.n
        results.setdefault((used, "forest"), []).append(
            evaluate(forest, test, args.aggregation)["roc_auc"]
        )
        base = cart_ensemble(accum_raw, cfg.n_trees, cfg.max_depth, rep_seed, cfg.min_leaf)
        results.setdefault((used, "baseline"), []).append(
            evaluate(base, test, args.aggregation)["roc_auc"]
        )

        for t, batch in enumerate(batches, start=1):
            step_seed = derive_seed(rep_seed, "retrain", t)
            forest = retrain_forest(forest, accum_raw, batch, seed=step_seed)
            accum_raw = concat_datasets(accum_raw, batch)
            used = accum_raw.n
            results.setdefault((used, "forest"), []).append(
                evaluate(forest, test, args.aggregation)["roc_auc"]
            )
            base = cart_ensemble(accum_raw, cfg.n_trees, cfg.max_depth, step_seed, cfg.min_leaf)
            results.setdefault((used, "baseline"), []).append(
                evaluate(base, test, args.aggregation)["roc_auc"]
            )

    rows = []
    for (used, method), aucs in sorted(results.items()):
        arr = np.asarray(aucs, dtype=np.float64)
        rows.append([method, used, float(np.median(arr)), float(arr.std())])
    _write_rows(args.out, ["method", "samples_used", "median_auc", "std_auc"], rows)
    return EXIT_OK


def cmd_entropy(args) -> int:
    ds = _load_dataset(args)
    if not ds.is_classification:
        raise ConfigError("entropy report needs a classification dataset")
    per: dict[tuple[str, int], list[float]] = {}
    for f, (train_idx, _test_idx) in enumerate(
        fold_indices(ds.n, args.test_ratio, args.folds, args.seed)
    ):
        train, _ = normalize(ds.subset(train_idx))
        sample = bootstrap_sample(train, train.n, derive_seed(args.seed, "sample", f))
        Xs, Ys = train.X[sample.indices], train.y[sample.indices]
        if args.weights == "pearson":
            w_sup = pearson_weights(pearson_stats(Xs, np.asarray(Ys, dtype=np.float64)))
        else:
            w_sup = eta_weights(eta_stats(Xs, Ys, train.n_classes))
        tree_seed = derive_seed(args.seed, "tree", f)
        variants = {
            "supervised": build_tree(
                train, sample, w_sup, args.k, args.depth, seed=tree_seed
            ),
            "unsupervised": build_tree(
                train, sample, uniform_weights(train.d), args.k, args.depth, seed=tree_seed
            ),
            "baseline": build_cart(
                Xs, Ys, "classification", args.depth, n_classes=train.n_classes
            ),
        }
        for name, tree in variants.items():
            trace = weighted_entropy_by_depth(tree, train, sample)
            for depth, h in enumerate(trace):
                per.setdefault((name, depth), []).append(float(h))

    rows = []
    for (name, depth), values in sorted(per.items()):
        for f, v in enumerate(values):
            rows.append([name, depth, f, v])
    for (name, depth), values in sorted(per.items()):
        arr = np.asarray(values, dtype=np.float64)
        rows.append([name, depth, -1, float(np.median(arr))])
        rows.append([name, depth, -2, float(arr.std())])
    _write_rows(args.out, ["variant", "depth", "fold", "entropy"], rows)
    return EXIT_OK


def cmd_cost(args) -> int:
    breakdown = retrain_cost_breakdown(
        n=args.n,
        n_new=args.n_new,
        d=args.d,
        k=args.k,
        n_iter=args.iters,
        depth=args.depth,
        n_classes=args.classes,
        weight_method=args.weights,
        eps1=args.eps1,
        eps2=args.eps2,
        eps3=args.eps3,
        delta=args.delta,
        p=args.p,
        eta1=args.eta1,
        eta2=args.eta2,
        eta3=args.eta3,
    )
    rows = [["eval_cost", float(eval_cost(args.k, max(args.depth, 1), args.d))]]
    rows += [[name, value] for name, value in breakdown.items()]
    rows.append(["total_retrain", float(sum(breakdown.values()))])
    width = max(len(r[0]) for r in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {value:.6g}")
    if args.out:
        _write_rows(args.out, ["component", "value"], rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clusterforest",
        description="Clustering-based random forests with incremental retraining.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="train per-fold forests and report metrics")
    _add_data_flags(p)
    _add_forest_flags(p)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--test-ratio", type=float, default=0.3)
    p.add_argument("--aggregation", choices=["mean", "majority"], default="mean")
    p.add_argument("--threshold", default="0.5")
    p.add_argument("--model-out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("retrain", help="fold a new batch into a saved model")
    p.add_argument("--model-in", required=True)
    p.add_argument("--data", required=True, help="accumulated training data the model was built on")
    p.add_argument("--new-data", required=True, help="new batch CSV (may be header-only)")
    p.add_argument("--test-data", default=None)
    p.add_argument("--label-column", default="label")
    p.add_argument("--aggregation", choices=["mean", "majority"], default="mean")
    p.add_argument("--model-out", default=None)
    p.add_argument("--verify", action="store_true", help="check weight states against from-scratch")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_retrain)

    p = sub.add_parser("predict", help="emit per-row predictions from a saved model")
    p.add_argument("--model-in", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default="label")
    p.add_argument("--aggregation", choices=["mean", "majority"], default="mean")
    p.add_argument("--threshold", default="0.5")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score a saved model against labelled data")
    p.add_argument("--model-in", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default="label")
    p.add_argument("--aggregation", choices=["mean", "majority"], default="mean")
    p.add_argument("--threshold", default="0.5")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stream", help="incremental-retrain experiment over batches")
    _add_data_flags(p, required=False)
    _add_forest_flags(p)
    p.add_argument("--initial", type=int, default=150)
    p.add_argument("--batches", default=None, help="comma-separated batch sizes")
    p.add_argument("--batch-size", type=int, default=150)
    p.add_argument("--n-batches", type=int, default=6)
    p.add_argument("--schedule", default=None, help="file with one batch size per line")
    p.add_argument("--test-size", type=int, default=None)
    p.add_argument("--replications", type=int, default=5)
    p.add_argument("--aggregation", choices=["mean", "majority"], default="mean")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("entropy", help="per-depth impurity report for three tree variants")
    _add_data_flags(p)
    p.add_argument("--weights", choices=["pearson", "eta"], default="eta")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--test-ratio", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("cost", help="leading-order retrain/inference cost estimates")
    p.add_argument("--n", type=int, default=100000)
    p.add_argument("--n-new", type=int, default=1000)
    p.add_argument("--d", type=int, default=38)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--weights", choices=["pearson", "eta"], default="eta")
    p.add_argument("--eps1", type=float, default=0.1)
    p.add_argument("--eps2", type=float, default=0.1)
    p.add_argument("--eps3", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--p", type=int, default=16)
    p.add_argument("--eta1", type=float, default=1.0)
    p.add_argument("--eta2", type=float, default=1.0)
    p.add_argument("--eta3", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cost)

    return parser


def _apply_config_file(argv: list[str]) -> list[str]:
    """Merge a key=value config file: flags win, file fills the gaps."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise ConfigError("--config needs a file path")
    path = argv[i + 1]
    argv = argv[:i] + argv[i + 2 :]
    extra: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            flag = "--" + key.strip()
            if flag not in argv:
                extra.extend([flag, value.strip()])
    # insert after the subcommand so argparse scopes them correctly
    return argv[:1] + extra + argv[1:] if argv else argv


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config_file(argv)
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except ClusterForestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
