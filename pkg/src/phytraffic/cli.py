"""Command-line entry point tying the toolkit together.

Subcommands: generate, extract, train, stream, sweep, bench, importance.
Exit codes: 0 success, 2 usage, 3 validation, 4 I/O, 5 degenerate data.
All randomness is seed-derived, so re-running a command with identical
flags reproduces its data outputs byte for byte (timing summaries go to
stderr; sweep tables carry measured times in their last two columns).
"""
from __future__ import annotations

import argparse
import sys
import time
from collections import Counter
from pathlib import Path

import numpy as np

from .boosting import (CartModel, TreeParams, cart_train, gbdt_train,
                       load_model, logistic_baseline_train, predict_batch,
                       predict_one, rf_train, save_model)
from .errors import (DegenerateDataError, EmptyTestSetError, InputDomainError,
                     PhyTrafficError, ValidationError)
from .evalkit import (LatencyReport, bench_latency, format_importance_csv,
                      format_sweep_csv, importance_report, sweep_threshold,
                      sweep_window, TraceConfig)
from .grid import CHANNEL_ORDER
from .pipeline import default_schema, filter_samples, window_samples
from .recordio import read_matrix, read_records, write_matrix, write_records
from .tracegen import default_profiles, generate_mixed_trace, generate_trace


def _check_duration(parser, duration) -> None:
    if duration <= 0 or duration % 10 != 0:
        parser.error(f"--duration must be a positive multiple of 10 ms, "
                     f"got {duration}")


def _check_window(parser, window_ms) -> int:
    if window_ms <= 0 or window_ms % 10 != 0:
        parser.error(f"--window-ms must be a positive multiple of 10, "
                     f"got {window_ms}")
    return window_ms // 10


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window-ms", type=int, default=10,
                   help="window size in ms, multiple of 10 (default 10)")
    p.add_argument("--threshold", type=float, default=150.0,
                   help="mean TB volume per subframe to keep a window "
                        "(default 150)")
    p.add_argument("--stride-frames", type=int, default=1,
                   help="frames between window starts (default 1)")
    p.add_argument("--mode", choices=("bytes", "count"), default="bytes",
                   help="filter statistic: TB byte sum or TB count")


def _add_learner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trees", type=int, default=None,
                   help="ensemble size (default 100 for gbdt, 30 for rf)")
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--max-leaves", type=int, default=31)
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--bins", type=int, default=255)
    p.add_argument("--seed", type=int, default=0,
                   help="bootstrap seed for rf (default 0)")


def _check_learner_flags(parser, args) -> dict:
    if args.trees is not None and args.trees < 1:
        parser.error(f"--trees must be >= 1, got {args.trees}")
    if not 0.0 < args.learning_rate <= 1.0:
        parser.error(f"--learning-rate must be in (0, 1], "
                     f"got {args.learning_rate}")
    if args.learning_rate > 0.5:
        print(f"warning: learning rate {args.learning_rate} is unusually "
              "high; typical values stay well below 1", file=sys.stderr)
    if args.max_leaves < 2:
        parser.error("--max-leaves must be >= 2")
    if args.max_depth < 1:
        parser.error("--max-depth must be >= 1")
    if args.bins < 2:
        parser.error("--bins must be >= 2")
    params = {"learning_rate": args.learning_rate,
              "max_leaves": args.max_leaves, "max_depth": args.max_depth,
              "bins": args.bins, "rf_seed": args.seed}
    if args.trees is not None:
        params["trees"] = args.trees
    return params


def cmd_generate(parser, args) -> int:
    _check_duration(parser, args.duration)
    web, video = default_profiles()
    if args.profile == "mixed":
        if args.segment_ms <= 0 or args.segment_ms % 10 != 0:
            parser.error("--segment-ms must be a positive multiple of 10")
        segments = []
        remaining, toggle = args.duration, 0
        while remaining > 0:
            seg = min(args.segment_ms, remaining)
            segments.append(((web, video)[toggle % 2], seg))
            remaining -= seg
            toggle += 1
        trace = generate_mixed_trace(segments, args.seed)
    else:
        profile = web if args.profile == "web" else video
        trace = generate_trace(profile, args.duration, args.seed)
    write_records(trace, args.out)
    counts = Counter(r.channel for r in trace.records)
    print(f"wrote {len(trace.records)} records over {trace.n_frames} frames "
          f"to {args.out}")
    for ch in CHANNEL_ORDER:
        print(f"  {ch.value}: {counts.get(ch, 0)}")
    return 0


def cmd_extract(parser, args) -> int:
    w = _check_window(parser, args.window_ms)
    if args.stride_frames < 1:
        parser.error("--stride-frames must be >= 1")
    if args.threshold < 0:
        parser.error("--threshold must be non-negative")
    trace = read_records(args.input)
    schema = default_schema()
    samples = window_samples(trace, w, args.stride_frames, schema)
    kept, dropped = filter_samples(samples, args.threshold, args.mode)
    write_matrix(kept, args.out, schema, w, args.threshold,
                 args.stride_frames, args.mode)
    print(f"kept {len(kept)} windows, dropped {dropped} "
          f"(threshold {args.threshold:g} {args.mode}/subframe, "
          f"W={args.window_ms} ms)")
    if not kept:
        print("warning: no windows survived the filter; wrote an empty "
              "matrix", file=sys.stderr)
    return 0


def cmd_train(parser, args) -> int:
    params = _check_learner_flags(parser, args)
    matrix = read_matrix(args.input)
    X, y = matrix.X, matrix.y
    if X.shape[0] == 0:
        raise DegenerateDataError(f"{args.input}: empty sample matrix")
    if np.unique(y).size < 2:
        raise DegenerateDataError(
            f"{args.input}: all samples share label {int(y[0])}; "
            "training needs both classes")
    fingerprint = matrix.meta["schema"]

    t0 = time.perf_counter()
    if args.model == "gbdt":
        tp = TreeParams(max_leaves=args.max_leaves, max_depth=args.max_depth,
                        max_bins=args.bins, min_leaf=20)
        model = gbdt_train(X, y, n_trees=params.get("trees", 100),
                           learning_rate=args.learning_rate, tree_params=tp,
                           schema_fingerprint=fingerprint)
        detail = f"{model.n_trees} trees, " \
                 f"{sum(t.n_leaves() for t in model.trees)} leaves"
    elif args.model == "rf":
        model = rf_train(X, y, n_trees=params.get("trees", 30),
                         seed=args.seed, max_depth=args.max_depth,
                         max_bins=args.bins)
        model.schema_fingerprint = fingerprint
        detail = f"{len(model.trees)} trees"
    elif args.model == "cart":
        tree = cart_train(X, y, max_depth=args.max_depth, max_bins=args.bins)
        model = CartModel(tree=tree, n_features=X.shape[1],
                          max_depth=args.max_depth,
                          schema_fingerprint=fingerprint)
        detail = f"depth {tree.depth()}, {tree.n_leaves()} leaves"
    else:
        model = logistic_baseline_train(X, y, schema_fingerprint=fingerprint)
        detail = f"{model.n_features} weights"
    elapsed = time.perf_counter() - t0

    save_model(model, args.out)
    train_acc = float(np.mean(predict_batch(model, X) == y))
    print(f"trained {args.model} on {X.shape[0]} samples "
          f"({X.shape[1]} features): {detail}")
    print(f"training accuracy {train_acc:.4f}, fit time {elapsed * 1e3:.0f} ms")
    print(f"model written to {args.out}")
    return 0


def cmd_stream(parser, args) -> int:
    w = _check_window(parser, args.window_ms)
    if args.stride_frames < 1:
        parser.error("--stride-frames must be >= 1")
    model = load_model(args.model)
    schema = default_schema()
    if model.schema_fingerprint is None:
        print("warning: model carries no schema fingerprint; assuming the "
              "default layout", file=sys.stderr)
    elif model.schema_fingerprint != schema.fingerprint:
        raise ValidationError(
            f"model schema {model.schema_fingerprint} does not match the "
            f"extraction schema {schema.fingerprint}")
    trace = read_records(args.input)

    t_assembly = time.perf_counter()
    samples = window_samples(trace, w, args.stride_frames, schema,
                             drop_mixed=False)
    assembly_s = time.perf_counter() - t_assembly

    denom = 10 * w
    decide_ns = []
    out = sys.stdout
    for s in samples:
        t0 = time.perf_counter_ns()
        stat = s.tb_total if args.mode == "bytes" else s.tb_count
        if stat / denom >= args.threshold:
            _, proba = predict_one(model, s.vector.tolist())
            line = (f"{s.window_start_frame * 10},{int(proba > 0.5)},"
                    f"{repr(proba)},{s.tb_total}")
        else:
            line = f"{s.window_start_frame * 10},ABSTAIN,,{s.tb_total}"
        decide_ns.append(time.perf_counter_ns() - t0)
        out.write(line + "\n")

    n = len(samples)
    if n:
        mean_us = sum(decide_ns) / n / 1e3
        p99_us = float(np.percentile(np.array(decide_ns), 99) / 1e3)
        print(f"{n} windows; assembly {assembly_s * 1e3:.0f} ms total "
              f"({assembly_s / n * 1e6:.1f} us/window); decision mean "
              f"{mean_us:.1f} us, p99 {p99_us:.1f} us", file=sys.stderr)
    else:
        print("0 windows (trace shorter than one window)", file=sys.stderr)
    return 0


def cmd_sweep(parser, args) -> int:
    try:
        values = [float(v) for v in args.values.split(",") if v]
    except ValueError:
        parser.error(f"--values must be comma-separated numbers, "
                     f"got {args.values!r}")
    if not values or any(b <= a for a, b in zip(values, values[1:])):
        parser.error("--values must be strictly increasing")
    params = _check_learner_flags(parser, args)
    _check_duration(parser, args.duration)
    if not 0.0 < args.split_fraction < 1.0:
        parser.error("--split-fraction must be in (0, 1)")
    config = TraceConfig(duration_ms=args.duration,
                         stride_frames=args.stride_frames)

    if args.kind == "threshold":
        w = _check_window(parser, args.window_ms)
        result = sweep_threshold(values, W_ms=10 * w, seed=args.seed,
                                 trace_config=config,
                                 split_fraction=args.split_fraction,
                                 model_kind=args.model, learner_params=params)
    else:
        for v in values:
            if v <= 0 or v % 10 != 0:
                parser.error(f"window values must be positive multiples of "
                             f"10 ms, got {v:g}")
        result = sweep_window([int(v) for v in values], th=args.threshold,
                              seed=args.seed, trace_config=config,
                              split_fraction=args.split_fraction,
                              model_kind=args.model, learner_params=params)

    Path(args.out).write_text(format_sweep_csv(result))
    print(f"sweep table written to {args.out}")
    for pt in result.points:
        if pt.error is not None:
            print(f"note: {result.parameter}={pt.value:g} skipped: "
                  f"{pt.error}", file=sys.stderr)
        else:
            print(f"{result.parameter}={pt.value:g} accuracy="
                  f"{pt.report.accuracy:.4f} kept={pt.report.n_test}")
    if not args.no_plot:
        from .plots import render_sweep_plot
        png = Path(args.out).with_suffix(".png")
        render_sweep_plot(result, png)
        print(f"figure written to {png}")
    return 0


def cmd_bench(parser, args) -> int:
    if args.repetitions < 1:
        parser.error("--repetitions must be >= 1")
    model = load_model(args.model)
    matrix = read_matrix(args.input)
    report = bench_latency(model, matrix.X, args.repetitions)
    _print_latency(report)
    return 0


def _print_latency(r: LatencyReport) -> None:
    print(f"samples {r.n_samples} x {r.repetitions} repetitions")
    print(f"total {r.total_s:.3f} s, per-sample {r.per_sample_us:.1f} us, "
          f"p99 {r.p99_us:.1f} us")
    print(f"throughput {r.throughput_per_s:.0f} predictions/s")


def cmd_importance(parser, args) -> int:
    if args.top < 1:
        parser.error("--top must be >= 1")
    model = load_model(args.model)
    schema = default_schema()
    entries = importance_report(model, schema)
    for rank, e in enumerate(entries[:args.top], 1):
        print(f"{rank:3d}. {e.name}  {e.count}")
    if args.out:
        Path(args.out).write_text(format_importance_csv(entries))
        print(f"importance table written to {args.out}")
        if not args.no_plot:
            from .plots import render_importance_plot
            png = Path(args.out).with_suffix(".png")
            render_importance_plot(entries, png, top=args.top)
            print(f"figure written to {png}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phytraffic",
        description="Traffic classification over 5G NSA physical-channel "
                    "record traces")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic labeled trace")
    p.add_argument("--profile", required=True,
                   choices=("web", "video", "mixed"))
    p.add_argument("--duration", type=int, required=True,
                   help="trace length in ms (multiple of 10)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--segment-ms", type=int, default=5000,
                   help="segment length for mixed traces (default 5000)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("extract", help="records -> filtered sample matrix")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="fit a model on a sample matrix")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--model", choices=("gbdt", "rf", "cart", "logistic"),
                   default="gbdt")
    p.add_argument("--out", required=True)
    _add_learner_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("stream",
                       help="classify a record stream window by window")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("sweep", help="threshold or window-size sweep")
    p.add_argument("kind", choices=("threshold", "window"))
    p.add_argument("--values", required=True,
                   help="comma-separated increasing values")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--model", choices=("gbdt", "rf", "cart", "logistic"),
                   default="gbdt")
    p.add_argument("--duration", type=int, default=50000,
                   help="per-class trace length in ms (default 50000)")
    p.add_argument("--split-fraction", type=float, default=0.6)
    p.add_argument("--window-ms", type=int, default=10)
    p.add_argument("--threshold", type=float, default=150.0)
    p.add_argument("--stride-frames", type=int, default=1)
    p.add_argument("--no-plot", action="store_true",
                   help="skip the PNG figure next to the CSV")
    _add_learner_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="prediction latency benchmark")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True,
                   help="sample matrix with >= 1000 rows")
    p.add_argument("--repetitions", type=int, default=3)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("importance",
                       help="split-frequency feature importance")
    p.add_argument("--model", required=True)
    p.add_argument("--top", type=int, default=15)
    p.add_argument("--out", default=None, help="optional CSV output path")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_importance)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(parser, args)
    except (DegenerateDataError, EmptyTestSetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except (ValidationError, InputDomainError, PhyTrafficError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
