"""Evaluation suite: seeded model comparison, threshold and window sweeps,
feature-importance reports, and the prediction latency benchmark.

Every evaluation generates train and test traces from disjoint derived
seeds, runs the full extraction pipeline, trains the requested learner,
and reports accuracy with the confusion matrix.  All results are
deterministic given (config, seed); only the timing fields vary between
runs.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .boosting import (CartModel, TreeParams, cart_train, feature_importance,
                       gbdt_train, logistic_baseline_train, predict_batch,
                       predict_one, rf_train)
from .errors import EmptyTestSetError, InputDomainError, SchemaMismatchError
from .pipeline import (FeatureSchema, WindowSample, default_schema,
                       filter_samples, samples_to_arrays, window_samples)
from .tracegen import TrafficProfile, default_profiles, generate_trace

MODEL_KINDS = ("gbdt", "rf", "cart", "logistic")


@dataclass(frozen=True)
class TraceConfig:
    """Per-class trace length and the profiles to draw from."""

    duration_ms: int = 50000
    profiles: tuple[TrafficProfile, ...] = field(
        default_factory=default_profiles)
    stride_frames: int = 1


def benchmark_config() -> TraceConfig:
    """The shipped benchmark: 50 s per class, web vs video profiles."""
    return TraceConfig()


@dataclass
class EvalReport:
    model_name: str
    accuracy: float
    tp: int
    fp: int
    fn: int
    tn: int
    train_time_ms: float
    predict_time_per_sample_us: float
    n_train: int
    n_test: int
    config: dict

    def result_key(self):
        """Deterministic fields only (timings excluded)."""
        return (self.model_name, self.accuracy, self.tp, self.fp, self.fn,
                self.tn, self.n_train, self.n_test,
                tuple(sorted((k, str(v)) for k, v in self.config.items())))

    def as_text(self) -> str:
        lines = [f"model {self.model_name}",
                 f"accuracy {self.accuracy:.6f}",
                 f"tp {self.tp}", f"fp {self.fp}",
                 f"fn {self.fn}", f"tn {self.tn}",
                 f"n_train {self.n_train}", f"n_test {self.n_test}",
                 f"train_time_ms {self.train_time_ms:.1f}",
                 f"predict_time_per_sample_us "
                 f"{self.predict_time_per_sample_us:.2f}"]
        for key in sorted(self.config):
            lines.append(f"config.{key} {self.config[key]}")
        return "\n".join(lines)


@dataclass
class SweepPoint:
    value: float
    report: EvalReport | None
    error: str | None = None


@dataclass
class SweepResult:
    parameter: str
    points: list[SweepPoint]
    config: dict


def _derived_seeds(seed: int, n: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


def _make_traces(config: TraceConfig, seed: int, split_fraction: float):
    if not 0.0 < split_fraction < 1.0:
        raise InputDomainError(
            f"split_fraction must be in (0, 1), got {split_fraction}")
    train_ms = int(config.duration_ms * split_fraction) // 10 * 10
    test_ms = config.duration_ms - train_ms
    if train_ms < 10 or test_ms < 10:
        raise InputDomainError(
            f"duration {config.duration_ms} ms leaves no room for a "
            f"{split_fraction} train/test split")
    seeds = _derived_seeds(seed, 2 * len(config.profiles))
    train_traces, test_traces = [], []
    for i, profile in enumerate(config.profiles):
        train_traces.append(generate_trace(profile, train_ms, seeds[2 * i]))
        test_traces.append(generate_trace(profile, test_ms, seeds[2 * i + 1]))
    return train_traces, test_traces


def _window_sets(traces_pair, w: int, stride: int, schema: FeatureSchema):
    train_traces, test_traces = traces_pair
    train = [s for t in train_traces
             for s in window_samples(t, w, stride, schema)]
    test = [s for t in test_traces
            for s in window_samples(t, w, stride, schema)]
    return train, test


def _class_counts(samples: list[WindowSample]) -> str:
    n1 = sum(1 for s in samples if s.label == 1)
    return f"{len(samples) - n1} class-0 / {n1} class-1"


def _train_model(model_kind: str, X, y, params: dict, fingerprint: str):
    if model_kind == "gbdt":
        tp = TreeParams(max_leaves=params.get("max_leaves", 31),
                        max_depth=params.get("max_depth", 8),
                        max_bins=params.get("bins", 255),
                        min_leaf=params.get("min_leaf", 20),
                        n_jobs=params.get("n_jobs", 1))
        return gbdt_train(X, y, n_trees=params.get("trees", 100),
                          learning_rate=params.get("learning_rate", 0.1),
                          tree_params=tp, schema_fingerprint=fingerprint)
    if model_kind == "rf":
        return rf_train(X, y, n_trees=params.get("trees", 30),
                        seed=params.get("rf_seed", 0),
                        feature_subsample=params.get("feature_subsample", 1.0),
                        max_depth=params.get("max_depth", 8),
                        min_leaf=params.get("min_leaf", 1),
                        max_bins=params.get("bins", 255))
    if model_kind == "cart":
        tree = cart_train(X, y, max_depth=params.get("max_depth", 8),
                          min_leaf=params.get("min_leaf", 1),
                          max_bins=params.get("bins", 255))
        return CartModel(tree=tree, n_features=X.shape[1],
                         max_depth=params.get("max_depth", 8),
                         min_leaf=params.get("min_leaf", 1),
                         schema_fingerprint=fingerprint)
    if model_kind == "logistic":
        return logistic_baseline_train(X, y,
                                       epochs=params.get("epochs", 300),
                                       step=params.get("step", 0.1),
                                       schema_fingerprint=fingerprint)
    raise InputDomainError(f"unknown model kind {model_kind!r}; "
                           f"expected one of {MODEL_KINDS}")


def _evaluate_samples(model_kind, train, test, th, learner_params, base_config,
                      schema, mode="bytes"):
    params = dict(learner_params or {})
    kept_train, dropped_train = filter_samples(train, th, mode)
    kept_test, dropped_test = filter_samples(test, th, mode)
    if not kept_test:
        raise EmptyTestSetError(
            f"threshold {th} filtered out all {len(test)} test windows "
            f"({_class_counts(test)} before filtering)")
    if not kept_train:
        raise EmptyTestSetError(
            f"threshold {th} filtered out all {len(train)} train windows")
    X_train, y_train = samples_to_arrays(kept_train)
    X_test, y_test = samples_to_arrays(kept_test)

    t0 = time.perf_counter()
    model = _train_model(model_kind, X_train, y_train, params,
                         schema.fingerprint)
    train_ms = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    preds = predict_batch(model, X_test)
    pred_us = (time.perf_counter() - t0) / len(y_test) * 1e6

    tp = int(np.sum((preds == 1) & (y_test == 1)))
    fp = int(np.sum((preds == 1) & (y_test == 0)))
    fn = int(np.sum((preds == 0) & (y_test == 1)))
    tn = int(np.sum((preds == 0) & (y_test == 0)))
    config = dict(base_config)
    config.update(th=th, model_kind=model_kind,
                  n_features=X_train.shape[1],
                  dropped_train=dropped_train, dropped_test=dropped_test,
                  **{f"param_{k}": v for k, v in sorted(params.items())})
    report = EvalReport(model_name=model_kind,
                        accuracy=(tp + tn) / len(y_test),
                        tp=tp, fp=fp, fn=fn, tn=tn,
                        train_time_ms=train_ms,
                        predict_time_per_sample_us=pred_us,
                        n_train=len(y_train), n_test=len(y_test),
                        config=config)
    return report, model


def evaluate(model_kind: str, trace_config: TraceConfig | None = None,
             W_ms: int = 10, th: float = 150.0, seed: int = 42,
             split_fraction: float = 0.6,
             learner_params: dict | None = None) -> EvalReport:
    """Generate, extract, train, and score one configuration end to end."""
    report, _ = evaluate_with_model(model_kind, trace_config, W_ms, th, seed,
                                    split_fraction, learner_params)
    return report


def evaluate_with_model(model_kind: str,
                        trace_config: TraceConfig | None = None,
                        W_ms: int = 10, th: float = 150.0, seed: int = 42,
                        split_fraction: float = 0.6,
                        learner_params: dict | None = None):
    """evaluate() but also returning the trained model."""
    config = trace_config or benchmark_config()
    w = _check_window(W_ms)
    schema = default_schema()
    traces = _make_traces(config, seed, split_fraction)
    train, test = _window_sets(traces, w, config.stride_frames, schema)
    base = {"W_ms": W_ms, "seed": seed, "split_fraction": split_fraction,
            "stride_frames": config.stride_frames,
            "duration_ms": config.duration_ms}
    return _evaluate_samples(model_kind, train, test, th, learner_params,
                             base, schema)


def _check_window(W_ms: int) -> int:
    if W_ms <= 0 or W_ms % 10 != 0:
        raise InputDomainError(
            f"window must be a positive multiple of 10 ms, got {W_ms}")
    return W_ms // 10


def compare_models(kinds=MODEL_KINDS, trace_config: TraceConfig | None = None,
                   W_ms: int = 10, th: float = 150.0, seed: int = 42,
                   split_fraction: float = 0.6,
                   learner_params: dict | None = None) -> list[EvalReport]:
    """One report per model kind on the identical train/test split."""
    config = trace_config or benchmark_config()
    w = _check_window(W_ms)
    schema = default_schema()
    traces = _make_traces(config, seed, split_fraction)
    train, test = _window_sets(traces, w, config.stride_frames, schema)
    base = {"W_ms": W_ms, "seed": seed, "split_fraction": split_fraction,
            "stride_frames": config.stride_frames,
            "duration_ms": config.duration_ms}
    return [_evaluate_samples(kind, train, test, th, learner_params, base,
                              schema)[0]
            for kind in kinds]


def _check_increasing(values) -> list[float]:
    values = list(values)
    if not values:
        raise InputDomainError("sweep needs at least one value")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InputDomainError(f"sweep values must strictly increase: {values}")
    return values


def sweep_threshold(values, W_ms: int = 10, seed: int = 42,
                    trace_config: TraceConfig | None = None,
                    split_fraction: float = 0.6, model_kind: str = "gbdt",
                    learner_params: dict | None = None) -> SweepResult:
    """Evaluate each filtering threshold on identical underlying traces."""
    values = _check_increasing(values)
    config = trace_config or benchmark_config()
    w = _check_window(W_ms)
    schema = default_schema()
    traces = _make_traces(config, seed, split_fraction)
    train, test = _window_sets(traces, w, config.stride_frames, schema)
    base = {"W_ms": W_ms, "seed": seed, "split_fraction": split_fraction,
            "stride_frames": config.stride_frames,
            "duration_ms": config.duration_ms}
    points = []
    for th in values:
        try:
            report, _ = _evaluate_samples(model_kind, train, test, th,
                                          learner_params, base, schema)
            points.append(SweepPoint(value=th, report=report))
        except EmptyTestSetError as exc:
            points.append(SweepPoint(value=th, report=None, error=str(exc)))
    return SweepResult(parameter="threshold", points=points,
                       config={**base, "model_kind": model_kind})


def sweep_window(values_ms, th: float = 150.0, seed: int = 42,
                 trace_config: TraceConfig | None = None,
                 split_fraction: float = 0.6, model_kind: str = "gbdt",
                 learner_params: dict | None = None) -> SweepResult:
    """Evaluate each window size on identical underlying traces."""
    values_ms = _check_increasing(values_ms)
    config = trace_config or benchmark_config()
    schema = default_schema()
    traces = _make_traces(config, seed, split_fraction)
    points = []
    for W_ms in values_ms:
        w = _check_window(W_ms)
        train, test = _window_sets(traces, w, config.stride_frames, schema)
        base = {"W_ms": W_ms, "seed": seed, "split_fraction": split_fraction,
                "stride_frames": config.stride_frames,
                "duration_ms": config.duration_ms}
        try:
            report, _ = _evaluate_samples(model_kind, train, test, th,
                                          learner_params, base, schema)
            points.append(SweepPoint(value=W_ms, report=report))
        except EmptyTestSetError as exc:
            points.append(SweepPoint(value=W_ms, report=None, error=str(exc)))
    return SweepResult(parameter="window_ms", points=points,
                       config={"th": th, "seed": seed,
                               "split_fraction": split_fraction,
                               "stride_frames": config.stride_frames,
                               "duration_ms": config.duration_ms,
                               "model_kind": model_kind})


SWEEP_CSV_HEADER = ("parameter,accuracy,tp,fp,fn,tn,kept_samples,"
                    "train_ms,pred_us")


def format_sweep_csv(result: SweepResult) -> str:
    """One row per sweep point; error points keep the row with empty metrics."""
    lines = [SWEEP_CSV_HEADER]
    for pt in result.points:
        value = f"{pt.value:g}"
        r = pt.report
        if r is None:
            lines.append(f"{value},,,,,,0,,")
            continue
        lines.append(",".join([
            value, f"{r.accuracy:.6f}", str(r.tp), str(r.fp), str(r.fn),
            str(r.tn), str(r.n_test), f"{r.train_time_ms:.1f}",
            f"{r.predict_time_per_sample_us:.2f}"]))
    return "\n".join(lines) + "\n"


@dataclass
class LatencyReport:
    n_samples: int
    repetitions: int
    total_s: float
    per_sample_us: float
    p99_us: float
    throughput_per_s: float


def bench_latency(model, samples, repetitions: int = 3) -> LatencyReport:
    """Per-sample prediction latency over repeated single-vector calls.

    Covers the vector-to-class path only; assembly cost for live record
    streams is reported by the streaming command's exit summary.
    """
    X = np.asarray(samples, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1000:
        raise InputDomainError(
            "latency benchmark needs >= 1000 sample vectors")
    if repetitions < 1:
        raise InputDomainError("repetitions must be >= 1")
    rows = [row.tolist() for row in X]
    times_ns = np.empty(repetitions * len(rows))
    k = 0
    total0 = time.perf_counter()
    for _ in range(repetitions):
        for row in rows:
            t0 = time.perf_counter_ns()
            predict_one(model, row)
            times_ns[k] = time.perf_counter_ns() - t0
            k += 1
    total_s = time.perf_counter() - total0
    per_us = float(times_ns.mean() / 1e3)
    return LatencyReport(n_samples=len(rows), repetitions=repetitions,
                         total_s=total_s, per_sample_us=per_us,
                         p99_us=float(np.percentile(times_ns, 99) / 1e3),
                         throughput_per_s=repetitions * len(rows) / total_s)


@dataclass(frozen=True)
class ImportanceEntry:
    name: str
    flat_index: int
    subframe_offset: int
    slot: str
    channel: str
    field: str
    count: int


def importance_report(model, schema: FeatureSchema) -> list[ImportanceEntry]:
    """Split counts mapped back to named schema positions, sorted descending."""
    counts = feature_importance(model)
    if model.n_features % schema.total_len != 0:
        raise SchemaMismatchError(
            f"model has {model.n_features} features, not a multiple of the "
            f"schema's {schema.total_len}")
    entries = []
    for idx in np.nonzero(counts)[0]:
        sf, slot, channel, name = schema.describe_index(int(idx))
        entries.append(ImportanceEntry(
            name=f"sf{sf:02d}.{slot.value}.{channel.value}.{name}",
            flat_index=int(idx), subframe_offset=sf, slot=slot.value,
            channel=channel.value, field=name, count=int(counts[idx])))
    entries.sort(key=lambda e: (-e.count, e.flat_index))
    return entries


def format_importance_csv(entries: list[ImportanceEntry]) -> str:
    lines = ["rank,name,slot,channel,field,subframe_offset,flat_index,count"]
    for rank, e in enumerate(entries, 1):
        lines.append(f"{rank},{e.name},{e.slot},{e.channel},{e.field},"
                     f"{e.subframe_offset},{e.flat_index},{e.count}")
    return "\n".join(lines) + "\n"
