"""Shared fixtures.

The shipped benchmark evaluation is expensive (two 50 s traces per class
plus a 100-round GBDT fit), so it runs once per session and every test
that needs its reports, model, or sample matrix shares the result.
"""
import time

import numpy as np
import pytest

from phytraffic.evalkit import evaluate, evaluate_with_model
from phytraffic.pipeline import default_schema, extract, samples_to_arrays
from phytraffic.tracegen import default_profiles, generate_trace


@pytest.fixture(scope="session")
def benchmark():
    """GBDT and logistic runs on the default benchmark split (seed 42).

    Returns a dict with the gbdt report and trained model, the logistic
    report on the identical split, and the wall-clock seconds the gbdt
    run took end to end.
    """
    t0 = time.perf_counter()
    gbdt_report, gbdt_model = evaluate_with_model("gbdt", seed=42)
    gbdt_wall_s = time.perf_counter() - t0
    logistic_report = evaluate("logistic", seed=42)
    return {
        "gbdt": gbdt_report,
        "model": gbdt_model,
        "logistic": logistic_report,
        "gbdt_wall_s": gbdt_wall_s,
    }


@pytest.fixture(scope="session")
def bench_vectors():
    """2000 filtered benchmark-style window vectors (W=10 ms, th=150)."""
    schema = default_schema()
    rows = []
    offset = 0
    while len(rows) < 2000:
        for profile in default_profiles():
            trace = generate_trace(profile, 20000, seed=900 + offset)
            kept, _ = extract(trace, w=1, th=150.0, schema=schema)
            rows.extend(kept)
        offset += 1
    X, _ = samples_to_arrays(rows[:2000])
    return X
