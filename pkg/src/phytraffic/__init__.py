"""Traffic classification over synthetic 5G NSA physical-channel records.

The package covers the full path from labeled trace synthesis through
fixed-length window vectors to from-scratch tree ensembles and their
evaluation harness.  See the README for the CLI walkthrough.
"""
from . import boosting, evalkit, grid, pipeline, recordio, tracegen
from .errors import (DegenerateDataError, EmptyTestSetError, InputDomainError,
                     PhyTrafficError, SchemaMismatchError, ValidationError)
from .grid import (CELL_SLOTS, CHANNEL_ORDER, CellSlot, ChannelKind,
                   TimeIndex)
from .pipeline import (FeatureSchema, WindowSample, default_schema, extract,
                       feature_vector, filter_samples, merge_segments,
                       window_samples)
from .tracegen import (ChannelRecord, LabeledTrace, TrafficProfile,
                       default_profiles, generate_mixed_trace, generate_trace,
                       validate_trace)

__version__ = "0.1.0"

__all__ = [
    "CELL_SLOTS", "CHANNEL_ORDER", "CellSlot", "ChannelKind", "ChannelRecord",
    "DegenerateDataError", "EmptyTestSetError", "FeatureSchema",
    "InputDomainError", "LabeledTrace", "PhyTrafficError",
    "SchemaMismatchError", "TimeIndex", "TrafficProfile", "ValidationError",
    "WindowSample", "boosting", "default_profiles", "default_schema",
    "evalkit", "extract", "feature_vector", "filter_samples",
    "generate_mixed_trace", "generate_trace", "grid", "merge_segments",
    "pipeline", "recordio", "tracegen", "validate_trace", "window_samples",
]
