"""Record-to-vector pipeline: schema layout, zero-padded subframe assembly,
sliding-window sample extraction, and TB-volume filtering."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import InputDomainError, ValidationError
from .grid import (CELL_SLOTS, SUBFRAMES_PER_FRAME, CellSlot, ChannelKind,
                   TimeIndex, channel_valid_in, channels_for)
from .tracegen import NUMERIC_FIELDS, ChannelRecord, LabeledTrace

# Per-channel feature subsets of the default schema.
_DATA_FIELDS = ("tb_len", "prb_count", "prb_start", "mcs", "epre_db",
                "snr_db", "harq_ack")
_DEFAULT_CHANNEL_FIELDS: dict[ChannelKind, tuple[str, ...]] = {
    ChannelKind.PDSCH: _DATA_FIELDS,
    ChannelKind.PUSCH: _DATA_FIELDS,
    ChannelKind.PDCCH: ("cce_index", "aggregation_level", "prb_count"),
    ChannelKind.PUCCH: ("epre_db", "snr_db", "format_type"),
    ChannelKind.SRS: ("epre_db", "snr_db", "srs_bw_rb"),
    ChannelKind.PHICH: ("ack_nack", "epre_db"),
}


class FeatureSchema:
    """Fixed feature layout over (cell slot, channel, field) triples.

    The position of every feature is a pure function of the layout: cell
    slots in grid order, each slot's channels in canonical order, each
    channel's configured fields in the given order.  total_len is the
    per-subframe vector length; window vectors concatenate 10*w of these.
    """

    def __init__(self, fields: dict[tuple[CellSlot, ChannelKind],
                                    tuple[str, ...]]):
        resolved: dict[tuple[CellSlot, ChannelKind], tuple[str, ...]] = {}
        for (slot, channel), names in fields.items():
            if not channel_valid_in(channel, slot):
                raise InputDomainError(
                    f"{channel.value} is not carried in the {slot.value} slot")
            names = tuple(names)
            if len(set(names)) != len(names):
                raise InputDomainError(f"duplicate field for {channel.value}")
            for name in names:
                if name not in NUMERIC_FIELDS:
                    raise InputDomainError(f"unknown record field {name!r}")
            resolved[(slot, channel)] = names
        self.fields = resolved

        spans: dict[tuple[CellSlot, ChannelKind], tuple[int, int]] = {}
        index_names: list[tuple[CellSlot, ChannelKind, str]] = []
        pos = 0
        for slot in CELL_SLOTS:
            for channel in channels_for(slot):
                names = resolved.get((slot, channel), ())
                spans[(slot, channel)] = (pos, pos + len(names))
                for name in names:
                    index_names.append((slot, channel, name))
                pos += len(names)
        self._spans = spans
        self._index_names = index_names
        self.total_len = pos
        if self.total_len == 0:
            raise InputDomainError("schema selects no features")

    def span(self, slot: CellSlot, channel: ChannelKind) -> tuple[int, int]:
        """Half-open [start, stop) of the channel's features in a subframe vector."""
        return self._spans[(slot, channel)]

    def fields_of(self, slot: CellSlot, channel: ChannelKind) -> tuple[str, ...]:
        return self.fields.get((slot, channel), ())

    @property
    def fingerprint(self) -> str:
        parts = []
        for slot in CELL_SLOTS:
            for channel in channels_for(slot):
                names = self.fields.get((slot, channel), ())
                parts.append(f"{slot.value}.{channel.value}:{','.join(names)}")
        digest = hashlib.sha256("|".join(parts).encode()).hexdigest()
        return digest[:12]

    def feature_names(self) -> list[str]:
        """Per-subframe position names, e.g. 'LTE.PDCCH.cce_index'."""
        return [f"{slot.value}.{ch.value}.{name}"
                for slot, ch, name in self._index_names]

    def describe_index(self, flat_index: int
                       ) -> tuple[int, CellSlot, ChannelKind, str]:
        """Map a window-vector position to (subframe offset, slot, channel, field)."""
        if flat_index < 0:
            raise InputDomainError("feature index must be non-negative")
        sf_offset, pos = divmod(flat_index, self.total_len)
        slot, channel, name = self._index_names[pos]
        return sf_offset, slot, channel, name


def default_schema() -> FeatureSchema:
    """The shipped 71-feature layout (LTE 25 + NR 23 + NR 23)."""
    fields = {}
    for slot in CELL_SLOTS:
        for channel in channels_for(slot):
            fields[(slot, channel)] = _DEFAULT_CHANNEL_FIELDS[channel]
    return FeatureSchema(fields)


@dataclass(frozen=True)
class SubframeVector:
    values: np.ndarray
    time: tuple[int, int]  # (frame, subframe)


@dataclass
class WindowSample:
    vector: np.ndarray
    label: int
    tb_total: int
    window_start_frame: int
    w: int                  # frames per window
    tb_count: int = 0       # number of transport blocks in the window

    @property
    def mean_tb_per_subframe(self) -> float:
        return self.tb_total / (SUBFRAMES_PER_FRAME * self.w)


def merge_segments(raw_segments: list[ChannelRecord]) -> list[ChannelRecord]:
    """Collapse RB segments sharing one (time unit, channel) into one record.

    tb_len and prb_count are summed; epre/snr become prb-weighted means
    (plain means when no segment reports PRBs); prb_start is the lowest;
    remaining discrete fields are taken from the first segment in input
    order.  Output is sorted canonically.
    """
    groups: dict[tuple[TimeIndex, ChannelKind], list[ChannelRecord]] = {}
    for seg in raw_segments:
        if not channel_valid_in(seg.channel, seg.time.cell_slot):
            raise ValidationError(
                f"{seg.channel.value} segment in {seg.time.cell_slot.value} slot")
        groups.setdefault((seg.time, seg.channel), []).append(seg)

    merged = []
    for (time, channel), segs in groups.items():
        if len(segs) == 1:
            merged.append(segs[0])
            continue
        first = segs[0]
        weights = [s.prb_count for s in segs]
        total_w = sum(weights)
        if total_w == 0:
            weights = [1] * len(segs)
            total_w = len(segs)
        epre = sum(w * s.epre_db for w, s in zip(weights, segs)) / total_w
        snr = sum(w * s.snr_db for w, s in zip(weights, segs)) / total_w
        merged.append(ChannelRecord(
            time=time, channel=channel,
            tb_len=sum(s.tb_len for s in segs),
            prb_count=sum(s.prb_count for s in segs),
            prb_start=min(s.prb_start for s in segs),
            mcs=first.mcs, epre_db=epre, snr_db=snr,
            harq_ack=first.harq_ack, cce_index=first.cce_index,
            aggregation_level=first.aggregation_level,
            format_type=first.format_type, srs_bw_rb=first.srs_bw_rb,
            ack_nack=first.ack_nack))
    merged.sort(key=ChannelRecord.sort_key)
    return merged


def feature_vector(records: list[ChannelRecord], schema: FeatureSchema,
                   time: tuple[int, int] | None = None) -> SubframeVector:
    """Assemble one subframe's zero-padded feature vector.

    All records must belong to the same subframe, at most one per
    (cell slot, channel); positions without a record stay zero.  For an
    empty record list the subframe time must be passed explicitly.
    """
    if not records:
        if time is None:
            raise InputDomainError("empty subframe needs an explicit time")
        return SubframeVector(np.zeros(schema.total_len), time)

    t0 = records[0].time
    key = (t0.frame, t0.subframe)
    if time is not None and time != key:
        raise InputDomainError(f"records are from subframe {key}, not {time}")

    values = np.zeros(schema.total_len)
    seen: set[tuple[CellSlot, ChannelKind]] = set()
    for rec in records:
        if (rec.time.frame, rec.time.subframe) != key:
            raise InputDomainError(
                f"record at {rec.time} does not belong to subframe {key}")
        unit = (rec.time.cell_slot, rec.channel)
        if unit in seen:
            raise ValidationError(
                f"duplicate {rec.channel.value} record in "
                f"{rec.time.cell_slot.value} of subframe {key}")
        seen.add(unit)
        start, stop = schema.span(*unit)
        if stop > start:
            values[start:stop] = [getattr(rec, name)
                                  for name in schema.fields_of(*unit)]
    return SubframeVector(values, key)


def _assemble_trace(trace: LabeledTrace, schema: FeatureSchema
                    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-subframe matrix plus TB byte/count totals for a whole trace."""
    n_sf = trace.n_frames * SUBFRAMES_PER_FRAME
    mat = np.zeros((n_sf, schema.total_len))
    tb_bytes = np.zeros(n_sf, dtype=np.int64)
    tb_count = np.zeros(n_sf, dtype=np.int64)
    seen: set[tuple[int, int, int]] = set()
    for rec in trace.records:
        row = rec.time.subframe_index
        if row >= n_sf:
            raise InputDomainError(f"record at {rec.time} beyond trace end")
        unit = (row, rec.time.cell_slot.order, rec.channel.order)
        if unit in seen:
            raise ValidationError(
                f"duplicate {rec.channel.value} record at {rec.time}")
        seen.add(unit)
        start, stop = schema.span(rec.time.cell_slot, rec.channel)
        if stop > start:
            mat[row, start:stop] = [getattr(rec, name) for name in
                                    schema.fields_of(rec.time.cell_slot,
                                                     rec.channel)]
        tb_bytes[row] += rec.tb_len
        if rec.tb_len > 0:
            tb_count[row] += 1
    return mat, tb_bytes, tb_count


def window_samples(trace: LabeledTrace, w: int, stride_frames: int = 1,
                   schema: FeatureSchema | None = None,
                   drop_mixed: bool = True) -> list[WindowSample]:
    """Slide a w-frame window over the trace at the given frame stride.

    Windows start at frames 0, stride, 2*stride, ...; each sample is the
    concatenation of its 10*w subframe vectors, labeled by its first
    frame.  Windows whose frames carry more than one label are dropped
    unless drop_mixed is False.
    """
    if w <= 0:
        raise InputDomainError(f"w must be positive, got {w}")
    if stride_frames <= 0:
        raise InputDomainError(f"stride must be positive, got {stride_frames}")
    if schema is None:
        schema = default_schema()
    n_frames = trace.n_frames
    if n_frames < w:
        return []

    mat, tb_bytes, tb_count = _assemble_trace(trace, schema)
    labels = np.array([trace.labels[f] for f in range(n_frames)])

    samples = []
    for start in range(0, n_frames - w + 1, stride_frames):
        window_labels = labels[start:start + w]
        if drop_mixed and np.any(window_labels != window_labels[0]):
            continue
        rows = slice(start * SUBFRAMES_PER_FRAME,
                     (start + w) * SUBFRAMES_PER_FRAME)
        samples.append(WindowSample(
            vector=mat[rows].reshape(-1),
            label=int(window_labels[0]),
            tb_total=int(tb_bytes[rows].sum()),
            window_start_frame=start,
            w=w,
            tb_count=int(tb_count[rows].sum())))
    return samples


def filter_samples(samples: list[WindowSample], th: float,
                   mode: str = "bytes") -> tuple[list[WindowSample], int]:
    """Keep samples whose mean TB volume per subframe reaches th (inclusive).

    mode 'bytes' averages summed TB byte lengths; mode 'count' averages
    the number of transport blocks instead.
    """
    if th < 0:
        raise InputDomainError(f"threshold must be non-negative, got {th}")
    if mode not in ("bytes", "count"):
        raise InputDomainError(f"unknown filter mode {mode!r}")
    kept = []
    for s in samples:
        stat = s.tb_total if mode == "bytes" else s.tb_count
        if stat / (SUBFRAMES_PER_FRAME * s.w) >= th:
            kept.append(s)
    return kept, len(samples) - len(kept)


def extract(trace: LabeledTrace, w: int, stride_frames: int = 1,
            th: float = 0.0, schema: FeatureSchema | None = None,
            drop_mixed: bool = True, mode: str = "bytes"
            ) -> tuple[list[WindowSample], int]:
    """Full pipeline: windowing plus filtering; returns (kept, dropped count)."""
    samples = window_samples(trace, w, stride_frames, schema, drop_mixed)
    return filter_samples(samples, th, mode)


def samples_to_arrays(samples: list[WindowSample]
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Stack samples into an (n, 10*w*total_len) matrix and label vector."""
    if not samples:
        raise InputDomainError("no samples to stack")
    X = np.stack([s.vector for s in samples])
    y = np.array([s.label for s in samples], dtype=np.int64)
    return X, y
