"""Record-trace and sample-matrix file formats.

Both are line-oriented text with a version banner and `# key value`
metadata lines, then comma-separated data rows.  Numbers round-trip
exactly: integers as decimal, floats via repr.  Readers refuse newer
major versions and report malformed lines by number.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PhyTrafficError, ValidationError
from .grid import CellSlot, ChannelKind, TimeIndex
from .pipeline import FeatureSchema, WindowSample
from .tracegen import NUMERIC_FIELDS, ChannelRecord, LabeledTrace

RECORD_BANNER = "# phytraffic.records.v"
MATRIX_BANNER = "# phytraffic.samples.v"
FORMAT_VERSION = 1

_FLOAT_FIELDS = ("epre_db", "snr_db")
_RECORD_COLUMNS = ("frame", "subframe", "cell_slot", "channel") + NUMERIC_FIELDS


def _check_version(first_line: str, banner: str, path) -> None:
    if not first_line.startswith(banner):
        raise ValidationError(f"{path}: missing {banner.strip('# ')} banner")
    version = int(first_line[len(banner):])
    if version > FORMAT_VERSION:
        raise ValidationError(
            f"{path}: format version {version} is newer than supported "
            f"{FORMAT_VERSION}")


def _encode_labels(trace: LabeledTrace) -> str:
    runs = []
    run_label, run_len = None, 0
    for f in range(trace.n_frames):
        label = trace.labels[f]
        if label == run_label:
            run_len += 1
        else:
            if run_label is not None:
                runs.append(f"{run_label}:{run_len}")
            run_label, run_len = label, 1
    if run_label is not None:
        runs.append(f"{run_label}:{run_len}")
    return ",".join(runs)


def _decode_labels(text: str, n_frames: int, path) -> dict[int, int]:
    labels: dict[int, int] = {}
    frame = 0
    if text:
        for run in text.split(","):
            label_s, _, count_s = run.partition(":")
            for _ in range(int(count_s)):
                labels[frame] = int(label_s)
                frame += 1
    if frame != n_frames:
        raise ValidationError(
            f"{path}: label runs cover {frame} frames, expected {n_frames}")
    return labels


def write_records(trace: LabeledTrace, path) -> None:
    lines = [
        f"{RECORD_BANNER}{FORMAT_VERSION}",
        "# fields " + " ".join(_RECORD_COLUMNS),
        f"# duration_ms {trace.duration_ms}",
        f"# seed {trace.seed}",
        f"# labels {_encode_labels(trace)}",
    ]
    last_key = None
    for rec in trace.records:
        key = rec.sort_key()
        if last_key is not None and key < last_key:
            raise ValidationError(
                f"records out of canonical order near {rec.time}")
        last_key = key
        cols = [str(rec.time.frame), str(rec.time.subframe),
                rec.time.cell_slot.value, rec.channel.value]
        for name in NUMERIC_FIELDS:
            v = getattr(rec, name)
            cols.append(repr(float(v)) if name in _FLOAT_FIELDS else str(v))
        lines.append(",".join(cols))
    Path(path).write_text("\n".join(lines) + "\n")


def read_records(path) -> LabeledTrace:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise ValidationError(f"{path}: empty file")
    _check_version(lines[0], RECORD_BANNER, path)
    meta: dict[str, str] = {}
    body_start = 1
    for i in range(1, len(lines)):
        if not lines[i].startswith("# "):
            body_start = i
            break
        key, _, value = lines[i][2:].partition(" ")
        meta[key] = value
        body_start = i + 1
    for key in ("duration_ms", "seed", "labels"):
        if key not in meta:
            raise ValidationError(f"{path}: missing header key {key!r}")
    duration_ms = int(meta["duration_ms"])
    labels = _decode_labels(meta["labels"], duration_ms // 10, path)

    records: list[ChannelRecord] = []
    last_key = None
    for lineno in range(body_start, len(lines)):
        line = lines[lineno]
        if not line:
            continue
        try:
            rec = _parse_record_line(line)
        except (PhyTrafficError, ValueError) as exc:
            raise ValidationError(f"{path}:{lineno + 1}: {exc}") from exc
        key = rec.sort_key()
        if last_key is not None and key < last_key:
            raise ValidationError(
                f"{path}:{lineno + 1}: record out of time order")
        last_key = key
        records.append(rec)
    return LabeledTrace(records=records, labels=labels,
                        seed=int(meta["seed"]), duration_ms=duration_ms)


def _parse_record_line(line: str) -> ChannelRecord:
    cols = line.split(",")
    if len(cols) != len(_RECORD_COLUMNS):
        raise ValidationError(
            f"expected {len(_RECORD_COLUMNS)} fields, got {len(cols)}")
    time = TimeIndex(frame=int(cols[0]), subframe=int(cols[1]),
                     cell_slot=CellSlot(cols[2]))
    values = {}
    for name, tok in zip(NUMERIC_FIELDS, cols[4:]):
        values[name] = float(tok) if name in _FLOAT_FIELDS else int(tok)
    return ChannelRecord(time=time, channel=ChannelKind(cols[3]), **values)


@dataclass
class MatrixData:
    X: np.ndarray
    y: np.ndarray
    window_start_frames: np.ndarray
    tb_totals: np.ndarray
    meta: dict


def write_matrix(samples: list[WindowSample], path, schema: FeatureSchema,
                 w: int, th: float, stride_frames: int = 1,
                 mode: str = "bytes") -> None:
    dim = 10 * w * schema.total_len
    lines = [
        f"{MATRIX_BANNER}{FORMAT_VERSION}",
        f"# schema {schema.fingerprint}",
        f"# total_len {schema.total_len}",
        f"# w {w}",
        f"# window_ms {10 * w}",
        f"# threshold {repr(float(th))}",
        f"# stride_frames {stride_frames}",
        f"# mode {mode}",
        f"# columns window_start_frame label tb_total features[{dim}]",
    ]
    for s in samples:
        if s.vector.size != dim:
            raise ValidationError(
                f"sample at frame {s.window_start_frame} has "
                f"{s.vector.size} features, expected {dim}")
        feats = ",".join(repr(v) for v in s.vector.tolist())
        lines.append(f"{s.window_start_frame},{s.label},{s.tb_total},{feats}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> MatrixData:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise ValidationError(f"{path}: empty file")
    _check_version(lines[0], MATRIX_BANNER, path)
    meta_raw: dict[str, str] = {}
    body_start = 1
    for i in range(1, len(lines)):
        if not lines[i].startswith("# "):
            body_start = i
            break
        key, _, value = lines[i][2:].partition(" ")
        meta_raw[key] = value
        body_start = i + 1
    for key in ("schema", "total_len", "w", "threshold", "stride_frames"):
        if key not in meta_raw:
            raise ValidationError(f"{path}: missing header key {key!r}")
    meta = {
        "schema": meta_raw["schema"],
        "total_len": int(meta_raw["total_len"]),
        "w": int(meta_raw["w"]),
        "window_ms": int(meta_raw.get("window_ms", 10 * int(meta_raw["w"]))),
        "threshold": float(meta_raw["threshold"]),
        "stride_frames": int(meta_raw["stride_frames"]),
        "mode": meta_raw.get("mode", "bytes"),
    }
    dim = 10 * meta["w"] * meta["total_len"]
    starts, labels, totals, rows = [], [], [], []
    for lineno in range(body_start, len(lines)):
        line = lines[lineno]
        if not line:
            continue
        cols = line.split(",")
        if len(cols) != 3 + dim:
            raise ValidationError(
                f"{path}:{lineno + 1}: expected {3 + dim} fields, "
                f"got {len(cols)}")
        try:
            starts.append(int(cols[0]))
            labels.append(int(cols[1]))
            totals.append(int(cols[2]))
            rows.append(np.array(cols[3:], dtype=float))
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno + 1}: {exc}") from exc
    X = np.stack(rows) if rows else np.empty((0, dim))
    return MatrixData(X=X, y=np.array(labels, dtype=np.int64),
                      window_start_frames=np.array(starts, dtype=np.int64),
                      tb_totals=np.array(totals, dtype=np.int64), meta=meta)
