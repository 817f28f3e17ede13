"""Seeded synthetic generator for labeled physical-channel record traces.

The generative model is a two-state renewal process per traffic class:
bursts of activity alternate with idle gaps, both with exponential
durations.  Inside each state, every (cell slot, channel) pair flips an
independent occupancy coin per time unit; occupied units get one merged
record whose fields are drawn around the profile's baselines.  Each
burst or gap draws a private occupancy multiplier, so traffic density
varies period to period while per-record field distributions stay fixed:
transport block lengths always come from the profile's (mean, sd) normal
truncated at zero.  Channel quality (snr/epre) shares a slowly drifting
AR(1) component across the whole trace so that per-record quality
readings are correlated in time.

Secondary field rules (all deterministic functions of profile parameters):

* mcs tracks the per-record snr draw; prb counts follow tb_len / spectral
  efficiency.
* PDCCH aggregation level rises as snr falls.  Session length drives the
  scheduler: long-session profiles use semi-persistent scheduling more
  often (cce_index pinned into the low control region) and place their
  dynamic grants high in the control region; short-session profiles
  scatter dynamic grants across it.  The ranges are chosen so the mean
  cce_index per class is (almost) identical; only the distribution shape
  differs.  Idle-gap grants scatter uniformly for every class.
* PUCCH transmit power is closed-loop controlled: it tracks a duty-
  dependent target with a small control error instead of the open-loop
  quality drift.  Transmissions that restart after a scheduling gap
  undershoot the target while the loop re-converges; short-session
  profiles restart cold (deep undershoot), long-session ones stay warm
  (shallow undershoot).  The undershoot is re-centred so mean PUCCH power
  stays exactly at the target either way.  The CSI (format 2) share
  follows session length (periodic CSI reporting suits sustained
  sessions) and drops to a small common floor in gaps.
* SRS sounding alternates between an extreme two-point pattern ({4,32} RB
  edge soundings) and a mid-band pattern centred on 18 RB; short-session
  profiles lean extreme, long-session ones lean mid-band.  Both patterns
  share the same mean bandwidth.

All randomness flows from a single PCG64 generator seeded by the trace
seed; mixed traces derive per-segment child seeds via SeedSequence.spawn.
Equal (profile, duration, seed) therefore reproduce byte-identical traces.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputDomainError, ValidationError
from .grid import (CELL_SLOTS, SUBFRAMES_PER_FRAME, CellSlot, ChannelKind,
                   TimeIndex, channel_valid_in, channels_for)

# Numeric record fields in canonical (file/schema) order.
NUMERIC_FIELDS: tuple[str, ...] = (
    "tb_len", "prb_count", "prb_start", "mcs", "epre_db", "snr_db",
    "harq_ack", "cce_index", "aggregation_level", "format_type",
    "srs_bw_rb", "ack_nack",
)

_MAX_PRB = 100
_BURST_OCC_SCALE = (0.55, 1.25)  # per-burst multiplier on channel occupancy
_IDLE_OCC_SCALE = (0.5, 1.5)     # per-gap multiplier on idle occupancy
_IDLE_CSI_RATE = 0.15            # CSI-format PUCCH share outside bursts
_DRIFT_RHO = 0.97
_DRIFT_EPS_SD = 0.8
_SNR_SD = 2.2
_EPRE_SD = 1.8
_PUCCH_LOAD_EPRE_GAIN = 9.0     # dB of PUCCH power per unit of PUCCH duty
_PUCCH_PC_SD = 1.0               # closed-loop power-control error, dB
_PUCCH_COLD_RATE = 0.25          # in-burst share of post-gap restarts
_IDLE_COLD_RATE = 0.30           # gap transmissions restart cold more often
_PUCCH_COLD_DEPTH_SHORT = 9.0    # dB undershoot after a cold restart
_PUCCH_COLD_DEPTH_LONG = 2.5     # warm loops dip, they do not crater
_MCS_PER_SNR_DB = 0.82
_LONG_SESSION_MS = 500.0         # burst length at which scheduling flips
_SRS_MID_RB = 18.0               # mid-band sounding centre, = mean of {4,32}
_SRS_MID_SD = 4.0
_SRS_PATTERN_MIX = 0.8           # weight of each profile's preferred pattern


def _csi_rate(profile: TrafficProfile) -> float:
    return float(np.clip(profile.burst_duration_ms / 1000.0, 0.15, 0.85))


def _persistence_rate(profile: TrafficProfile) -> float:
    return float(np.clip(profile.burst_duration_ms / 1000.0, 0.05, 0.6))


def _long_session(profile: TrafficProfile) -> bool:
    return profile.burst_duration_ms >= _LONG_SESSION_MS


@dataclass(frozen=True)
class TrafficProfile:
    """Statistical description of one traffic class."""

    label: int
    burst_period_ms: float
    burst_duration_ms: float
    dl_tb_len_mean: float
    dl_tb_len_sd: float
    ul_tb_len_mean: float
    ul_tb_len_sd: float
    channel_occupancy: dict[ChannelKind, float]
    idle_occupancy: dict[ChannelKind, float]
    snr_mean_db: float
    epre_mean_db: float

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise InputDomainError(f"label must be 0 or 1, got {self.label}")
        for name in ("burst_period_ms", "burst_duration_ms",
                     "dl_tb_len_mean", "ul_tb_len_mean"):
            if getattr(self, name) <= 0:
                raise InputDomainError(f"{name} must be positive")
        for name in ("dl_tb_len_sd", "ul_tb_len_sd"):
            if getattr(self, name) < 0:
                raise InputDomainError(f"{name} must be non-negative")
        for table_name in ("channel_occupancy", "idle_occupancy"):
            table = getattr(self, table_name)
            for ch, p in table.items():
                if not 0.0 <= p <= 1.0:
                    raise InputDomainError(
                        f"{table_name}[{ch.value}] = {p} outside [0, 1]")

    def occupancy(self, channel: ChannelKind, active: bool) -> float:
        table = self.channel_occupancy if active else self.idle_occupancy
        return table.get(channel, 0.0)


@dataclass(frozen=True, slots=True)
class ChannelRecord:
    """One merged record for one (cell time unit, channel) pair."""

    time: TimeIndex
    channel: ChannelKind
    tb_len: int = 0
    prb_count: int = 0
    prb_start: int = 0
    mcs: int = 0
    epre_db: float = 0.0
    snr_db: float = 0.0
    harq_ack: int = 0
    cce_index: int = 0
    aggregation_level: int = 0
    format_type: int = 0
    srs_bw_rb: int = 0
    ack_nack: int = 0

    def sort_key(self) -> tuple[int, int, int]:
        return (self.time.subframe_index, self.time.cell_slot.order,
                self.channel.order)

    def validate(self) -> None:
        if not channel_valid_in(self.channel, self.time.cell_slot):
            raise ValidationError(
                f"{self.channel.value} record in {self.time.cell_slot.value} slot")
        if self.tb_len < 0:
            raise ValidationError("tb_len must be non-negative")
        if self.tb_len > 0 and self.channel not in (ChannelKind.PDSCH,
                                                    ChannelKind.PUSCH):
            raise ValidationError(
                f"tb_len > 0 on non-data channel {self.channel.value}")
        if not 0 <= self.mcs <= 28:
            raise ValidationError(f"mcs {self.mcs} outside [0, 28]")
        if self.channel is ChannelKind.PDCCH:
            if self.aggregation_level not in (1, 2, 4, 8):
                raise ValidationError(
                    f"PDCCH aggregation_level {self.aggregation_level}")
        elif self.aggregation_level != 0 or self.cce_index != 0:
            raise ValidationError("cce/aggregation set on non-PDCCH record")
        if self.channel is not ChannelKind.PUCCH and self.format_type != 0:
            raise ValidationError("format_type set on non-PUCCH record")
        if self.channel is not ChannelKind.SRS and self.srs_bw_rb != 0:
            raise ValidationError("srs_bw_rb set on non-SRS record")
        if self.channel is not ChannelKind.PHICH and self.ack_nack != 0:
            raise ValidationError("ack_nack set on non-PHICH record")
        if self.harq_ack not in (0, 1) or self.ack_nack not in (0, 1):
            raise ValidationError("harq_ack/ack_nack must be 0 or 1")


@dataclass
class LabeledTrace:
    """Time-ordered records plus a per-frame class label."""

    records: list[ChannelRecord]
    labels: dict[int, int]
    seed: int
    duration_ms: int

    @property
    def n_frames(self) -> int:
        return self.duration_ms // 10

    def label_of_frame(self, frame: int) -> int:
        return self.labels[frame]


def validate_trace(trace: LabeledTrace) -> None:
    """Scan a full trace against the structural record invariants."""
    if trace.duration_ms <= 0 or trace.duration_ms % 10 != 0:
        raise ValidationError(f"duration_ms {trace.duration_ms} not a positive multiple of 10")
    if sorted(trace.labels) != list(range(trace.n_frames)):
        raise ValidationError("labels must cover every frame exactly once")
    last_key = None
    seen = set()
    for rec in trace.records:
        rec.validate()
        if rec.time.subframe_index >= trace.n_frames * SUBFRAMES_PER_FRAME:
            raise ValidationError(f"record at {rec.time} beyond trace end")
        key = rec.sort_key()
        if last_key is not None and key < last_key:
            raise ValidationError(f"records out of canonical order near {rec.time}")
        unit_key = (rec.time, rec.channel)
        if unit_key in seen:
            raise ValidationError(f"duplicate record for {rec.time} {rec.channel.value}")
        seen.add(unit_key)
        last_key = key


def default_profiles() -> tuple[TrafficProfile, TrafficProfile]:
    """The shipped (web navigation, video streaming) profile pair.

    Web is sparse and spiky: short bursts of heavy-tailed transport blocks
    separated by long gaps.  Video sustains long steady bursts at a
    moderately higher volume.  Channel duty cycles, SNR and EPRE baselines
    are deliberately identical, and the session-length rules keep the
    secondary field means matched, so the classes differ in distribution
    shape far more than in any per-position average.  Per-window volume
    ranges overlap as well; separating the classes cleanly takes more than
    a single threshold or a linear score.
    """
    web = TrafficProfile(
        label=0,
        burst_period_ms=340.0,
        burst_duration_ms=120.0,
        dl_tb_len_mean=3500.0, dl_tb_len_sd=2300.0,
        ul_tb_len_mean=650.0, ul_tb_len_sd=400.0,
        channel_occupancy={
            ChannelKind.PDSCH: 0.90, ChannelKind.PUSCH: 0.45,
            ChannelKind.PDCCH: 0.90, ChannelKind.PUCCH: 0.65,
            ChannelKind.SRS: 0.45, ChannelKind.PHICH: 0.35,
        },
        idle_occupancy={
            ChannelKind.PDSCH: 0.008, ChannelKind.PUSCH: 0.010,
            ChannelKind.PDCCH: 0.24, ChannelKind.PUCCH: 0.10,
            ChannelKind.SRS: 0.05, ChannelKind.PHICH: 0.07,
        },
        snr_mean_db=20.0, epre_mean_db=-92.0,
    )
    video = TrafficProfile(
        label=1,
        burst_period_ms=180.0,
        burst_duration_ms=900.0,
        dl_tb_len_mean=4200.0, dl_tb_len_sd=700.0,
        ul_tb_len_mean=800.0, ul_tb_len_sd=300.0,
        channel_occupancy={
            ChannelKind.PDSCH: 0.90, ChannelKind.PUSCH: 0.45,
            ChannelKind.PDCCH: 0.90, ChannelKind.PUCCH: 0.65,
            ChannelKind.SRS: 0.45, ChannelKind.PHICH: 0.35,
        },
        idle_occupancy={
            ChannelKind.PDSCH: 0.006, ChannelKind.PUSCH: 0.014,
            ChannelKind.PDCCH: 0.24, ChannelKind.PUCCH: 0.10,
            ChannelKind.SRS: 0.05, ChannelKind.PHICH: 0.07,
        },
        snr_mean_db=20.0, epre_mean_db=-92.0,
    )
    return web, video


def generate_trace(profile: TrafficProfile, duration_ms: int,
                   seed: int) -> LabeledTrace:
    """Generate one single-class trace; deterministic in (profile, duration, seed)."""
    _check_duration(duration_ms)
    rng = np.random.Generator(np.random.PCG64(seed))
    records = _generate_records(profile, duration_ms, rng, frame_offset=0)
    labels = {f: profile.label for f in range(duration_ms // 10)}
    return LabeledTrace(records=records, labels=labels, seed=seed,
                        duration_ms=duration_ms)


def generate_mixed_trace(profiles: list[tuple[TrafficProfile, int]],
                         seed: int) -> LabeledTrace:
    """Concatenate per-profile segments; labels switch at segment boundaries."""
    if not profiles:
        raise InputDomainError("profile list must not be empty")
    for _, segment_ms in profiles:
        _check_duration(segment_ms)
    children = np.random.SeedSequence(seed).spawn(len(profiles))
    records: list[ChannelRecord] = []
    labels: dict[int, int] = {}
    frame_offset = 0
    for (profile, segment_ms), child in zip(profiles, children):
        rng = np.random.Generator(np.random.PCG64(child))
        records.extend(_generate_records(profile, segment_ms, rng, frame_offset))
        for f in range(segment_ms // 10):
            labels[frame_offset + f] = profile.label
        frame_offset += segment_ms // 10
    return LabeledTrace(records=records, labels=labels, seed=seed,
                        duration_ms=frame_offset * 10)


def _check_duration(duration_ms: int) -> None:
    if duration_ms <= 0 or duration_ms % 10 != 0:
        raise InputDomainError(
            f"duration_ms must be a positive multiple of 10, got {duration_ms}")


def _generate_records(profile: TrafficProfile, duration_ms: int,
                      rng: np.random.Generator,
                      frame_offset: int) -> list[ChannelRecord]:
    n_sf = duration_ms  # one subframe per ms
    active, occ_scale = _activity_process(profile, n_sf, rng)
    drift = _quality_drift(n_sf, rng)

    records: list[ChannelRecord] = []
    for slot in CELL_SLOTS:
        for channel in channels_for(slot):
            p_occ = np.where(active,
                             profile.occupancy(channel, True),
                             profile.occupancy(channel, False))
            p_occ = np.clip(p_occ * occ_scale, 0.0, 1.0)
            occupied = np.nonzero(rng.random(n_sf) < p_occ)[0]
            if occupied.size == 0:
                continue
            records.extend(_emit_channel(profile, slot, channel, occupied,
                                         active[occupied], drift[occupied],
                                         rng, frame_offset))
    records.sort(key=ChannelRecord.sort_key)
    return records


def _activity_process(profile: TrafficProfile, n_sf: int,
                      rng: np.random.Generator
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Alternating burst/idle periods at 1 ms resolution.

    Traces start inside a burst so that short traces are never empty.
    Each period draws a private occupancy multiplier, modelling burst-to-
    burst load variation without touching per-record field distributions.
    """
    active = np.zeros(n_sf, dtype=bool)
    scale = np.zeros(n_sf, dtype=float)
    t = 0
    in_burst = True
    while t < n_sf:
        if in_burst:
            dur = rng.exponential(profile.burst_duration_ms)
            period_scale = rng.uniform(*_BURST_OCC_SCALE)
        else:
            dur = rng.exponential(profile.burst_period_ms)
            period_scale = rng.uniform(*_IDLE_OCC_SCALE)
        n = max(1, int(round(dur)))
        end = min(n_sf, t + n)
        active[t:end] = in_burst
        scale[t:end] = period_scale
        t = end
        in_burst = not in_burst
    return active, scale


def _quality_drift(n_sf: int, rng: np.random.Generator) -> np.ndarray:
    eps = rng.normal(0.0, _DRIFT_EPS_SD, n_sf)
    drift = np.empty(n_sf)
    level = 0.0
    for i in range(n_sf):
        level = _DRIFT_RHO * level + eps[i]
        drift[i] = level
    return drift


def _emit_channel(profile: TrafficProfile, slot: CellSlot,
                  channel: ChannelKind, sf_idx: np.ndarray,
                  active: np.ndarray, drift: np.ndarray,
                  rng: np.random.Generator,
                  frame_offset: int) -> list[ChannelRecord]:
    k = sf_idx.size
    snr = profile.snr_mean_db + drift + rng.normal(0.0, _SNR_SD, k)
    epre = profile.epre_mean_db + drift + rng.normal(0.0, _EPRE_SD, k)

    fields: dict[str, np.ndarray] = {}
    if channel in (ChannelKind.PDSCH, ChannelKind.PUSCH):
        if channel is ChannelKind.PDSCH:
            mean, sd = profile.dl_tb_len_mean, profile.dl_tb_len_sd
        else:
            mean, sd = profile.ul_tb_len_mean, profile.ul_tb_len_sd
        tb = np.rint(np.clip(rng.normal(mean, max(sd, 1.0), k), 0.0, None)
                     ).astype(np.int64)
        mcs = np.clip(np.rint(_MCS_PER_SNR_DB * snr + rng.normal(0, 1.5, k)),
                      0, 28).astype(np.int64)
        bytes_per_prb = 6.0 * (mcs + 3)
        prb = np.clip(np.rint(tb / bytes_per_prb + rng.normal(0, 1.5, k)),
                      1, _MAX_PRB).astype(np.int64)
        fields["tb_len"] = tb
        fields["prb_count"] = prb
        fields["prb_start"] = rng.integers(0, _MAX_PRB + 1 - prb)
        fields["mcs"] = mcs
        fields["harq_ack"] = (rng.random(k) < _sigmoid((snr - 12.0) / 4.0)
                              ).astype(np.int64)
    elif channel is ChannelKind.PDCCH:
        agg = np.select([snr < 14.0, snr < 18.0, snr < 22.0],
                        [8, 4, 2], default=1).astype(np.int64)
        persistent = active & (rng.random(k) < _persistence_rate(profile))
        pinned = rng.integers(0, 8, k)
        if _long_session(profile):
            dyn = rng.integers(39, 48, k)
        else:
            dyn = rng.integers(4, 39, k)
        scatter = rng.integers(0, 48, k)
        fields["aggregation_level"] = agg
        fields["cce_index"] = np.where(persistent, pinned,
                                       np.where(active, dyn, scatter))
        fields["prb_count"] = agg.copy()
    elif channel is ChannelKind.PUCCH:
        duty = profile.channel_occupancy.get(ChannelKind.PUCCH, 0.0)
        depth = (_PUCCH_COLD_DEPTH_LONG if _long_session(profile)
                 else _PUCCH_COLD_DEPTH_SHORT)
        p_cold = np.where(active, _PUCCH_COLD_RATE, _IDLE_COLD_RATE)
        cold = rng.random(k) < p_cold
        epre = (profile.epre_mean_db + _PUCCH_LOAD_EPRE_GAIN * duty
                + rng.normal(0.0, _PUCCH_PC_SD, k)
                + depth * (p_cold - cold))
        p_csi = np.where(active, _csi_rate(profile), _IDLE_CSI_RATE)
        csi = rng.random(k) < p_csi
        alt = rng.integers(0, 2, k)  # short ack (1) vs long aperiodic (3)
        fields["format_type"] = np.where(csi, 2, 1 + 2 * alt)
        fields["prb_count"] = np.ones(k, dtype=np.int64)
        fields["prb_start"] = rng.integers(0, 2, k) * (_MAX_PRB - 1)
    elif channel is ChannelKind.SRS:
        extreme = np.where(rng.integers(0, 2, k) == 1, 32, 4).astype(np.int64)
        mid = np.clip(np.rint(rng.normal(_SRS_MID_RB, _SRS_MID_SD, k)),
                      4, 32).astype(np.int64)
        prefer = rng.random(k) < _SRS_PATTERN_MIX
        if _long_session(profile):
            bw = np.where(prefer, mid, extreme)
        else:
            bw = np.where(prefer, extreme, mid)
        fields["srs_bw_rb"] = bw
        fields["prb_count"] = bw.copy()
        fields["prb_start"] = rng.integers(0, _MAX_PRB + 1 - bw)
    elif channel is ChannelKind.PHICH:
        fields["ack_nack"] = (rng.random(k) < _sigmoid((snr - 10.0) / 4.0)
                              ).astype(np.int64)
        fields["prb_count"] = np.ones(k, dtype=np.int64)

    fields["epre_db"] = epre
    fields["snr_db"] = snr

    out = []
    for i in range(k):
        sf = int(sf_idx[i])
        time = TimeIndex(frame=frame_offset + sf // SUBFRAMES_PER_FRAME,
                         subframe=sf % SUBFRAMES_PER_FRAME, cell_slot=slot)
        kwargs = {name: (float(col[i]) if name in ("epre_db", "snr_db")
                         else int(col[i]))
                  for name, col in fields.items()}
        out.append(ChannelRecord(time=time, channel=channel, **kwargs))
    return out


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))
