"""Time/frequency resource model for one 5G NSA carrier pair.

A 10 ms frame splits into ten 1 ms subframes.  Each subframe holds three
cell time units: the full-subframe LTE unit and the two half-subframe NR
units.  Everything downstream (record validation, feature layout, window
arithmetic) indexes against this module.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import InputDomainError

SUBFRAMES_PER_FRAME = 10
FRAME_MS = 10.0
SUBFRAME_MS = 1.0


@dataclass(frozen=True)
class Numerology:
    """Subcarrier/time geometry of one cell's resource blocks."""

    scs_khz: int
    symbols_per_time_unit: int
    subcarriers_per_rb: int
    time_unit_ms: float

    @property
    def res_elements_per_rb(self) -> int:
        return self.symbols_per_time_unit * self.subcarriers_per_rb


# LTE: 15 kHz SCS, an RB spans the two 7-symbol slots of a 1 ms subframe.
# NR (mu=1): 30 kHz SCS, 14 symbols in a 0.5 ms unit.  Both are 12x14 REs.
LTE_NUMEROLOGY = Numerology(scs_khz=15, symbols_per_time_unit=14,
                            subcarriers_per_rb=12, time_unit_ms=1.0)
NR_NUMEROLOGY = Numerology(scs_khz=30, symbols_per_time_unit=14,
                           subcarriers_per_rb=12, time_unit_ms=0.5)


class CellSlot(Enum):
    """Per-subframe time-unit position: LTE unit, first/second NR unit."""

    LTE = "LTE"
    NR1 = "NR1"
    NR2 = "NR2"

    @property
    def numerology(self) -> Numerology:
        return LTE_NUMEROLOGY if self is CellSlot.LTE else NR_NUMEROLOGY

    @property
    def offset_ms(self) -> float:
        """Start offset of this unit inside its subframe."""
        return 0.5 if self is CellSlot.NR2 else 0.0

    @property
    def order(self) -> int:
        return _SLOT_ORDER[self]


CELL_SLOTS: tuple[CellSlot, ...] = (CellSlot.LTE, CellSlot.NR1, CellSlot.NR2)
_SLOT_ORDER = {slot: i for i, slot in enumerate(CELL_SLOTS)}


class ChannelKind(Enum):
    """The six physical channels carried by the toolkit."""

    PDSCH = "PDSCH"
    PUSCH = "PUSCH"
    PDCCH = "PDCCH"
    PUCCH = "PUCCH"
    SRS = "SRS"
    PHICH = "PHICH"

    @property
    def order(self) -> int:
        return _CHANNEL_ORDER[self]


# Canonical channel order; PHICH exists on the LTE cell only.
CHANNEL_ORDER: tuple[ChannelKind, ...] = (
    ChannelKind.PDSCH, ChannelKind.PUSCH, ChannelKind.PDCCH,
    ChannelKind.PUCCH, ChannelKind.SRS, ChannelKind.PHICH,
)
_CHANNEL_ORDER = {ch: i for i, ch in enumerate(CHANNEL_ORDER)}
NR_CHANNELS: tuple[ChannelKind, ...] = tuple(
    ch for ch in CHANNEL_ORDER if ch is not ChannelKind.PHICH)


@dataclass(frozen=True)
class TimeIndex:
    """Position of one cell time unit on the absolute time axis."""

    frame: int
    subframe: int
    cell_slot: CellSlot

    def __post_init__(self) -> None:
        if self.frame < 0:
            raise InputDomainError(f"frame must be non-negative, got {self.frame}")
        if not 0 <= self.subframe < SUBFRAMES_PER_FRAME:
            raise InputDomainError(
                f"subframe must be in [0, {SUBFRAMES_PER_FRAME - 1}], got {self.subframe}")

    @property
    def start_ms(self) -> float:
        return FRAME_MS * self.frame + SUBFRAME_MS * self.subframe + self.cell_slot.offset_ms

    @property
    def duration_ms(self) -> float:
        return self.cell_slot.numerology.time_unit_ms

    @property
    def subframe_index(self) -> int:
        """Global subframe counter (frame * 10 + subframe)."""
        return SUBFRAMES_PER_FRAME * self.frame + self.subframe

    def sort_key(self) -> tuple[int, int]:
        return (self.subframe_index, self.cell_slot.order)


def time_units_of_subframe(frame: int, subframe: int) -> list[TimeIndex]:
    """The three time units of one subframe, in [LTE, NR1, NR2] order."""
    if frame < 0:
        raise InputDomainError(f"frame must be non-negative, got {frame}")
    if not 0 <= subframe < SUBFRAMES_PER_FRAME:
        raise InputDomainError(
            f"subframe must be in [0, {SUBFRAMES_PER_FRAME - 1}], got {subframe}")
    return [TimeIndex(frame, subframe, slot) for slot in CELL_SLOTS]


def channels_for(slot: CellSlot) -> list[ChannelKind]:
    """Channels present in a cell slot, in canonical order."""
    if slot is CellSlot.LTE:
        return list(CHANNEL_ORDER)
    return list(NR_CHANNELS)


def channel_valid_in(channel: ChannelKind, slot: CellSlot) -> bool:
    return channel is not ChannelKind.PHICH or slot is CellSlot.LTE
