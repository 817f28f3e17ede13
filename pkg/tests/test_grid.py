"""Time axis and channel placement rules of the dual-cell grid."""
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phytraffic.errors import InputDomainError
from phytraffic.grid import (CELL_SLOTS, CHANNEL_ORDER, LTE_NUMEROLOGY,
                             NR_NUMEROLOGY, SUBFRAMES_PER_FRAME, CellSlot,
                             ChannelKind, TimeIndex, channel_valid_in,
                             channels_for, time_units_of_subframe)


def test_start_ms_examples():
    assert TimeIndex(0, 0, CellSlot.LTE).start_ms == 0.0
    assert TimeIndex(0, 0, CellSlot.NR1).start_ms == 0.0
    assert TimeIndex(0, 0, CellSlot.NR2).start_ms == 0.5
    assert TimeIndex(1, 3, CellSlot.LTE).start_ms == 13.0
    assert TimeIndex(1, 3, CellSlot.NR1).start_ms == 13.0
    assert TimeIndex(1, 3, CellSlot.NR2).start_ms == 13.5


def test_unit_durations():
    assert TimeIndex(0, 0, CellSlot.LTE).duration_ms == 1.0
    assert TimeIndex(0, 0, CellSlot.NR1).duration_ms == 0.5
    assert TimeIndex(0, 0, CellSlot.NR2).duration_ms == 0.5


@pytest.mark.parametrize("frame,subframe", [(-1, 0), (0, -1), (0, 10), (2, 17)])
def test_out_of_range_position_rejected(frame, subframe):
    with pytest.raises(InputDomainError):
        TimeIndex(frame, subframe, CellSlot.LTE)


@given(st.integers(0, 10_000), st.integers(0, 9))
def test_nr_units_tile_the_subframe(frame, subframe):
    units = time_units_of_subframe(frame, subframe)
    assert [u.cell_slot for u in units] == list(CELL_SLOTS)
    assert all(u.subframe_index == 10 * frame + subframe for u in units)
    lte, nr1, nr2 = units
    assert nr1.start_ms == lte.start_ms
    assert nr2.start_ms == nr1.start_ms + nr1.duration_ms
    assert nr2.start_ms + nr2.duration_ms == lte.start_ms + lte.duration_ms


def test_sort_key_is_slot_stable():
    keys = [u.sort_key() for u in time_units_of_subframe(4, 7)]
    assert keys == sorted(keys)
    later = TimeIndex(4, 8, CellSlot.LTE).sort_key()
    assert all(k < later for k in keys)


def test_channel_sets_per_slot():
    assert channels_for(CellSlot.LTE) == list(CHANNEL_ORDER)
    for slot in (CellSlot.NR1, CellSlot.NR2):
        chans = channels_for(slot)
        assert ChannelKind.PHICH not in chans
        assert len(chans) == 5
    assert channel_valid_in(ChannelKind.PHICH, CellSlot.LTE)
    assert not channel_valid_in(ChannelKind.PHICH, CellSlot.NR1)
    assert channel_valid_in(ChannelKind.PDSCH, CellSlot.NR2)


def test_numerologies_share_rb_shape():
    assert LTE_NUMEROLOGY.res_elements_per_rb == 12 * 14
    assert NR_NUMEROLOGY.res_elements_per_rb == 12 * 14
    assert LTE_NUMEROLOGY.time_unit_ms == 2 * NR_NUMEROLOGY.time_unit_ms


def test_frame_constants():
    assert SUBFRAMES_PER_FRAME == 10
    assert TimeIndex(2, 0, CellSlot.LTE).start_ms == 20.0
