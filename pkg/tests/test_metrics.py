import pytest
from hypothesis import given, strategies as st

from stegsiri.errors import ZeroDuration
from stegsiri.metrics import (CSV_HEADER, ChannelMetrics, ber, card_airtime_stats,
                              frame_duration, goodput)
from stegsiri.symbolcodec import bits_to_schedule, encode_digits, frame_payload, schedule_duration

bitstr = st.text("01", max_size=64)


def test_ber_examples():
    assert ber("1010", "1010") == 0.0
    assert ber("1010", "1110") == 0.25
    assert ber("1010", "10") == 0.5
    assert ber("", "") == 0.0


@given(bitstr, bitstr)
def test_ber_symmetric_and_bounded(a, b):
    assert ber(a, b) == ber(b, a)
    assert 0.0 <= ber(a, b) <= 1.0
    assert ber(a, a) == 0.0


@given(st.integers(1, 40).flatmap(lambda n: st.tuples(*[st.text("01", min_size=n, max_size=n)] * 3)))
def test_ber_triangle_for_equal_lengths(xyz):
    x, y, z = xyz
    assert ber(x, z) <= ber(x, y) + ber(y, z) + 1e-12


def test_goodput_examples():
    assert goodput(0, 10.0) == 0.0
    assert goodput(60, 120.0) == 0.5
    with pytest.raises(ZeroDuration):
        goodput(1, 0.0)


def test_card_goodput_from_closed_form():
    bits = frame_payload(encode_digits("1234567890123456"))
    d = frame_duration(bits)
    assert d == schedule_duration(bits_to_schedule(bits))
    assert goodput(8, 132.0) == pytest.approx(0.0606, abs=1e-4)
    assert goodput(8, d) == pytest.approx(8 / d)


def test_card_airtime_stats():
    st_ = card_airtime_stats(n=300, seed=1)
    assert st_["frame_bits"] == 88
    assert 88 <= st_["min_s"] <= st_["mean_s"] <= st_["max_s"] <= 176
    assert st_["goodput_Bps"] < 0.1
    ascii_ = card_airtime_stats(n=50, seed=1, mode="ascii")
    assert ascii_["frame_bits"] == 152


def test_metrics_csv_row():
    m = ChannelMetrics(8, 132.0, 0.0, 8 / 132, 88 / 132)
    assert CSV_HEADER == ("payload_len", "elapsed_s", "ber", "goodput_Bps", "symbol_rate_sps")
    assert m.csv_row().split(",")[:3] == ["8", "132.0", "0.0"]
