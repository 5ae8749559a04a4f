import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_payload
from stegsiri.carriermodel import ChannelProfile, PduTrace, synthesize_trace
from stegsiri.errors import EmptyTrace
from stegsiri.listener import (DecodeResult, DecoderParams, RunSegment, classify_pdu,
                               decode_trace, runs_to_bits, segment_runs)
from stegsiri.symbolcodec import (BitMapping, Segment, SymbolKind, SymbolSchedule,
                                  bits_to_schedule, frame_payload, payload_to_schedule)

V, S = SymbolKind.VOICE, SymbolKind.SILENCE


@pytest.mark.parametrize("size,kind", [(850, V), (400, S), (750, None), (900, V), (800, V),
                                       (700, S), (100, S), (99, None), (901, None)])
def test_classify_examples(size, kind):
    assert classify_pdu(size) == kind


@given(st.integers(1, 5000))
def test_classify_is_a_partition(size):
    p = DecoderParams()
    voice = p.talk_size_min <= size <= p.talk_size_max
    silence = p.silence_size_min <= size <= p.silence_size_max
    assert not (voice and silence)
    assert classify_pdu(size) == (V if voice else S if silence else None)


def test_decoder_params_validation():
    with pytest.raises(ValueError):
        DecoderParams(vote_margin=0.4)
    with pytest.raises(ValueError):
        DecoderParams(bin_s=0)
    assert DecoderParams().vote_weights.tolist() == [1, 2, 1]
    assert DecoderParams(vote_neighbors=0).vote_weights.tolist() == [1]


def test_two_runs_from_one_bit_pair():
    tr = synthesize_trace(bits_to_schedule("10"), seed=0)
    runs = segment_runs(tr)
    assert [r.kind for r in runs] == [V, S]
    assert runs[0].start_s == 0.0
    assert runs[0].end_s == pytest.approx(1.0, abs=0.1)
    assert runs[1].end_s == pytest.approx(3.0, abs=0.1)


def test_all_silence():
    tr = synthesize_trace(SymbolSchedule((Segment(S, 4.0),)))
    runs = segment_runs(tr)
    assert len(runs) == 1 and runs[0].kind is S
    assert runs[0].duration_s == pytest.approx(4.0)


def test_empty_trace():
    with pytest.raises(EmptyTrace):
        segment_runs(PduTrace())
    assert decode_trace(PduTrace()).status == "NoSignal"


def _run(kind, d):
    return RunSegment(kind, 0.0, d, int(round(d / 0.1)), 1.0)


def test_runs_to_bits_examples():
    r = [RunSegment(V, 0.0, 1.0, 10, 1.0), RunSegment(S, 1.0, 3.0, 20, 1.0)]
    assert runs_to_bits(r) == "10"
    assert runs_to_bits([_run(V, 2.0)]) == "11"
    assert runs_to_bits([_run(V, 1.4)]) == "1"
    assert runs_to_bits([_run(V, 1.6)]) == "11"
    assert runs_to_bits([_run(V, 0.2)]) == "1"  # at least one symbol per run
    assert runs_to_bits([_run(S, 4.9)]) == "00"
    assert runs_to_bits(r, mapping=BitMapping().swapped()) == "01"


def test_rounding_rule_on_jittered_runs():
    # n voice symbols between silences; count recovered from the middle run
    hits = total = 0
    for seed in range(120):
        n = 1 + seed % 3
        bits = "0" + "1" * n + "0"
        tr = synthesize_trace(bits_to_schedule(bits), ChannelProfile(jitter_std_s=0.05), seed=seed)
        got = runs_to_bits(segment_runs(tr))
        voice = [len(x) for x in got.split("0") if x]
        hits += voice == [n]
        total += 1
    assert hits / total >= 0.95


@given(st.binary(min_size=0, max_size=40), st.integers(0, 2**31))
@settings(max_examples=60)
def test_zero_noise_identity(payload, seed):
    r = decode_trace(synthesize_trace(payload_to_schedule(payload), seed=seed))
    assert r.status == "Ok"
    assert r.payload == payload
    assert r.bits == frame_payload(payload)


def test_zero_noise_identity_inverted_mapping():
    m = BitMapping().swapped()
    p = b"inverted"
    r = decode_trace(synthesize_trace(payload_to_schedule(p, mapping=m), seed=1), mapping=m)
    assert r.ok and r.payload == p


def test_identity_long_payloads():
    rng = np.random.default_rng(2)
    for k in range(200):
        p = bytes(rng.integers(0, 256, int(rng.integers(0, 256))).tolist())
        r = decode_trace(synthesize_trace(payload_to_schedule(p), seed=k))
        assert r.ok and r.payload == p


def test_determinism():
    tr = synthesize_trace(payload_to_schedule(b"xyz"), ChannelProfile(jitter_std_s=0.1), seed=5)
    assert decode_trace(tr).to_json() == decode_trace(tr).to_json()


def test_unknown_pdus_abstain():
    tr = synthesize_trace(payload_to_schedule(b"\x5a"), seed=0)
    times = np.concatenate([tr.times, [0.55, 10.05]])
    sizes = np.concatenate([tr.sizes, [750, 760]])
    order = np.argsort(times, kind="stable")
    noisy = PduTrace(times[order], sizes[order])
    assert decode_trace(noisy).payload == b"\x5a"


def test_lossy_channel_never_silently_wrong():
    wrong = 0
    for seed in range(300):
        p = bytes([seed % 256])
        r = decode_trace(synthesize_trace(payload_to_schedule(p), ChannelProfile(loss_prob=0.5),
                                          seed=seed))
        assert r.ok == (r.payload is not None)
        wrong += r.ok and r.payload != p
    assert wrong <= 5


def test_decode_result_json_schema():
    r = decode_trace(synthesize_trace(payload_to_schedule(b"A"), seed=0))
    d = r.to_dict()
    assert set(d) == {"status", "bits", "payload_hex", "confidence", "runs"}
    assert d["payload_hex"] == "41"
    assert set(d["runs"][0]) == {"kind", "start", "end"}
    assert 0.0 <= d["confidence"] <= 1.0
    failed = DecodeResult(status="NoPreamble", bits="000")
    assert failed.to_dict()["payload_hex"] is None


def test_confidence_drops_with_jitter():
    def mean_conf(j):
        out = []
        for seed in range(30):
            p = random_payload(np.random.default_rng(seed), 8, 8)
            tr = synthesize_trace(payload_to_schedule(p), ChannelProfile(jitter_std_s=j), seed)
            out.append(decode_trace(tr).confidence)
        return np.mean(out)
    assert mean_conf(0.0) > mean_conf(0.3)


def test_per_bin_vote_without_pooling_still_round_trips():
    p = DecoderParams(vote_neighbors=0)
    r = decode_trace(synthesize_trace(payload_to_schedule(b"plain"), seed=3), p)
    assert r.ok and r.payload == b"plain"
