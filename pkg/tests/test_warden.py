import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import trapezoid

from stegsiri.carriermodel import (NaturalUsageParams, PduTrace, generate_natural_trace,
                                   natural_schedule, simulate_recognition, synthesize_trace)
from stegsiri.errors import EmptyCorpus, EmptyInput, EmptyTrace
from stegsiri.symbolcodec import Segment, SymbolKind, SymbolSchedule, payload_to_schedule
from stegsiri.warden import (EOS, DetectionReport, builtin_corpus, detect_traffic, evaluate_roc,
                             percentile_threshold, read_corpus, text_anomaly_score,
                             traffic_regularity_score, train_ngram)


def brute_auc(pos, neg):
    wins = sum((p > n) + 0.5 * (p == n) for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


# ----------------------------------------------------------------- n-grams

def test_additive_smoothing_example():
    m = train_ngram(["a b", "a b"], order=2, alpha=1.0)
    assert m.vocab == {"a", "b", EOS}
    # c(a b) = 2, c(a .) = 2, V = 3
    assert m.prob("b", ["a"]) == pytest.approx((2 + 1) / (2 + 3))
    assert m.prob("a", ["a"]) == pytest.approx(1 / 5)


def test_unsmoothed_single_successor():
    m = train_ngram(["a b"], order=2, alpha=0.0)
    assert m.prob("b", ["a"]) == 1.0
    assert m.prob("a", ["a"]) == 0.0


def test_empty_corpus():
    with pytest.raises(EmptyCorpus):
        train_ngram([])
    with pytest.raises(EmptyCorpus):
        train_ngram(["", "   "])


@pytest.mark.parametrize("order,alpha", [(1, 1.0), (2, 1.0), (2, 0.1), (3, 0.5), (2, 0.0)])
def test_probabilities_sum_to_one(order, alpha):
    m = train_ngram(builtin_corpus()[:150], order=order, alpha=alpha)
    for ctx in list(m.counts)[:60]:
        total = sum(m.prob(w, ctx) for w in m.vocab)
        assert total == pytest.approx(1.0, abs=1e-9)
    # an unseen context falls back to uniform
    assert sum(m.prob(w, ("zzz",) * (order - 1)) for w in m.vocab) == pytest.approx(1.0)


def _toy_corpus():
    rng = np.random.default_rng(0)
    subj = ["call", "text", "email"]
    obj = ["mom", "dad", "alex", "the office"]
    return [f"{rng.choice(subj)} {rng.choice(obj)} now" for _ in range(100)]


def test_training_sentence_beats_random_sequence():
    corpus = _toy_corpus()
    m = train_ngram(corpus)
    vocab = sorted(m.vocab - {EOS})
    rng = np.random.default_rng(1)
    for sent in corpus[:20]:
        toks = sent.split()
        rand = list(rng.choice(vocab, size=len(toks)))
        assert text_anomaly_score(toks, m) <= text_anomaly_score(rand, m)


def test_empty_input():
    m = train_ngram(["a b"])
    with pytest.raises(EmptyInput):
        text_anomaly_score([], m)


def test_score_is_mean_neg_log2():
    m = train_ngram(["a b", "a b"])
    expected = -(math.log2(m.prob("a", ["<s>"])) + math.log2(m.prob("b", ["a"]))
                 + math.log2(m.prob(EOS, ["b"]))) / 3
    assert text_anomaly_score(["a", "b"], m) == pytest.approx(expected)


def test_scrambling_lowers_probability_on_average():
    corpus = builtin_corpus()
    m = train_ngram(corpus)
    rng = np.random.default_rng(3)
    checked = 0
    for sent in corpus:
        if len(set(sent)) < 3:
            continue
        orig = m.log2_prob(sent)
        scrambled = [m.log2_prob(list(rng.permutation(sent))) for _ in range(100)]
        assert np.mean(scrambled) <= orig
        checked += 1
        if checked == 20:
            break


def test_covert_text_stands_out():
    corpus = builtin_corpus()
    m = train_ngram(corpus)
    lexicon = [w for s in corpus for w in s]
    natural = []
    for seed in range(200):
        toks = simulate_recognition(natural_schedule(NaturalUsageParams(), seed), "natural",
                                    lexicon, seed=seed)
        natural.append(text_anomaly_score(toks, m))
    p95 = np.percentile(natural, 95)
    covert = simulate_recognition(payload_to_schedule(b"\x12\x34\x56\x78\x90\x12\x34\x56"))
    assert text_anomaly_score(covert, m) > p95


def test_read_corpus():
    assert read_corpus("call mom\n\n  play  jazz \n") == [["call", "mom"], ["play", "jazz"]]


# ------------------------------------------------------------ traffic shape

def test_single_whole_second_run_scores_one():
    tr = synthesize_trace(SymbolSchedule((Segment(SymbolKind.VOICE, 1.0),)))
    assert traffic_regularity_score(tr) == 1.0


def test_empty_trace():
    with pytest.raises(EmptyTrace):
        traffic_regularity_score(PduTrace())


def test_covert_traces_are_regular():
    rng = np.random.default_rng(4)
    for k in range(50):
        p = bytes(rng.integers(0, 256, int(rng.integers(1, 17))).tolist())
        assert traffic_regularity_score(synthesize_trace(payload_to_schedule(p), seed=k)) >= 0.95


def test_natural_traces_less_regular():
    cov, nat = [], []
    rng = np.random.default_rng(5)
    for k in range(100):
        p = bytes(rng.integers(0, 256, 8).tolist())
        cov.append(traffic_regularity_score(synthesize_trace(payload_to_schedule(p), seed=k)))
        nat.append(traffic_regularity_score(generate_natural_trace(seed=k)))
    assert np.mean(cov) - np.mean(nat) >= 0.15


@given(st.lists(st.tuples(st.booleans(), st.floats(0.05, 6.0)), min_size=1, max_size=15),
       st.integers(0, 1000))
def test_regularity_in_unit_interval(segs, seed):
    s = SymbolSchedule(tuple(Segment(SymbolKind.VOICE if v else SymbolKind.SILENCE, d)
                             for v, d in segs))
    tr = synthesize_trace(s, seed=seed)
    if len(tr):
        assert 0.0 <= traffic_regularity_score(tr) <= 1.0


# --------------------------------------------------------------------- ROC

def test_roc_identical_distributions():
    x = np.random.default_rng(0).normal(size=300)
    y = np.random.default_rng(1).normal(size=300)
    assert evaluate_roc(x, y).auc == pytest.approx(0.5, abs=0.06)
    assert evaluate_roc([1, 2, 3], [1, 2, 3]).auc == pytest.approx(0.5)


def test_roc_perfect_separation():
    r = evaluate_roc([5, 6, 7], [1, 2])
    assert r.auc == 1.0
    assert r.tpr[-1] == 1.0 and r.fpr[-1] == 1.0


def test_roc_empty():
    with pytest.raises(EmptyInput):
        evaluate_roc([], [1.0])


@given(st.lists(st.integers(0, 10), min_size=1, max_size=30),
       st.lists(st.integers(0, 10), min_size=1, max_size=30))
def test_auc_matches_pairwise_oracle_and_trapezoid(pos, neg):
    r = evaluate_roc(pos, neg)
    assert r.auc == pytest.approx(brute_auc(pos, neg))
    assert trapezoid(r.tpr, r.fpr) == pytest.approx(r.auc)
    assert len(r.thresholds) == len(set(pos) | set(neg)) + 1


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=30),
       st.lists(st.integers(-50, 50), min_size=1, max_size=30))
def test_auc_invariant_under_monotone_transform(pos, neg):
    pos, neg = np.array(pos) / 10, np.array(neg) / 10
    a = evaluate_roc(pos, neg).auc
    b = evaluate_roc(np.exp(pos) * 3 + 1, np.exp(neg) * 3 + 1).auc
    assert a == pytest.approx(b)


# ------------------------------------------------------------------ reports

def test_report_verdict_and_json():
    r = DetectionReport("TrafficRegularity", 0.9, 0.8)
    assert r.verdict == "Covert"
    assert DetectionReport("TrafficRegularity", 0.8, 0.8).verdict == "Benign"
    assert set(r.to_dict()) == {"method", "score", "threshold", "verdict"}


def test_detect_traffic_and_threshold():
    nat = [traffic_regularity_score(generate_natural_trace(seed=k)) for k in range(40)]
    thr = percentile_threshold(nat)
    assert thr == pytest.approx(np.percentile(nat, 95))
    cov = synthesize_trace(payload_to_schedule(b"leak"), seed=1)
    assert detect_traffic(cov, thr).verdict == "Covert"
