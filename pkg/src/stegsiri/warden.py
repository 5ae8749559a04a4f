"""Detectors for the covert channel and their ROC evaluation.

Two wardens are provided:

* a server-side text detector: an additive-smoothed token n-gram model of
  ordinary voice commands scores how surprising the recognized text is;
* a network-side traffic detector: how closely run durations sit on integer
  multiples of the symbol windows.
"""
from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import rankdata

from .carriermodel import PduTrace
from .errors import EmptyCorpus, EmptyInput, EmptyTrace
from .listener import DecoderParams, segment_runs

BOS = "<s>"
EOS = "</s>"
# keeps zero-probability events (alpha=0, unseen successor) finite: ~40 bits
PROB_FLOOR = 1e-12


@dataclass
class NgramModel:
    order: int
    alpha: float
    counts: dict[tuple[str, ...], Counter] = field(default_factory=dict)
    vocab: frozenset[str] = frozenset()

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def prob(self, token: str, context: Sequence[str]) -> float:
        ctx = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        succ = self.counts.get(ctx)
        total = sum(succ.values()) if succ else 0
        denom = total + self.alpha * self.vocab_size
        if denom == 0:
            return 1.0 / self.vocab_size
        c = succ.get(token, 0) if succ else 0
        return (c + self.alpha) / denom

    def padded(self, tokens: Sequence[str]) -> list[str]:
        return [BOS] * (self.order - 1) + list(tokens) + [EOS]

    def log2_prob(self, tokens: Sequence[str]) -> float:
        """Total log2 probability of ``tokens`` including the end marker."""
        seq = self.padded(tokens)
        h = self.order - 1
        return sum(math.log2(max(self.prob(seq[i], seq[i - h:i]), PROB_FLOOR))
                   for i in range(h, len(seq)))


def train_ngram(corpus: Iterable[Sequence[str] | str], order: int = 2, alpha: float = 1.0) -> NgramModel:
    """Count n-grams over sentences padded with ``<s>`` and ``</s>``.

    Sentences may be token lists or whitespace-separated strings. The
    vocabulary is every observed token plus ``</s>``; ``<s>`` is context only.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    sentences = [s.split() if isinstance(s, str) else list(s) for s in corpus]
    sentences = [s for s in sentences if s]
    if not sentences:
        raise EmptyCorpus("corpus has no tokens")
    counts: dict[tuple[str, ...], Counter] = defaultdict(Counter)
    vocab = {EOS}
    h = order - 1
    for sent in sentences:
        vocab.update(sent)
        seq = [BOS] * h + sent + [EOS]
        for i in range(h, len(seq)):
            counts[tuple(seq[i - h:i])][seq[i]] += 1
    return NgramModel(order=order, alpha=alpha, counts=dict(counts), vocab=frozenset(vocab))


def text_anomaly_score(tokens: Sequence[str], model: NgramModel) -> float:
    """Mean negative log2 probability per predicted token (end marker included)."""
    if len(tokens) == 0:
        raise EmptyInput("no tokens to score")
    return -model.log2_prob(tokens) / (len(tokens) + 1)


def traffic_regularity_score(trace: PduTrace, params: DecoderParams = DecoderParams()) -> float:
    """1 - 2 * mean quantization residual of run durations, in [0, 1].

    A residual is the distance of duration/window from the nearest integer,
    so runs lasting whole symbols score 1 and uniformly spread ones about 0.5.
    """
    if len(trace) == 0:
        raise EmptyTrace("trace has no PDUs")
    runs = segment_runs(trace, params)
    x = np.array([r.duration_s / params.window_for(r.kind) for r in runs])
    resid = np.abs(x - np.round(x))
    return float(np.clip(1.0 - 2.0 * resid.mean(), 0.0, 1.0))


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float


def evaluate_roc(covert_scores: Sequence[float], benign_scores: Sequence[float]) -> RocCurve:
    """ROC of the rule ``score >= threshold`` at every distinct score.

    The AUC is the Mann-Whitney statistic (ties count one half), which equals
    the trapezoidal area under the returned points.
    """
    pos = np.asarray(covert_scores, dtype=float)
    neg = np.asarray(benign_scores, dtype=float)
    if len(pos) == 0 or len(neg) == 0:
        raise EmptyInput("both score lists must be non-empty")
    ranks = rankdata(np.concatenate([pos, neg]))
    u = ranks[:len(pos)].sum() - len(pos) * (len(pos) + 1) / 2.0
    auc = float(u / (len(pos) * len(neg)))

    thr = np.unique(np.concatenate([pos, neg]))[::-1]
    tpr = np.array([(pos >= t).mean() for t in thr])
    fpr = np.array([(neg >= t).mean() for t in thr])
    return RocCurve(fpr=np.concatenate([[0.0], fpr]), tpr=np.concatenate([[0.0], tpr]),
                    thresholds=np.concatenate([[np.inf], thr]), auc=auc)


def percentile_threshold(benign_scores: Sequence[float], q: float = 95.0) -> float:
    if len(benign_scores) == 0:
        raise EmptyInput("calibration set is empty")
    return float(np.percentile(np.asarray(benign_scores, dtype=float), q))


@dataclass
class DetectionReport:
    method: str
    score: float
    threshold: float
    aux: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "Covert" if self.score > self.threshold else "Benign"

    def to_dict(self) -> dict:
        return {"method": self.method, "score": self.score, "threshold": self.threshold,
                "verdict": self.verdict}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def detect_text(tokens: Sequence[str], model: NgramModel, threshold: float) -> DetectionReport:
    return DetectionReport("TextAnomaly", text_anomaly_score(tokens, model), threshold,
                           {"tokens": len(tokens)})


def detect_traffic(trace: PduTrace, threshold: float,
                   params: DecoderParams = DecoderParams()) -> DetectionReport:
    return DetectionReport("TrafficRegularity", traffic_regularity_score(trace, params), threshold,
                           {"pdus": len(trace)})


def read_corpus(text: str) -> list[list[str]]:
    """One whitespace-tokenized sentence per line; blank lines skipped."""
    return [ln.split() for ln in text.splitlines() if ln.strip()]


def builtin_corpus() -> list[list[str]]:
    """A few hundred everyday voice-assistant commands."""
    text = resources.files("stegsiri").joinpath("data/commands.txt").read_text()
    return read_corpus(text)
