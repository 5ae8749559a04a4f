"""Passive covert receiver.

Decoding runs in four stages:

1. classify every PDU by size (voice / silence / unknown);
2. assign each PDU to the nearest multiple of ``bin_s`` (so a PDU emitted at
   ``k * bin_s`` stays in bin k under small jitter) and let each bin vote for
   the majority class of the PDUs in it and its ``vote_neighbors`` neighbours
   on each side, weighted binomially ([1, 2, 1] by default). Empty bins vote
   silence, ties go to voice, and bins whose majority is below
   ``vote_margin`` keep the previous bin's decision;
3. fuse equal bins into runs and dissolve runs shorter than
   ``min_run_bins`` (shortest first) into their neighbours;
4. quantize each run by its decision window (``voice_window_s`` or
   ``silence_window_s``) into symbol counts, then deframe.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._accel import EPS, SILENCE, UNKNOWN, VOICE, kernels
from .carriermodel import PduTrace
from .errors import EmptyTrace, FramingError
from .symbolcodec import BitMapping, SymbolKind, deframe_bits

_KIND_OF = {VOICE: SymbolKind.VOICE, SILENCE: SymbolKind.SILENCE}


@dataclass(frozen=True)
class DecoderParams:
    talk_size_min: int = 800
    talk_size_max: int = 900
    silence_size_min: int = 100
    silence_size_max: int = 700
    bin_s: float = 0.1
    voice_window_s: float = 1.0
    silence_window_s: float = 2.0
    vote_margin: float = 0.6
    min_run_bins: int = 3
    vote_neighbors: int = 1

    def __post_init__(self):
        if not self.bin_s > 0:
            raise ValueError("bin_s must be positive")
        if not (self.voice_window_s > 0 and self.silence_window_s > 0):
            raise ValueError("decision windows must be positive")
        if not 0.5 <= self.vote_margin <= 1.0:
            raise ValueError("vote_margin must lie in [0.5, 1.0]")
        if self.vote_neighbors < 0:
            raise ValueError("vote_neighbors must be non-negative")
        if self.min_run_bins < 1:
            raise ValueError("min_run_bins must be at least 1")
        if not (0 < self.silence_size_min <= self.silence_size_max < self.talk_size_min
                <= self.talk_size_max):
            raise ValueError("size ranges must be ordered and disjoint")

    @property
    def vote_weights(self) -> np.ndarray:
        n = 2 * self.vote_neighbors
        return np.array([math.comb(n, k) for k in range(n + 1)], dtype=np.int64)

    def window_for(self, kind: SymbolKind) -> float:
        return self.voice_window_s if kind is SymbolKind.VOICE else self.silence_window_s


@dataclass(frozen=True)
class RunSegment:
    kind: SymbolKind
    start_s: float
    end_s: float
    bin_count: int
    mean_margin: float

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass
class DecodeResult:
    status: str
    bits: str = ""
    runs: list[RunSegment] = field(default_factory=list)
    payload: Optional[bytes] = None
    confidence: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "Ok"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "bits": self.bits,
            "payload_hex": self.payload.hex() if self.payload is not None else None,
            "confidence": self.confidence,
            "runs": [{"kind": r.kind.value, "start": r.start_s, "end": r.end_s} for r in self.runs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def classify_pdu(size: int, params: DecoderParams = DecoderParams()) -> Optional[SymbolKind]:
    """Voice, Silence, or ``None`` for sizes outside both (inclusive) ranges."""
    if params.talk_size_min <= size <= params.talk_size_max:
        return SymbolKind.VOICE
    if params.silence_size_min <= size <= params.silence_size_max:
        return SymbolKind.SILENCE
    return None


def classify_sizes(sizes: np.ndarray, params: DecoderParams = DecoderParams()) -> np.ndarray:
    """Vectorized :func:`classify_pdu`: 1 voice, 0 silence, -1 unknown."""
    return kernels.classify(np.asarray(sizes, dtype=np.int64), params.talk_size_min,
                            params.talk_size_max, params.silence_size_min,
                            params.silence_size_max)


def _trace_end(times: np.ndarray, classes: np.ndarray, bin_s: float) -> float:
    # The last PDU opens an emission interval of its own class; estimate that
    # interval as the median gap between consecutive PDUs of the class.
    known = classes != UNKNOWN
    if not known.any():
        return float(times[-1]) + bin_s
    last_cls = classes[known][-1]
    t = times[classes == last_cls]
    gaps = np.diff(t)
    gaps = gaps[gaps > 0]
    tail = float(np.median(gaps)) if len(gaps) else bin_s
    return float(times[-1]) + tail


def segment_runs(trace: PduTrace, params: DecoderParams = DecoderParams()) -> list[RunSegment]:
    if len(trace) == 0:
        raise EmptyTrace("trace has no PDUs")
    classes = classify_sizes(trace.sizes, params)
    t_end = _trace_end(trace.times, classes, params.bin_s)
    n_bins = max(1, math.ceil(t_end / params.bin_s - 1e-6))
    voice, silence = kernels.bin_votes(trace.times, classes, n_bins, params.bin_s)
    if params.vote_neighbors:
        voice, silence = kernels.pool_votes(voice, silence, params.vote_weights)
    bin_kinds, _ = kernels.decide_bins(voice, silence, params.vote_margin)
    run_kinds, run_lens = kernels.merge_short_runs(bin_kinds, params.min_run_bins)

    total = voice + silence
    runs = []
    first = 0
    for k, n in zip(run_kinds, run_lens):
        sl = slice(first, first + int(n))
        agree = voice[sl] if k == VOICE else silence[sl]
        m = np.where(total[sl] > 0, agree / np.maximum(total[sl], 1), 1.0)
        runs.append(RunSegment(_KIND_OF[int(k)], round(first * params.bin_s, 9),
                               round((first + int(n)) * params.bin_s, 9), int(n),
                               float(m.mean())))
        first += int(n)
    return runs


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5 + EPS))


def runs_to_bits(runs: list[RunSegment], params: DecoderParams = DecoderParams(),
                 mapping: BitMapping = BitMapping()) -> str:
    out = []
    for r in runs:
        n = max(1, _round_half_up(r.duration_s / params.window_for(r.kind)))
        out.append(mapping.bit_for(r.kind) * n)
    return "".join(out)


def decode_trace(trace: PduTrace, params: DecoderParams = DecoderParams(),
                 mapping: BitMapping = BitMapping()) -> DecodeResult:
    """Full receive chain. Failures are reported through ``status``."""
    try:
        runs = segment_runs(trace, params)
    except EmptyTrace:
        return DecodeResult(status="NoSignal")
    bits = runs_to_bits(runs, params, mapping)
    confidence = float(np.mean([r.mean_margin for r in runs])) if runs else 0.0
    try:
        payload = deframe_bits(bits)
    except FramingError as exc:
        return DecodeResult(status=exc.status, bits=bits, runs=runs, confidence=confidence)
    return DecodeResult(status="Ok", bits=bits, runs=runs, payload=payload, confidence=confidence)
