"""Synthetic Siri-like uplink traffic.

Voice produces 800-900 byte PDUs, silence produces sparser 100-700 byte
PDUs (the stream never goes quiet). Channel impairments are applied in a
fixed order: timestamp jitter, independent loss, then spurious insertions.
All randomness comes from a ``numpy.random.Generator`` seeded per call.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from ._accel import kernels
from .errors import EmptyLexicon
from .symbolcodec import Segment, SymbolKind, SymbolSchedule

# timestamps are quantized to 1 us, like a pcap
TIME_DECIMALS = 6

COVERT_TOKEN = "call"
SECONDS_PER_TOKEN = 0.4


@dataclass(frozen=True)
class ChannelProfile:
    talk_size_min: int = 800
    talk_size_max: int = 900
    silence_size_min: int = 100
    silence_size_max: int = 700
    talk_pdu_interval_s: float = 0.1
    silence_pdu_interval_s: float = 0.25
    jitter_std_s: float = 0.0
    loss_prob: float = 0.0
    spurious_pdu_rate_hz: float = 0.0
    vad_hangover_s: float = 0.0

    def __post_init__(self):
        if not 0 < self.silence_size_min <= self.silence_size_max:
            raise ValueError("invalid silence size range")
        if not self.talk_size_min <= self.talk_size_max:
            raise ValueError("invalid talk size range")
        if not self.silence_size_max < self.talk_size_min:
            raise ValueError("silence and talk size ranges must be disjoint, silence below talk")
        if not (self.talk_pdu_interval_s > 0 and self.silence_pdu_interval_s > 0):
            raise ValueError("PDU intervals must be positive")
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError("loss_prob must lie in [0, 1]")
        if self.jitter_std_s < 0 or self.spurious_pdu_rate_hz < 0 or self.vad_hangover_s < 0:
            raise ValueError("jitter, spurious rate and hangover must be non-negative")


@dataclass(frozen=True)
class NaturalUsageParams:
    mean_talk_s: float = 2.5
    mean_pause_s: float = 1.2
    sigma: float = 0.5
    session_duration_s: float = 60.0

    def __post_init__(self):
        if not (self.mean_talk_s > 0 and self.mean_pause_s > 0):
            raise ValueError("mean talk and pause durations must be positive")
        if self.sigma < 0 or self.session_duration_s < 0:
            raise ValueError("sigma and session duration must be non-negative")


@dataclass(frozen=True)
class PduRecord:
    t_s: float
    size: int


class PduTrace:
    """Time-sorted PDU records held as two parallel numpy arrays."""

    def __init__(self, times: Sequence[float] = (), sizes: Sequence[int] = ()):
        t = np.asarray(times, dtype=np.float64).reshape(-1)
        s = np.asarray(sizes, dtype=np.int64).reshape(-1)
        if t.shape != s.shape:
            raise ValueError("times and sizes must have equal length")
        if len(t) and (t.min() < 0 or np.any(np.diff(t) < 0)):
            raise ValueError("timestamps must be non-negative and non-decreasing")
        if len(s) and s.min() <= 0:
            raise ValueError("PDU sizes must be positive")
        self.times = t
        self.sizes = s

    @classmethod
    def from_records(cls, records: Iterable[PduRecord]) -> "PduTrace":
        recs = list(records)
        return cls([r.t_s for r in recs], [r.size for r in recs])

    @property
    def records(self) -> list[PduRecord]:
        return [PduRecord(float(t), int(s)) for t, s in zip(self.times, self.sizes)]

    def __len__(self):
        return len(self.times)

    def __eq__(self, other):
        if not isinstance(other, PduTrace):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(self.sizes, other.sizes)

    def __repr__(self):
        return f"PduTrace(n={len(self)}, span={self.times[-1] if len(self) else 0.0:.3f}s)"

    # -- serialization

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps({"t": float(t), "size": int(s)}) + "\n" for t, s in zip(self.times, self.sizes)
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "size"])
        for t, s in zip(self.times, self.sizes):
            w.writerow([repr(float(t)), int(s)])
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "PduTrace":
        """Parse JSONL, or CSV when the first non-blank line is ``t,size``."""
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            return cls()
        if lines[0].replace(" ", "") == "t,size":
            rows = list(csv.DictReader(io.StringIO("\n".join(lines))))
            return cls([float(r["t"]) for r in rows], [int(r["size"]) for r in rows])
        recs = [json.loads(ln) for ln in lines]
        return cls([float(r["t"]) for r in recs], [int(r["size"]) for r in recs])


def _normalize(schedule: SymbolSchedule) -> list[tuple[SymbolKind, float, float]]:
    return schedule.merged().intervals()


def _emit(intervals, profile: ChannelProfile, rng: np.random.Generator) -> PduTrace:
    if not intervals:
        return PduTrace()
    starts, ends, steps, lo, hi = [], [], [], [], []
    shift = 0.0
    for kind, a, b in intervals:
        a = max(a, shift) if kind is SymbolKind.SILENCE else a
        if kind is SymbolKind.VOICE:
            b = b + profile.vad_hangover_s
            shift = b
            steps.append(profile.talk_pdu_interval_s)
            lo.append(profile.talk_size_min)
            hi.append(profile.talk_size_max)
        else:
            steps.append(profile.silence_pdu_interval_s)
            lo.append(profile.silence_size_min)
            hi.append(profile.silence_size_max)
        starts.append(a)
        ends.append(b)
    times, seg = kernels.emit_grid(np.asarray(starts, float), np.asarray(ends, float),
                                   np.asarray(steps, float))
    lo_a = np.asarray(lo, np.int64)[seg]
    hi_a = np.asarray(hi, np.int64)[seg]
    sizes = rng.integers(lo_a, hi_a + 1) if len(seg) else np.empty(0, np.int64)

    # impairments: draws happen regardless of magnitude so that a sweep over
    # one impairment reuses the same underlying random numbers
    noise = rng.standard_normal(len(times))
    times = np.maximum(times + profile.jitter_std_s * noise, 0.0)
    order = np.argsort(times, kind="stable")
    times, sizes = times[order], sizes[order]

    keep = rng.random(len(times)) >= profile.loss_prob
    times, sizes = times[keep], sizes[keep]

    span = max(b for _, _, b in intervals)
    n_spur = rng.poisson(profile.spurious_pdu_rate_hz * span)
    if n_spur:
        spur_t = rng.uniform(0.0, span, n_spur)
        n_sil = profile.silence_size_max - profile.silence_size_min + 1
        n_talk = profile.talk_size_max - profile.talk_size_min + 1
        pick = rng.integers(0, n_sil + n_talk, n_spur)
        spur_s = np.where(pick < n_sil, profile.silence_size_min + pick,
                          profile.talk_size_min + pick - n_sil)
        times = np.concatenate([times, spur_t])
        sizes = np.concatenate([sizes, spur_s])
        order = np.argsort(times, kind="stable")
        times, sizes = times[order], sizes[order]

    times = np.round(times, TIME_DECIMALS)
    return PduTrace(times, sizes)


def synthesize_trace(schedule: SymbolSchedule, profile: ChannelProfile = ChannelProfile(),
                     seed: int = 0) -> PduTrace:
    """PDU trace produced while ``schedule`` is played into the device.

    Voice segments emit talk PDUs every ``talk_pdu_interval_s`` from the
    segment start until its end plus the VAD hangover; the hangover delays
    the next silence segment's PDUs.
    """
    rng = np.random.default_rng(seed)
    return _emit(_normalize(schedule), profile, rng)


def natural_schedule(params: NaturalUsageParams, seed: int = 0) -> SymbolSchedule:
    """Alternating talk/pause durations drawn from lognormals, truncated at
    the session length. Sessions start with talk."""
    rng = np.random.default_rng(seed)
    return _natural_schedule(params, rng)


def _lognormal(rng, mean, sigma):
    return rng.lognormal(math.log(mean) - sigma * sigma / 2.0, sigma)


def _natural_schedule(params: NaturalUsageParams, rng) -> SymbolSchedule:
    segs = []
    t = 0.0
    kind = SymbolKind.VOICE
    while t < params.session_duration_s:
        mean = params.mean_talk_s if kind is SymbolKind.VOICE else params.mean_pause_s
        d = min(_lognormal(rng, mean, params.sigma), params.session_duration_s - t)
        if d > 0:
            segs.append(Segment(kind, float(d)))
        t += d
        kind = kind.other()
    return SymbolSchedule(tuple(segs))


def generate_natural_trace(params: NaturalUsageParams = NaturalUsageParams(),
                           profile: ChannelProfile = ChannelProfile(), seed: int = 0) -> PduTrace:
    rng = np.random.default_rng(seed)
    sched = _natural_schedule(params, rng)
    return _emit(_normalize(sched), profile, rng)


def simulate_recognition(schedule: SymbolSchedule, mode: str = "covert",
                         lexicon: Sequence[str] = (), seed: int = 0,
                         token: str = COVERT_TOKEN) -> list[str]:
    """Text the recognizer would return for ``schedule``.

    ``covert``: one ``token`` per voice segment, the replicated sample being
    recognized as the same word every time. ``natural``: for each voice
    segment of length d, Poisson(d / 0.4) words drawn i.i.d. from the
    lexicon's token frequencies.
    """
    voices = [s for s in schedule.segments if s.kind is SymbolKind.VOICE]
    if mode == "covert":
        return [token] * len(voices)
    if mode != "natural":
        raise ValueError(f"unknown recognition mode {mode!r}")
    if len(lexicon) == 0:
        raise EmptyLexicon("natural recognition needs a non-empty lexicon")
    vocab, counts = np.unique(np.asarray(list(lexicon), dtype=object), return_counts=True)
    probs = counts / counts.sum()
    rng = np.random.default_rng(seed)
    out: list[str] = []
    for seg in voices:
        n = rng.poisson(seg.duration_s / SECONDS_PER_TOKEN)
        if n:
            out.extend(str(w) for w in rng.choice(vocab, size=n, p=probs))
    return out


def profile_field_names() -> list[str]:
    return [f.name for f in fields(ChannelProfile)]
