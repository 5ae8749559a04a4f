"""Bit error rate, goodput and channel-rate figures."""
from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np

from .errors import ZeroDuration
from .symbolcodec import TimingParams, encode_digits, frame_payload

CSV_HEADER = ("payload_len", "elapsed_s", "ber", "goodput_Bps", "symbol_rate_sps")


def ber(sent: str, received: str) -> float:
    """Positional bit errors plus the length difference, over the longer length.

    Normalizing by the longer sequence keeps the rate symmetric and <= 1;
    for equal lengths it is the plain Hamming fraction.
    """
    n = min(len(sent), len(received))
    flips = sum(a != b for a, b in zip(sent[:n], received[:n]))
    return (flips + abs(len(sent) - len(received))) / max(len(sent), len(received), 1)


def goodput(payload_len: int, elapsed_s: float) -> float:
    if not elapsed_s > 0:
        raise ZeroDuration("elapsed time must be positive")
    return payload_len / elapsed_s


@dataclass(frozen=True)
class ChannelMetrics:
    payload_len: int
    elapsed_s: float
    ber: float
    goodput_Bps: float
    symbol_rate_sps: float

    def csv_row(self) -> str:
        return ",".join(_fmt(v) for v in astuple(self))


def _fmt(v) -> str:
    return str(v) if isinstance(v, (int, np.integer)) else repr(float(v))


def frame_duration(bits: str, timing: TimingParams = TimingParams()) -> float:
    """Closed-form on-air time: ones * voice + zeros * silence."""
    ones = bits.count("1")
    return ones * timing.voice_symbol_s + (len(bits) - ones) * timing.silence_symbol_s


def random_card_number(rng: np.random.Generator, digits: int = 16) -> str:
    return "".join(str(d) for d in rng.integers(0, 10, digits))


def card_airtime_stats(n: int = 1000, seed: int = 0, mode: str = "bcd",
                       timing: TimingParams = TimingParams()) -> dict:
    """On-air duration of framed 16-digit card numbers over ``n`` random draws."""
    rng = np.random.default_rng(seed)
    durs = []
    payload_len = 0
    for _ in range(n):
        payload = encode_digits(random_card_number(rng), mode)
        payload_len = len(payload)
        durs.append(frame_duration(frame_payload(payload), timing))
    durs = np.asarray(durs)
    mean = float(durs.mean())
    return {
        "frame_bits": 8 * (payload_len + 3),
        "mean_s": mean,
        "min_s": float(durs.min()),
        "max_s": float(durs.max()),
        "goodput_Bps": goodput(payload_len, mean),
        # digits of the card number delivered per second, the figure a reader
        # compares against a bytes-per-second claim
        "digits_per_s": 16 / mean,
    }
